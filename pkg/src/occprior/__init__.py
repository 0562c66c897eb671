"""Occupancy priors of walking pedestrians on semantic grid maps.

Learns per-class walking costs from demonstration trajectories by
maximum-entropy inverse optimal control, simulates trajectories on new maps
to predict where people are likely to be observed, and benchmarks the
predictions against simple baselines with a leave-one-out KL-divergence
protocol. A procedural generator provides synthetic urban maps with
ground-truth trajectories.
"""

from .evaluation import LooResult, kl_divergence, leave_one_out, write_scores_csv
from .gridmap import (
    ClassTable,
    FormatError,
    OccupancyGrid,
    SemanticMap,
    Trajectory,
    load_map,
    load_occupancy,
    load_trajectories,
    occupancy_from_trajectories,
    save_map,
    save_occupancy,
    save_trajectories,
    walkable_mask,
)
from .inference import (
    baseline_class_prior,
    baseline_uniform,
    baseline_uniform_walkable,
    iocmm_infer,
)
from .maxent import (
    IocmmHyper,
    Policy,
    ThetaModel,
    backward_pass,
    empirical_feature_count,
    expected_feature_count,
    forward_pass,
    learn_endpoint_prior,
    load_theta,
    sample_endpoints,
    sample_rollout,
    save_theta,
    state_cost,
    train_iocmm,
)
from .synthgen import (
    GeneratorSpec,
    MapSample,
    build_dataset,
    generate_map,
    load_dataset,
    load_manifest,
    oracle_trajectories,
)

__version__ = "0.1.0"
