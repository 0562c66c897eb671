import numpy as np
import pytest

from occprior.gridmap import SemanticMap, occupancy_from_trajectories
from occprior.maxent import IocmmHyper, ThetaModel, backward_pass, sample_rollout
from occprior.synthgen import MapSample, U4_CLASSES

# ASCII map fixtures: s=sidewalk, g=grass, r=road, o=obstacle.
CHAR_TO_CLASS = {"s": 0, "g": 1, "r": 2, "o": 3}


def map_from_ascii(art: str) -> SemanticMap:
    rows = [line.strip() for line in art.strip().splitlines()]
    cells = np.array([[CHAR_TO_CLASS[ch] for ch in row] for row in rows])
    return SemanticMap(
        width=cells.shape[1], height=cells.shape[0], classes=U4_CLASSES, cells=cells
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---------------------------------------------------------------------------
# Self-consistency fixture: demonstrations drawn from a policy with a known
# cost vector theta*. Three-lane corridors (sidewalk / grass / road) keep all
# routes the same length, so lane choice reflects class costs alone; obstacle
# blocks force measured grass detours and one road dip, which makes the
# ordering of all three walkable classes identifiable from the demos. The
# high base cost keeps value iteration convergent and the near-greedy alpha
# makes rollouts deterministic, so training can drive the feature-matching
# gradient to exactly zero once its rollouts retrace the demonstrations.
# ---------------------------------------------------------------------------

SELFCONS_ARTS = (
    # Corridor worlds with two class discriminators of equal path length:
    # a sidewalk/grass parallel pair (walled from below so both rows see the
    # same branching) and a long grass-over-road run behind gate columns.
    # The demonstrations' lane choices pin sidewalk < grass and grass < road
    # exactly; everything else is geometrically forced.
    "ssssssoooooooooooossssss\n"
    "ogggggooooooooooooggoooo\n"
    "gooogggggggggggggggggggg\n"
    "rrrrrrrrrrrrrrrrrrrrrrrr",
    "ssssssoooooooooooossssss\n"
    "ooooggoooooooooooogggggo\n"
    "ggggggggggggggggggggooog\n"
    "rrrrrrrrrrrrrrrrrrrrrrrr",
)
# Base cost keeps every class strictly below the walk-entropy rate of the
# 8-connected grid (log 8), so value iteration converges and the policies
# stay sharply goal-directed.
SELFCONS_THETA_STAR = np.array([0.05, 0.30, 0.63, 0.02])
SELFCONS_R0 = 2.5
SELFCONS_ALPHA = 100.0


def selfcons_hyper(**overrides) -> IocmmHyper:
    # The moderate learning rate matters: route flips between the paired
    # lanes swing the feature counts by whole segments, and a full-size
    # multiplicative step can cycle across the flip boundary forever.
    base = dict(alpha=SELFCONS_ALPHA, lam=0.25, epsilon=1e-3, max_iters=300,
                traj_batch=10, map_batch=2, train_rollouts=4)
    base.update(overrides)
    return IocmmHyper(**base)


def build_selfcons_fixture(demo_seed=999, demos_per_map=10):
    """Maps plus demonstrations generated by the theta* policy."""
    model_star = ThetaModel(
        class_names=U4_CLASSES.names, theta=SELFCONS_THETA_STAR, r0=SELFCONS_R0,
        endpoint_prior=np.full(4, 0.25),
    )
    hyper = selfcons_hyper()
    demo_rng = np.random.default_rng(demo_seed)
    pairs = (((0, 0), (23, 0)), ((23, 0), (0, 0)))
    samples = []
    for mi, art in enumerate(SELFCONS_ARTS):
        grid_map = map_from_ascii(art)
        trajs = []
        for d in range(demos_per_map):
            start, goal = pairs[d % len(pairs)]
            policy = backward_pass(grid_map, model_star, goal, hyper)
            trajs.append(sample_rollout(grid_map, policy, start, hyper, demo_rng))
        samples.append(MapSample(
            name=f"fixture_{mi}", grid_map=grid_map, trajectories=tuple(trajs),
            occupancy=occupancy_from_trajectories(grid_map, trajs),
        ))
    return samples
