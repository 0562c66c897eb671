"""Occupancy-prior prediction for a new map, plus the non-CNN baselines."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .gridmap import OccupancyGrid, SemanticMap, walkable_mask
from .maxent import (
    IocmmHyper,
    Policy,
    ThetaModel,
    backward_pass,
    forward_pass,
    sample_endpoints,
    _as_rng,
)
from .synthgen import MapSample


def iocmm_infer(grid_map: SemanticMap, model: ThetaModel, strategy: str = "learned",
                n_traj: int = 500, hyper: IocmmHyper | None = None, rng=None,
                impassable: Iterable[str] | None = None):
    """Predict the occupancy prior by simulating n_traj trajectories.

    Each trajectory draws a fresh (start, goal) pair, plans toward the goal
    and performs one rollout; visitation counts are accumulated over all
    rollouts and normalized to a distribution. Policies are cached per goal
    since the cost model is fixed during inference.

    Returns (occupancy, truncated) where truncated counts rollouts cut off
    at the step cap.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be ≥ 1")
    hyper = hyper or IocmmHyper()
    rng = _as_rng(rng)
    model.theta_for(grid_map)  # raises listing any uncovered class names

    counts = np.zeros((grid_map.height, grid_map.width))
    truncated = 0
    policies: dict[tuple[int, int], Policy] = {}
    for _ in range(n_traj):
        start, goal = sample_endpoints(grid_map, model, strategy, rng=rng,
                                       impassable=impassable)
        policy = policies.get(goal)
        if policy is None:
            policy = backward_pass(grid_map, model, goal, hyper, impassable)
            policies[goal] = policy
        d, t = forward_pass(grid_map, policy, start, 1, hyper, rng, impassable)
        counts += d
        truncated += t
    return OccupancyGrid.from_counts(counts), truncated


def baseline_uniform(grid_map: SemanticMap) -> OccupancyGrid:
    """Uniform distribution over all states."""
    n = grid_map.width * grid_map.height
    values = np.full((grid_map.height, grid_map.width), 1.0 / n)
    return OccupancyGrid(width=grid_map.width, height=grid_map.height, values=values)


def baseline_uniform_walkable(grid_map: SemanticMap) -> OccupancyGrid:
    """Uniform distribution over walkable states, zero elsewhere."""
    mask = walkable_mask(grid_map)
    n = int(mask.sum())
    if n == 0:
        raise ValueError("map has no walkable cells")
    values = np.where(mask, 1.0 / n, 0.0)
    return OccupancyGrid(width=grid_map.width, height=grid_map.height, values=values)


def class_visitation_shares(samples: Sequence[MapSample]) -> dict[str, float]:
    """Per-class share of ground-truth occupancy mass, aggregated by name."""
    if not samples:
        raise ValueError("empty training set")
    shares: dict[str, float] = {}
    for sample in samples:
        k = sample.grid_map.num_classes
        mass = np.bincount(sample.grid_map.cells.ravel(),
                           weights=sample.occupancy.values.ravel(), minlength=k)
        for name, m in zip(sample.grid_map.classes.names, mass):
            shares[name] = shares.get(name, 0.0) + float(m)
    total = sum(shares.values())
    return {name: m / total for name, m in shares.items()}


def baseline_class_prior(samples: Sequence[MapSample],
                         grid_map: SemanticMap) -> OccupancyGrid:
    """Learned per-class mass, spread uniformly within each class.

    Classes absent from the target map lose their mass to renormalization;
    classes of the target map unseen in training get zero mass.
    """
    shares = class_visitation_shares(samples)
    values = np.zeros((grid_map.height, grid_map.width))
    for cid, name in enumerate(grid_map.classes.names):
        cells = grid_map.cells == cid
        n = int(cells.sum())
        if n == 0 or name not in shares:
            continue
        values[cells] = shares[name] / n
    total = values.sum()
    if total <= 0:
        raise ValueError("no training mass on any class of the target map")
    return OccupancyGrid(width=grid_map.width, height=grid_map.height,
                         values=values / total)
