"""Maximum-entropy inverse optimal control over semantic grid maps.

The learner recovers per-class step costs from demonstration trajectories.
Each state s has cost c(s) = r0 + theta[class(s)] and the induced trajectory
distribution weights a path by exp(-sum of step costs), so the planning
reward is R(s) = -c(s). The backward pass runs softmax (log-sum-exp) value
iteration toward a fixed goal and yields a stochastic policy; the forward
pass simulates rollouts under that policy and accumulates visitation counts.
Training matches per-class visitation mass between demonstrations and
rollouts with an exponentiated-gradient update on the cost simplex.

Transitions are deterministic and 8-connected. Cells of classes in the
impassable set (by default the "obstacle" class) are excluded from planning
entirely: actions into them are invalid regardless of learned costs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .gridmap import FormatError, NEIGHBOR_OFFSETS, SemanticMap, Trajectory
from .synthgen import MapSample

log = logging.getLogger(__name__)

DEFAULT_IMPASSABLE = frozenset({"obstacle"})

_NORM_TOL = 1e-9


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True, eq=False)
class ThetaModel:
    """Learned per-class costs, base cost and endpoint placement prior."""

    class_names: tuple[str, ...]
    theta: np.ndarray          # (K,) non-negative, sums to 1
    r0: float                  # positive base cost per step
    endpoint_prior: np.ndarray  # (K,) non-negative, sums to 1

    def __post_init__(self):
        object.__setattr__(self, "class_names", tuple(self.class_names))
        theta = np.asarray(self.theta, dtype=np.float64)
        prior = np.asarray(self.endpoint_prior, dtype=np.float64)
        k = len(self.class_names)
        if theta.shape != (k,) or prior.shape != (k,):
            raise ValueError("theta and endpoint_prior must have one entry per class")
        if theta.min() < 0 or prior.min() < 0:
            raise ValueError("theta and endpoint_prior must be non-negative")
        if abs(theta.sum() - 1.0) > _NORM_TOL:
            raise ValueError(f"theta sums to {theta.sum():.12g}, expected 1")
        if abs(prior.sum() - 1.0) > _NORM_TOL:
            raise ValueError(f"endpoint_prior sums to {prior.sum():.12g}, expected 1")
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")
        theta.setflags(write=False)
        prior.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "endpoint_prior", prior)

    @classmethod
    def uniform(cls, class_names: Sequence[str], r0: float = 0.01) -> "ThetaModel":
        k = len(class_names)
        return cls(
            class_names=tuple(class_names),
            theta=np.full(k, 1.0 / k),
            r0=r0,
            endpoint_prior=np.full(k, 1.0 / k),
        )

    def theta_for(self, grid_map: SemanticMap) -> np.ndarray:
        """Theta entries aligned with the map's class table (by name)."""
        missing = [n for n in grid_map.classes.names if n not in self.class_names]
        if missing:
            raise ValueError(f"model does not cover map classes: {', '.join(missing)}")
        idx = [self.class_names.index(n) for n in grid_map.classes.names]
        return self.theta[idx]

    def prior_for(self, grid_map: SemanticMap) -> np.ndarray:
        missing = [n for n in grid_map.classes.names if n not in self.class_names]
        if missing:
            raise ValueError(f"model does not cover map classes: {', '.join(missing)}")
        idx = [self.class_names.index(n) for n in grid_map.classes.names]
        return self.endpoint_prior[idx]


@dataclass(frozen=True, eq=False)
class Policy:
    """Stochastic goal-directed policy from one backward pass.

    q, v and probs are (height, width, 8) / (height, width) arrays over the
    fixed 8-neighbor action order; probs rows are normalized over valid
    actions and zero elsewhere. v at the goal is 0 by construction.
    """

    q: np.ndarray
    v: np.ndarray
    probs: np.ndarray
    goal: tuple[int, int]

    def __post_init__(self):
        for name in ("q", "v", "probs"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "goal", (int(self.goal[0]), int(self.goal[1])))


@dataclass(frozen=True)
class IocmmHyper:
    """Training and planning hyperparameters.

    vi_max_sweeps and rollout_cap default to 4*(width+height) and
    8*(width+height) of the map at hand when left as None.
    """

    traj_batch: int = 10
    map_batch: int = 7
    alpha: float = 0.1
    lam: float = 1.0
    epsilon: float = 1e-3
    max_iters: int = 300
    vi_tolerance: float = 1e-6
    vi_max_sweeps: int | None = None
    rollout_cap: int | None = None
    train_rollouts: int = 5

    def __post_init__(self):
        if self.traj_batch < 1 or self.map_batch < 1:
            raise ValueError("batch sizes must be ≥ 1")
        if self.alpha <= 0 or self.epsilon <= 0 or self.vi_tolerance <= 0:
            raise ValueError("alpha, epsilon and vi_tolerance must be positive")
        if self.lam < 0:
            raise ValueError("learning rate must be ≥ 0")
        if self.max_iters < 1 or self.train_rollouts < 1:
            raise ValueError("max_iters and train_rollouts must be ≥ 1")
        for name in ("vi_max_sweeps", "rollout_cap"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be ≥ 1")

    def sweeps_for(self, grid_map: SemanticMap) -> int:
        if self.vi_max_sweeps is not None:
            return self.vi_max_sweeps
        return 4 * (grid_map.width + grid_map.height)

    def cap_for(self, grid_map: SemanticMap) -> int:
        if self.rollout_cap is not None:
            return self.rollout_cap
        return 8 * (grid_map.width + grid_map.height)


def state_cost(grid_map: SemanticMap, model: ThetaModel, state: tuple[int, int]) -> float:
    """Step cost of one state: r0 + theta of its class."""
    x, y = state
    if not grid_map.in_bounds(x, y):
        raise ValueError(f"state ({x}, {y}) out of bounds")
    return float(model.r0 + model.theta_for(grid_map)[grid_map.cells[y, x]])


def cost_field(grid_map: SemanticMap, model: ThetaModel) -> np.ndarray:
    """Per-cell step cost grid, (height, width)."""
    return model.r0 + model.theta_for(grid_map)[grid_map.cells]


def _passable_mask(grid_map: SemanticMap, impassable: frozenset[str]) -> np.ndarray:
    ok = np.array([n not in impassable for n in grid_map.classes.names], dtype=bool)
    return ok[grid_map.cells]


def _valid_action_mask(passable: np.ndarray) -> np.ndarray:
    """(8, H, W) mask: action valid iff source and in-bounds target passable."""
    h, w = passable.shape
    pad = np.zeros((h + 2, w + 2), dtype=bool)
    pad[1:-1, 1:-1] = passable
    valid = np.empty((8, h, w), dtype=bool)
    for a, (dx, dy) in enumerate(NEIGHBOR_OFFSETS):
        valid[a] = passable & pad[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
    return valid


def _softmax_sweeps(exp_reward: np.ndarray, goal: tuple[int, int], max_sweeps: int,
                    tol: float) -> np.ndarray:
    """Softmax value iteration toward `goal` in rescaled exp-space.

    Works on Z = exp(V - offset) with a running scalar offset, which is
    numerically equivalent to log-sum-exp sweeps: invalid successors carry
    Z = 0 and per-sweep renormalization by the maximum keeps Z in [0, 1].
    Sweeps stop when the largest relative per-state change of Z (first-order
    equal to the value change) drops below tol. Returns V = log Z + offset,
    -inf where the goal is unreachable within the sweep horizon.
    """
    h, w = exp_reward.shape
    gx, gy = goal
    zp = np.zeros((h + 2, w + 2))
    z = zp[1 : h + 1, 1 : w + 1]
    offset = 0.0
    for _ in range(max_sweeps):
        z[gy, gx] = math.exp(-offset) if offset < 745.0 else 0.0
        acc = (
            zp[0:h, 0:w] + zp[0:h, 1 : w + 1] + zp[0:h, 2 : w + 2]
            + zp[1 : h + 1, 0:w] + zp[1 : h + 1, 2 : w + 2]
            + zp[2 : h + 2, 0:w] + zp[2 : h + 2, 1 : w + 1] + zp[2 : h + 2, 2 : w + 2]
        )
        z_new = exp_reward * acc
        m = float(z_new.max())
        if m <= 0.0:
            z[:, :] = 0.0
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where((z == 0.0) & (z_new == 0.0), 1.0, z_new / z)
        delta = float(np.max(np.abs(ratio - 1.0)))
        z[:, :] = z_new / m
        offset += math.log(m)
        if delta < tol:
            break
    with np.errstate(divide="ignore"):
        v = np.log(z) + offset
    return v


def _policy_from_values(reward: np.ndarray, v: np.ndarray, valid: np.ndarray,
                        goal: tuple[int, int], alpha: float):
    """Final Q, soft value and action probabilities from converged values."""
    h, w = reward.shape
    gx, gy = goal
    v_pin = v.copy()
    v_pin[gy, gx] = 0.0
    vp = np.full((h + 2, w + 2), -np.inf)
    vp[1:-1, 1:-1] = v_pin
    q = np.empty((8, h, w))
    for a, (dx, dy) in enumerate(NEIGHBOR_OFFSETS):
        q[a] = reward + vp[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
    q[~valid] = -np.inf

    m = q.max(axis=0)
    m_safe = np.where(np.isfinite(m), m, 0.0)
    sum_exp = np.exp(q - m_safe).sum(axis=0)
    with np.errstate(divide="ignore"):
        v_soft = np.where(sum_exp > 0.0, m_safe + np.log(sum_exp), -np.inf)

    vs_safe = np.where(np.isfinite(v_soft), v_soft, 0.0)
    raw = np.exp(alpha * (q - vs_safe))
    raw[~valid] = 0.0
    raw[:, ~np.isfinite(v_soft)] = 0.0
    # States never reached within the sweep horizon keep a uniform policy
    # over their valid actions so that rollouts from them remain defined.
    row_sum = raw.sum(axis=0)
    fallback = valid.any(axis=0) & (row_sum <= 0.0)
    if fallback.any():
        raw[:, fallback] = valid[:, fallback]
        row_sum = raw.sum(axis=0)
    with np.errstate(invalid="ignore"):
        probs = np.where(row_sum > 0.0, raw / row_sum, 0.0)
    return q, v_soft, probs


def backward_pass(grid_map: SemanticMap, model: ThetaModel, goal: tuple[int, int],
                  hyper: IocmmHyper | None = None,
                  impassable: Iterable[str] | None = None) -> Policy:
    """Softmax value iteration toward `goal`, returning the rollout policy.

    V(goal) is pinned to 0 each sweep; Q(s, a) = R(s) + V(succ(s, a)) with
    R(s) = -(r0 + theta[class(s)]); V(s) is the log-sum-exp of Q over valid
    actions; action probabilities follow exp(alpha * (Q - V)), renormalized
    per state.
    """
    hyper = hyper or IocmmHyper()
    imp = DEFAULT_IMPASSABLE if impassable is None else frozenset(impassable)
    gx, gy = int(goal[0]), int(goal[1])
    if not grid_map.in_bounds(gx, gy):
        raise ValueError(f"goal ({gx}, {gy}) out of bounds")
    passable = _passable_mask(grid_map, imp)
    if not passable[gy, gx]:
        raise ValueError(f"goal ({gx}, {gy}) lies on an impassable cell")
    valid = _valid_action_mask(passable)
    if not valid.any():
        raise ValueError("degenerate map: no state has a valid action")

    reward = -cost_field(grid_map, model)
    exp_reward = np.where(passable, np.exp(reward), 0.0)
    v = _softmax_sweeps(exp_reward, (gx, gy), hyper.sweeps_for(grid_map),
                        hyper.vi_tolerance)
    q, v_soft, probs = _policy_from_values(reward, v, valid, (gx, gy), hyper.alpha)
    v_out = v_soft.copy()
    v_out[gy, gx] = 0.0
    return Policy(
        q=np.ascontiguousarray(np.moveaxis(q, 0, -1)),
        v=v_out,
        probs=np.ascontiguousarray(np.moveaxis(probs, 0, -1)),
        goal=(gx, gy),
    )


@lru_cache(maxsize=64)
def _successor_table(h: int, w: int) -> np.ndarray:
    """(h*w, 8) flat successor indices, -1 outside the map."""
    ys, xs = np.divmod(np.arange(h * w), w)
    succ = np.full((h * w, 8), -1, dtype=np.int64)
    for a, (dx, dy) in enumerate(NEIGHBOR_OFFSETS):
        nx, ny = xs + dx, ys + dy
        ok = (nx >= 0) & (nx < w) & (ny >= 0) & (ny < h)
        succ[ok, a] = ny[ok] * w + nx[ok]
    succ.setflags(write=False)
    return succ


def forward_pass(grid_map: SemanticMap, policy: Policy, start: tuple[int, int],
                 n: int, hyper: IocmmHyper | None = None, rng=None,
                 impassable: Iterable[str] | None = None):
    """Simulate n rollouts from `start` under the policy.

    Returns (counts, truncated): counts is the raw visitation grid, with
    every visited state counted including the start and the goal arrival;
    truncated is the number of rollouts that hit the step cap (or a state
    without actions) before reaching the goal. Truncated rollouts still
    contribute their visited states.
    """
    hyper = hyper or IocmmHyper()
    rng = _as_rng(rng)
    imp = DEFAULT_IMPASSABLE if impassable is None else frozenset(impassable)
    sx, sy = int(start[0]), int(start[1])
    if not grid_map.in_bounds(sx, sy):
        raise ValueError(f"start ({sx}, {sy}) out of bounds")
    if not _passable_mask(grid_map, imp)[sy, sx]:
        raise ValueError(f"start ({sx}, {sy}) lies on an impassable cell")
    if n < 1:
        raise ValueError("n must be ≥ 1")

    h, w = grid_map.height, grid_map.width
    cap = hyper.cap_for(grid_map)
    cdf = np.cumsum(policy.probs.reshape(h * w, 8), axis=1)
    succ = _successor_table(h, w)
    goal_idx = policy.goal[1] * w + policy.goal[0]

    counts = np.zeros(h * w)
    pos = np.full(n, sy * w + sx, dtype=np.int64)
    counts[pos[0]] += float(n)
    alive = pos != goal_idx
    truncated = 0
    for _ in range(cap):
        idx = np.nonzero(alive)[0]
        if idx.size == 0:
            break
        rows = pos[idx]
        total = cdf[rows, 7]
        stuck = total <= 0.0
        if stuck.any():
            truncated += int(stuck.sum())
            alive[idx[stuck]] = False
            idx, rows, total = idx[~stuck], rows[~stuck], total[~stuck]
            if idx.size == 0:
                continue
        u = rng.random(idx.size) * total
        act = (u[:, None] >= cdf[rows]).sum(axis=1)
        nxt = succ[rows, act]
        pos[idx] = nxt
        np.add.at(counts, nxt, 1.0)
        alive[idx[nxt == goal_idx]] = False
    truncated += int(alive.sum())
    return counts.reshape(h, w), truncated


def sample_rollout(grid_map: SemanticMap, policy: Policy, start: tuple[int, int],
                   hyper: IocmmHyper | None = None, rng=None) -> Trajectory:
    """One rollout materialized as an explicit trajectory."""
    hyper = hyper or IocmmHyper()
    rng = _as_rng(rng)
    h, w = grid_map.height, grid_map.width
    cdf = np.cumsum(policy.probs.reshape(h * w, 8), axis=1)
    succ = _successor_table(h, w)
    goal_idx = policy.goal[1] * w + policy.goal[0]
    s = int(start[1]) * w + int(start[0])
    states = [(int(start[0]), int(start[1]))]
    for _ in range(hyper.cap_for(grid_map)):
        if s == goal_idx:
            break
        total = cdf[s, 7]
        if total <= 0.0:
            break
        u = rng.random() * total
        a = int(np.searchsorted(cdf[s], u, side="right"))
        s = int(succ[s, a])
        states.append((s % w, s // w))
    if len(states) < 2:
        raise ValueError("rollout ended before leaving the start state")
    return Trajectory(states=tuple(states))


def empirical_feature_count(grid_map: SemanticMap,
                            trajectories: Sequence[Trajectory]) -> np.ndarray:
    """Per-class visit counts of the demonstrations, averaged per trajectory."""
    if not trajectories:
        raise ValueError("no trajectories")
    k = grid_map.num_classes
    total = np.zeros(k)
    for traj in trajectories:
        traj.validate_on(grid_map)
        xs = np.fromiter((s[0] for s in traj), dtype=np.int64, count=len(traj))
        ys = np.fromiter((s[1] for s in traj), dtype=np.int64, count=len(traj))
        total += np.bincount(grid_map.cells[ys, xs], minlength=k)
    return total / len(trajectories)


def expected_feature_count(grid_map: SemanticMap, visitation: np.ndarray) -> np.ndarray:
    """Per-class sums of a visitation-count grid."""
    visitation = np.asarray(visitation, dtype=np.float64)
    if visitation.min() < 0:
        raise ValueError("visitation counts must be non-negative")
    return np.bincount(
        grid_map.cells.ravel(), weights=visitation.ravel(),
        minlength=grid_map.num_classes,
    )


def exponentiated_update(theta: np.ndarray, grad: np.ndarray, lam: float) -> np.ndarray:
    """Multiplicative simplex step: theta * exp(lam * grad), renormalized.

    Keeps every component positive and the vector summing to 1; adding a
    constant to all gradient components cancels in the renormalization.
    """
    out = theta * np.exp(lam * grad)
    return out / out.sum()


@dataclass(frozen=True)
class TrainRecord:
    """One training iteration: theta after the update and the gradient norm."""

    iteration: int
    theta: np.ndarray
    grad_norm: float


def train_iocmm(samples: Sequence[MapSample], hyper: IocmmHyper | None = None,
                model0: ThetaModel | None = None, rng=None,
                impassable: Iterable[str] | None = None):
    """Exponentiated-gradient cost learning over batches of maps.

    Per iteration: sample map_batch maps and traj_batch demonstrations per
    map (both without replacement), accumulate the demonstrations' mean
    per-class visit counts and the rollout visitation counts from one
    backward/forward pass per demonstration, normalize both to sum 1 and
    step theta multiplicatively. Classes over-visited by rollouts relative
    to the demonstrations get costlier: theta <- theta * exp(lam * (fhat -
    fbar)), renormalized onto the simplex. Stops once the gradient norm
    falls below epsilon.

    Returns (model, records) with one TrainRecord per iteration.
    """
    if not samples:
        raise ValueError("empty dataset")
    hyper = hyper or IocmmHyper()
    rng = _as_rng(rng)
    names = samples[0].grid_map.classes.names
    for s in samples:
        if s.grid_map.classes.names != names:
            raise ValueError(f"map {s.name} uses a different class table")
    model = model0 if model0 is not None else ThetaModel.uniform(names)
    theta = model.theta.copy()
    k = len(names)

    records: list[TrainRecord] = []
    for iteration in range(1, hyper.max_iters + 1):
        current = replace(model, theta=theta)
        n_maps = min(hyper.map_batch, len(samples))
        chosen = rng.choice(len(samples), size=n_maps, replace=False)
        fbar = np.zeros(k)
        fhat = np.zeros(k)
        used = 0
        for si in chosen:
            sample = samples[si]
            trajs = sample.trajectories
            n_traj = min(hyper.traj_batch, len(trajs))
            picked = rng.choice(len(trajs), size=n_traj, replace=False)
            passable = _passable_mask(
                sample.grid_map,
                DEFAULT_IMPASSABLE if impassable is None else frozenset(impassable),
            )
            batch = []
            for ti in picked:
                traj = trajs[ti]
                (x0, y0), (xg, yg) = traj.states[0], traj.states[-1]
                if not (passable[y0, x0] and passable[yg, xg]):
                    log.warning(
                        "skipping trajectory %d of map %s: endpoint on invalid state",
                        ti, sample.name,
                    )
                    continue
                batch.append(traj)
            if not batch:
                continue
            fbar += empirical_feature_count(sample.grid_map, batch)
            policies: dict[tuple[int, int], Policy] = {}
            for traj in batch:
                goal = traj.states[-1]
                policy = policies.get(goal)
                if policy is None:
                    policy = backward_pass(sample.grid_map, current, goal, hyper,
                                           impassable)
                    policies[goal] = policy
                counts, _ = forward_pass(sample.grid_map, policy, traj.states[0],
                                         hyper.train_rollouts, hyper, rng, impassable)
                fhat += expected_feature_count(sample.grid_map, counts)
            used += len(batch)
        if used == 0:
            raise ValueError("all trajectories in the batch were skipped")

        fbar /= fbar.sum()
        fhat /= fhat.sum()
        grad = fhat - fbar
        grad_norm = float(np.linalg.norm(grad))
        theta = exponentiated_update(theta, grad, hyper.lam)
        records.append(TrainRecord(iteration=iteration, theta=theta.copy(),
                                   grad_norm=grad_norm))
        if grad_norm < hyper.epsilon:
            break
    return replace(model, theta=theta), records


def learn_endpoint_prior(samples: Sequence[MapSample]) -> np.ndarray:
    """Per-class probability of trajectory endpoints, add-one smoothed."""
    if not samples:
        raise ValueError("empty dataset")
    k = samples[0].grid_map.num_classes
    counts = np.zeros(k)
    seen = 0
    for sample in samples:
        cells = sample.grid_map.cells
        for traj in sample.trajectories:
            for x, y in (traj.states[0], traj.states[-1]):
                counts[cells[y, x]] += 1.0
                seen += 1
    if seen == 0:
        raise ValueError("dataset has no trajectories")
    return (counts + 1.0) / (seen + k)


def sample_endpoints(grid_map: SemanticMap, model: ThetaModel, strategy: str,
                     temperature: float = 0.01, rng=None,
                     impassable: Iterable[str] | None = None):
    """Draw a (start, goal) pair of distinct states.

    Per-state weight is base(s) scaled linearly with the Euclidean distance
    of s to the map center (plus half a cell so the exact center keeps a
    sliver of mass), which favors long map-spanning trajectories. base(s)
    is the learned endpoint prior of the state's class ("learned") or
    exp(-cost/temperature) ("softmax_cost"). Impassable-class states are
    excluded.
    """
    rng = _as_rng(rng)
    imp = DEFAULT_IMPASSABLE if impassable is None else frozenset(impassable)
    h, w = grid_map.height, grid_map.width
    if strategy == "learned":
        base = model.prior_for(grid_map)[grid_map.cells]
    elif strategy == "softmax_cost":
        if temperature <= 0:
            raise ValueError("temperature must be positive")
        cost = cost_field(grid_map, model)
        base = np.exp(-(cost - cost.min()) / temperature)
    else:
        raise ValueError(f"unknown endpoint strategy {strategy!r}")

    xs, ys = np.meshgrid(np.arange(w), np.arange(h))
    d = np.hypot(xs - (w - 1) / 2.0, ys - (h - 1) / 2.0)
    weights = base * (d + 0.5)
    weights[~_passable_mask(grid_map, imp)] = 0.0
    total = weights.sum()
    if total <= 0.0:
        raise ValueError("all endpoint weight mass is zero")
    if np.count_nonzero(weights) < 2:
        raise ValueError("need at least 2 candidate endpoint states")
    p = (weights / total).ravel()
    s0 = int(rng.choice(h * w, p=p))
    sg = s0
    while sg == s0:
        sg = int(rng.choice(h * w, p=p))
    return (s0 % w, s0 // w), (sg % w, sg // w)


# ---------------------------------------------------------------------------
# Model file I/O (.theta).
# ---------------------------------------------------------------------------


def save_theta(model: ThetaModel, path):
    lines = [
        "THETA 1",
        f"{len(model.class_names)} {model.r0:.9g}",
        " ".join(model.class_names),
        " ".join(f"{v:.9g}" for v in model.theta),
        " ".join(f"{v:.9g}" for v in model.endpoint_prior),
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_theta(path) -> ThetaModel:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "THETA 1":
        raise FormatError("line 1: expected 'THETA 1' header")
    if len(lines) < 5:
        raise FormatError("truncated model file, expected 5 lines")
    head = lines[1].split()
    if len(head) != 2:
        raise FormatError("line 2: expected '<K> <r0>'")
    try:
        k, r0 = int(head[0]), float(head[1])
    except ValueError:
        raise FormatError("line 2: malformed '<K> <r0>'") from None
    names = lines[2].split()
    if len(names) != k:
        raise FormatError(f"line 3: expected {k} class names, got {len(names)}")

    def _vector(line, lineno, what):
        toks = line.split()
        if len(toks) != k:
            raise FormatError(f"line {lineno}: expected {k} {what} values")
        try:
            vec = np.array([float(t) for t in toks])
        except ValueError:
            raise FormatError(f"line {lineno}: malformed float") from None
        total = vec.sum()
        if abs(total - 1.0) > 1e-6:
            raise FormatError(f"line {lineno}: {what} sums to {total:.6g}, expected 1")
        return vec / total

    theta = _vector(lines[3], 4, "theta")
    prior = _vector(lines[4], 5, "endpoint_prior")
    return ThetaModel(class_names=tuple(names), theta=theta, r0=r0,
                      endpoint_prior=prior)
