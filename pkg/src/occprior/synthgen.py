"""Procedural generator of small urban maps and a least-cost trajectory oracle.

Maps use four classes (sidewalk, grass, road, obstacle): straight road bands
flanked by sidewalk strips, standalone sidewalk corridors, grass background
and rectangular obstacle blobs. Ground-truth trajectories come from a noisy
least-cost search between boundary sidewalk cells, which yields both
sidewalk-following paths and occasional corner cutting or road crossing where
the topology makes detours expensive.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .gridmap import (
    ClassTable,
    NEIGHBOR_OFFSETS,
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
)

SIDEWALK, GRASS, ROAD, OBSTACLE = 0, 1, 2, 3

U4_CLASSES = ClassTable(
    names=("sidewalk", "grass", "road", "obstacle"),
    walkable=(True, True, False, False),
)

# Generator-internal step costs; classes absent from the mapping are
# impassable for the oracle. Not ground truth, only tuned for plausible
# pedestrian behavior: sidewalks preferred, grass corners cut where they
# shorten the route enough, roads crossed only when detours get long.
DEFAULT_ORACLE_COSTS = {"sidewalk": 0.35, "grass": 0.7, "road": 1.4}

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of one generated map and its oracle trajectories.

    gate_count limits trajectory endpoints to that many boundary sidewalk
    cells per map, mimicking how pedestrian flows enter real scenes through
    a handful of entrances; 0 admits every boundary sidewalk cell.
    """

    width: int = 32
    height: int = 32
    seed: int = 0
    road_count: int = 1
    obstacle_density: float = 0.28
    trajectories_per_map: int = 30
    oracle_costs: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_ORACLE_COSTS)
    )
    oracle_noise: float = 0.2
    gate_count: int = 6

    def __post_init__(self):
        if self.road_count < 0:
            raise ValueError("road_count must be ≥ 0")
        if not 0.0 <= self.obstacle_density <= 1.0:
            raise ValueError("obstacle_density must be in [0, 1]")
        if self.trajectories_per_map < 1:
            raise ValueError("trajectories_per_map must be ≥ 1")
        if self.oracle_noise < 0:
            raise ValueError("oracle_noise must be ≥ 0")
        if self.gate_count < 0:
            raise ValueError("gate_count must be ≥ 0")
        for name, cost in self.oracle_costs.items():
            if not (cost > 0 and math.isfinite(cost)):
                raise ValueError(f"oracle cost for {name!r} must be positive")


def _rng_for(spec: GeneratorSpec, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([spec.seed & _SEED_MASK, stream]))


def _paint_roads(cells, rng, road_count):
    h, w = cells.shape
    for _ in range(road_count):
        road_w = 2
        if rng.random() < 0.5:  # horizontal band
            pos = int(rng.integers(3, h - 3 - road_w))
            cells[pos : pos + road_w, :] = ROAD
            for flank in (pos - 1, pos + road_w):
                row = cells[flank, :]
                row[row == GRASS] = SIDEWALK
        else:
            pos = int(rng.integers(3, w - 3 - road_w))
            cells[:, pos : pos + road_w] = ROAD
            for flank in (pos - 1, pos + road_w):
                col = cells[:, flank]
                col[col == GRASS] = SIDEWALK


def _paint_sidewalk_corridors(cells, rng):
    # Map-spanning walkways; they never overwrite roads, so a crossing band
    # leaves a road gap that pedestrians must step over.
    h, w = cells.shape
    n = int(rng.integers(1, 3))
    for _ in range(n):
        sw = int(rng.integers(1, 3))
        if rng.random() < 0.5:
            pos = int(rng.integers(1, h - 1 - sw))
            band = cells[pos : pos + sw, :]
        else:
            pos = int(rng.integers(1, w - 1 - sw))
            band = cells[:, pos : pos + sw]
        band[band == GRASS] = SIDEWALK


def _paint_obstacles(cells, rng, density):
    h, w = cells.shape
    target = int(round(density * w * h))
    placed = 0
    tries = 0
    while placed < target and tries < 300:
        tries += 1
        ow = int(rng.integers(2, 7))
        oh = int(rng.integers(2, 7))
        x0 = int(rng.integers(0, w - ow + 1))
        y0 = int(rng.integers(0, h - oh + 1))
        block = cells[y0 : y0 + oh, x0 : x0 + ow]
        if np.all(block == GRASS):
            block[:] = OBSTACLE
            placed += ow * oh


def _boundary_sidewalk(cells) -> list[tuple[int, int]]:
    h, w = cells.shape
    out = []
    for y in range(h):
        for x in range(w):
            if (x in (0, w - 1) or y in (0, h - 1)) and cells[y, x] == SIDEWALK:
                out.append((x, y))
    return out


def _connected(cells) -> bool:
    """All boundary sidewalk cells joined through non-obstacle cells."""
    targets = _boundary_sidewalk(cells)
    if not targets:
        return False
    h, w = cells.shape
    seen = np.zeros((h, w), dtype=bool)
    queue = deque([targets[0]])
    seen[targets[0][1], targets[0][0]] = True
    while queue:
        x, y = queue.popleft()
        for dx, dy in NEIGHBOR_OFFSETS:
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and not seen[ny, nx] and cells[ny, nx] != OBSTACLE:
                seen[ny, nx] = True
                queue.append((nx, ny))
    return all(seen[y, x] for x, y in targets)


def generate_map(spec: GeneratorSpec) -> SemanticMap:
    """Generate a connected 4-class urban map, deterministic in spec.seed."""
    if spec.width < 16 or spec.height < 16:
        raise ValueError("map dimensions must be ≥ 16")
    rng = _rng_for(spec, 0)
    for _ in range(100):
        cells = np.full((spec.height, spec.width), GRASS, dtype=np.int32)
        _paint_roads(cells, rng, spec.road_count)
        _paint_sidewalk_corridors(cells, rng)
        _paint_obstacles(cells, rng, spec.obstacle_density)
        if _connected(cells):
            return SemanticMap(
                width=spec.width, height=spec.height, classes=U4_CLASSES, cells=cells
            )
    raise ValueError("generator failed to produce connected map")


def _oracle_cost_field(grid_map: SemanticMap, spec: GeneratorSpec) -> np.ndarray:
    """Per-cell base step cost, inf where the oracle may not enter."""
    k = grid_map.num_classes
    per_class = np.full(k, np.inf)
    for i, name in enumerate(grid_map.classes.names):
        if name in spec.oracle_costs:
            per_class[i] = spec.oracle_costs[name]
        elif grid_map.classes.walkable[i]:
            raise ValueError(f"walkable class {name!r} has no oracle cost")
    return per_class[grid_map.cells]


def _dijkstra(cost, start, goal):
    """Deterministic least-cost 8-connected path; every move, diagonal or
    not, pays the entered cell's cost. Returns None if the goal is
    unreachable."""
    h, w = cost.shape
    dist = np.full((h, w), np.inf)
    parent = {}
    dist[start[1], start[0]] = 0.0
    counter = 0
    heap = [(0.0, counter, start)]
    while heap:
        d, _, (x, y) = heapq.heappop(heap)
        if (x, y) == goal:
            path = [(x, y)]
            while path[-1] != start:
                path.append(parent[path[-1]])
            path.reverse()
            return path
        if d > dist[y, x]:
            continue
        for dx, dy in NEIGHBOR_OFFSETS:
            nx, ny = x + dx, y + dy
            if not (0 <= nx < w and 0 <= ny < h):
                continue
            step = cost[ny, nx]
            if not np.isfinite(step):
                continue
            nd = d + step
            if nd < dist[ny, nx]:
                dist[ny, nx] = nd
                parent[(nx, ny)] = (x, y)
                counter += 1
                heapq.heappush(heap, (nd, counter, (nx, ny)))
    return None


def _has_far_pair(cells_list, min_sep) -> bool:
    return any(
        max(abs(ax - bx), abs(ay - by)) >= min_sep
        for i, (ax, ay) in enumerate(cells_list)
        for bx, by in cells_list[i + 1 :]
    )


def oracle_trajectories(grid_map: SemanticMap, spec: GeneratorSpec) -> list[Trajectory]:
    """Sample ground-truth trajectories between far-apart boundary sidewalk
    cells with a per-trajectory noisy least-cost search.

    With gate_count > 0, endpoints come from a per-map subset of boundary
    sidewalk cells, so popular routes repeat the way they do around real
    entrances (per-trajectory noise still varies the exact path)."""
    rng = _rng_for(spec, 1)
    base_cost = _oracle_cost_field(grid_map, spec)
    candidates = _boundary_sidewalk(grid_map.cells)
    min_sep = spec.width // 2
    if not _has_far_pair(candidates, min_sep):
        raise ValueError("no valid endpoint pair on boundary sidewalk")
    if spec.gate_count and spec.gate_count < len(candidates):
        for _ in range(100):
            picked = rng.choice(len(candidates), size=spec.gate_count, replace=False)
            gates = [candidates[i] for i in picked]
            if _has_far_pair(gates, min_sep):
                candidates = gates
                break

    trajectories = []
    for t in range(spec.trajectories_per_map):
        noise = rng.uniform(0.0, spec.oracle_noise, size=base_cost.shape)
        cost = base_cost + noise
        path = None
        for _ in range(100):
            i = int(rng.integers(len(candidates)))
            j = int(rng.integers(len(candidates)))
            (ax, ay), (bx, by) = candidates[i], candidates[j]
            if max(abs(ax - bx), abs(ay - by)) < min_sep:
                continue
            path = _dijkstra(cost, (ax, ay), (bx, by))
            if path is not None:
                break
        if path is None:
            raise ValueError(f"no reachable endpoint pair for trajectory {t}")
        trajectories.append(Trajectory(states=tuple(path)))
    return trajectories


# ---------------------------------------------------------------------------
# Dataset building and manifest I/O. A manifest is one line per map:
# `<map.smap> <trajs.traj> <gt.occ>`, paths relative to the manifest.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MapSample:
    """One dataset entry: map, demonstration trajectories, ground truth."""

    name: str
    grid_map: SemanticMap
    trajectories: tuple[Trajectory, ...]
    occupancy: OccupancyGrid


def _child_seed(seed: int, index: int) -> int:
    ss = np.random.SeedSequence([seed & _SEED_MASK, index])
    return int(ss.generate_state(1, np.uint64)[0])


def build_dataset(n_maps: int, spec: GeneratorSpec, out_dir,
                  variations: Sequence[Mapping] = ()) -> Path:
    """Write n_maps (.smap, .traj, .occ) triples plus a manifest file.

    Deterministic in spec.seed; returns the manifest path. `variations`
    optionally cycles per-map field overrides (e.g. road_count or
    obstacle_density values) over the maps, the way a hand-built corpus
    mixes sparse and cluttered layouts.
    """
    if n_maps < 1:
        raise ValueError("n_maps must be ≥ 1")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = []
    for i in range(n_maps):
        overrides = dict(variations[i % len(variations)]) if variations else {}
        sub = replace(spec, seed=_child_seed(spec.seed, i), **overrides)
        grid_map = generate_map(sub)
        trajs = oracle_trajectories(grid_map, sub)
        occ = occupancy_from_trajectories(grid_map, trajs)
        stem = f"map_{i:03d}"
        save_map(grid_map, out / f"{stem}.smap")
        save_trajectories(trajs, out / f"{stem}.traj")
        save_occupancy(occ, out / f"{stem}.occ")
        lines.append(f"{stem}.smap {stem}.traj {stem}.occ")
    manifest = out / "manifest.txt"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


def load_manifest(path) -> list[tuple[Path, Path, Path]]:
    base = Path(path).parent
    triples = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"manifest line {lineno}: expected 3 paths")
        triples.append(tuple(base / p for p in parts))
    if not triples:
        raise ValueError("manifest lists no maps")
    return triples


def load_dataset(path) -> list[MapSample]:
    samples = []
    for map_path, traj_path, occ_path in load_manifest(path):
        samples.append(
            MapSample(
                name=map_path.stem,
                grid_map=load_map(map_path),
                trajectories=tuple(load_trajectories(traj_path)),
                occupancy=load_occupancy(occ_path),
            )
        )
    return samples
