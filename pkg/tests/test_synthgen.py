import math
from collections import deque

import numpy as np
import pytest

from occprior.gridmap import NEIGHBOR_OFFSETS, load_map, load_occupancy
from occprior.synthgen import (
    GRASS,
    OBSTACLE,
    ROAD,
    SIDEWALK,
    GeneratorSpec,
    build_dataset,
    generate_map,
    load_dataset,
    load_manifest,
    oracle_trajectories,
    _dijkstra,
)

from conftest import map_from_ascii


def flood_fill_connected(cells) -> bool:
    """Independent connectivity oracle over non-obstacle cells."""
    h, w = cells.shape
    boundary = [
        (x, y)
        for y in range(h)
        for x in range(w)
        if cells[y, x] == SIDEWALK and (x in (0, w - 1) or y in (0, h - 1))
    ]
    if not boundary:
        return False
    seen = {boundary[0]}
    queue = deque([boundary[0]])
    while queue:
        x, y = queue.popleft()
        for dx, dy in NEIGHBOR_OFFSETS:
            n = (x + dx, y + dy)
            if (
                0 <= n[0] < w and 0 <= n[1] < h and n not in seen
                and cells[n[1], n[0]] != OBSTACLE
            ):
                seen.add(n)
                queue.append(n)
    return all(b in seen for b in boundary)


class TestGenerateMap:
    def test_deterministic_in_seed(self):
        spec = GeneratorSpec(seed=42)
        assert generate_map(spec) == generate_map(spec)

    def test_different_seeds_differ(self):
        a = generate_map(GeneratorSpec(seed=1))
        b = generate_map(GeneratorSpec(seed=2))
        assert a != b

    def test_grass_and_sidewalk_only_without_roads_and_obstacles(self):
        spec = GeneratorSpec(seed=9, road_count=0, obstacle_density=0.0)
        m = generate_map(spec)
        present = set(np.unique(m.cells))
        assert present <= {SIDEWALK, GRASS}
        assert SIDEWALK in present

    def test_rejects_small_maps(self):
        with pytest.raises(ValueError, match="≥ 16"):
            generate_map(GeneratorSpec(width=8, height=8))

    def test_connectivity_over_many_seeds(self):
        for seed in range(1000):
            m = generate_map(GeneratorSpec(seed=seed))
            assert flood_fill_connected(m.cells), f"seed {seed} disconnected"

    def test_failure_after_100_attempts(self, monkeypatch):
        import occprior.synthgen as sg

        monkeypatch.setattr(sg, "_connected", lambda cells: False)
        with pytest.raises(ValueError, match="failed to produce connected map"):
            generate_map(GeneratorSpec(seed=0))


class TestDijkstraOracle:
    def test_straight_corridor_unique_path(self):
        # One-wide corridor, no noise: the straight walk is the only option.
        cost = np.full((1, 16), 0.1)
        path = _dijkstra(cost, (0, 0), (15, 0))
        assert path == [(x, 0) for x in range(16)]

    def test_corner_cut_when_grass_cheap_enough(self):
        # L-shaped sidewalk along top and right edges, grass elsewhere.
        cells = np.full((16, 16), GRASS)
        cells[0, :] = SIDEWALK
        cells[:, 15] = SIDEWALK
        sidewalk_cost, grass_cost = 0.1, 0.12
        cost = np.where(cells == SIDEWALK, sidewalk_cost, grass_cost)
        # Hand-computed totals for the two candidate routes (0,0) -> (15,15):
        # around the corner enters 30 sidewalk cells; the diagonal enters 14
        # grass cells and the sidewalk goal, and is the unique 15-step path.
        around = 30 * sidewalk_cost
        diagonal = 14 * grass_cost + sidewalk_cost
        assert diagonal < around
        path = _dijkstra(cost, (0, 0), (15, 15))
        assert path == [(i, i) for i in range(16)]

    def test_follows_sidewalk_when_grass_expensive(self):
        cells = np.full((16, 16), GRASS)
        cells[0, :] = SIDEWALK
        cells[:, 15] = SIDEWALK
        cost = np.where(cells == SIDEWALK, 0.1, 0.6)
        path = _dijkstra(cost, (0, 0), (15, 15))
        assert all(cells[y, x] == SIDEWALK for x, y in path)

    def test_unreachable_returns_none(self):
        cost = np.full((3, 16), 0.1)
        cost[:, 8] = np.inf
        assert _dijkstra(cost, (0, 1), (15, 1)) is None


class TestOracleTrajectories:
    def test_deterministic(self):
        spec = GeneratorSpec(seed=21)
        m = generate_map(spec)
        assert oracle_trajectories(m, spec) == oracle_trajectories(m, spec)

    def test_valid_and_avoid_obstacles(self):
        for seed in range(8):
            spec = GeneratorSpec(seed=seed)
            m = generate_map(spec)
            trajs = oracle_trajectories(m, spec)
            assert len(trajs) == spec.trajectories_per_map
            for traj in trajs:
                traj.validate_on(m)
                for x, y in traj:
                    assert m.class_at(x, y) != OBSTACLE

    def test_endpoints_on_boundary_sidewalk_with_separation(self):
        spec = GeneratorSpec(seed=4)
        m = generate_map(spec)
        for traj in oracle_trajectories(m, spec):
            for x, y in (traj.states[0], traj.states[-1]):
                assert m.class_at(x, y) == SIDEWALK
                assert x in (0, m.width - 1) or y in (0, m.height - 1)
            (ax, ay), (bx, by) = traj.states[0], traj.states[-1]
            assert max(abs(ax - bx), abs(ay - by)) >= spec.width // 2

    def test_missing_walkable_cost_rejected(self):
        spec = GeneratorSpec(seed=4, oracle_costs={"sidewalk": 0.1})
        m = generate_map(spec)
        with pytest.raises(ValueError, match="grass"):
            oracle_trajectories(m, spec)

    def test_no_endpoint_pair_error(self):
        spec = GeneratorSpec(seed=4)
        m = map_from_ascii(
            "\n".join("s" + "g" * 15 if y == 0 else "g" * 16 for y in range(16))
        )
        with pytest.raises(ValueError, match="no valid endpoint pair"):
            oracle_trajectories(m, spec)


class TestBuildDataset:
    def test_writes_triples_and_manifest(self, tmp_path):
        manifest = build_dataset(5, GeneratorSpec(seed=13), tmp_path / "ds")
        triples = load_manifest(manifest)
        assert len(triples) == 5
        for map_path, traj_path, occ_path in triples:
            assert map_path.exists() and traj_path.exists() and occ_path.exists()
            occ = load_occupancy(occ_path)
            assert abs(occ.values.sum() - 1.0) < 1e-6

    def test_rerun_is_byte_identical(self, tmp_path):
        spec = GeneratorSpec(seed=13)
        m1 = build_dataset(3, spec, tmp_path / "a")
        m2 = build_dataset(3, spec, tmp_path / "b")
        for (a, *_), (b, *_) in zip(load_manifest(m1), load_manifest(m2)):
            assert a.read_bytes() == b.read_bytes()
        for (_, a, _), (_, b, _) in zip(load_manifest(m1), load_manifest(m2)):
            assert a.read_bytes() == b.read_bytes()
        for (*_, a), (*_, b) in zip(load_manifest(m1), load_manifest(m2)):
            assert a.read_bytes() == b.read_bytes()

    def test_sidewalk_mass_exceeds_road_mass(self, tmp_path):
        manifest = build_dataset(6, GeneratorSpec(seed=77), tmp_path / "ds")
        sidewalk = road = 0.0
        for sample in load_dataset(manifest):
            mass = np.bincount(
                sample.grid_map.cells.ravel(),
                weights=sample.occupancy.values.ravel(),
                minlength=4,
            )
            sidewalk += mass[SIDEWALK]
            road += mass[ROAD]
        assert sidewalk > road

    def test_rejects_zero_maps(self, tmp_path):
        with pytest.raises(ValueError, match="≥ 1"):
            build_dataset(0, GeneratorSpec(seed=1), tmp_path / "ds")
