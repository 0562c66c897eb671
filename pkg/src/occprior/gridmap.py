"""Semantic grid maps, trajectories and occupancy distributions.

Core data model shared by the whole toolkit, plus the plain-text file
formats (.smap / .occ / .traj). Coordinates are (x, y) cell indices with
x growing rightwards and y downwards; grids are stored row-major with
row 0 at the top. All types are immutable after construction and safe to
share read-only across parallel workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

# 8-connected neighborhood, fixed scan order (top-left to bottom-right).
NEIGHBOR_OFFSETS = (
    (-1, -1), (0, -1), (1, -1),
    (-1, 0), (1, 0),
    (-1, 1), (0, 1), (1, 1),
)

OCC_SUM_TOL = 1e-6   # occupancy mass invariant
OCC_LOAD_TOL = 1e-4  # looser gate on load, absorbs decimal truncation


class FormatError(ValueError):
    """A map, occupancy or trajectory file violates its format."""


@dataclass(frozen=True)
class ClassTable:
    """Semantic class vocabulary with per-class walkability flags."""

    names: tuple[str, ...]
    walkable: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "walkable", tuple(bool(w) for w in self.walkable))
        if not self.names:
            raise ValueError("class table needs at least one class")
        if len(self.names) != len(self.walkable):
            raise ValueError("names and walkable flags differ in length")
        for name in self.names:
            if not name or any(ch.isspace() for ch in name):
                raise ValueError(f"invalid class name {name!r}")
        if len(set(self.names)) != len(self.names):
            raise ValueError("class names must be unique")
        if not any(self.walkable):
            raise ValueError("at least one class must be walkable")

    def __len__(self):
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown class {name!r}") from None


@dataclass(frozen=True, eq=False)
class SemanticMap:
    """Grid of semantic class ids over a :class:`ClassTable`.

    Feature responses are one-hot by construction: the feature vector of a
    state is the indicator of its class id.
    """

    width: int
    height: int
    classes: ClassTable
    cells: np.ndarray  # (height, width) int array of class ids

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("map dimensions must be positive")
        cells = np.asarray(self.cells, dtype=np.int32)
        if cells.shape != (self.height, self.width):
            raise ValueError(
                f"cells shape {cells.shape} does not match "
                f"{self.height}x{self.width}"
            )
        if cells.min() < 0 or cells.max() >= len(self.classes):
            raise ValueError("cell class id out of range")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    def __eq__(self, other):
        if not isinstance(other, SemanticMap):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.classes == other.classes
            and np.array_equal(self.cells, other.cells)
        )

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def class_at(self, x: int, y: int) -> int:
        return int(self.cells[y, x])

    def features(self, x: int, y: int) -> np.ndarray:
        """One-hot feature response of state (x, y)."""
        f = np.zeros(len(self.classes))
        f[self.cells[y, x]] = 1.0
        return f


@dataclass(frozen=True)
class Trajectory:
    """Ordered sequence of 8-connected grid states."""

    states: tuple[tuple[int, int], ...]

    def __post_init__(self):
        states = tuple((int(x), int(y)) for x, y in self.states)
        object.__setattr__(self, "states", states)
        if len(states) < 2:
            raise ValueError("trajectory needs at least 2 states")
        for i in range(1, len(states)):
            dx = abs(states[i][0] - states[i - 1][0])
            dy = abs(states[i][1] - states[i - 1][1])
            if max(dx, dy) != 1:
                raise ValueError(f"non-adjacent step at index {i}")

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def validate_on(self, grid_map: SemanticMap):
        for x, y in self.states:
            if not grid_map.in_bounds(x, y):
                raise ValueError(f"state ({x}, {y}) out of bounds")


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """Per-state probability field summing to 1."""

    width: int
    height: int
    values: np.ndarray  # (height, width) float array

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.height, self.width):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"{self.height}x{self.width}"
            )
        if values.min() < 0:
            raise ValueError("occupancy values must be non-negative")
        total = float(values.sum())
        if abs(total - 1.0) > OCC_SUM_TOL:
            raise ValueError(f"occupancy mass {total:.6g} ≠ 1")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __eq__(self, other):
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.values, other.values)
        )

    @classmethod
    def from_counts(cls, counts: np.ndarray) -> "OccupancyGrid":
        """Normalize a non-negative visitation-count grid to sum 1."""
        counts = np.asarray(counts, dtype=np.float64)
        total = counts.sum()
        if total <= 0:
            raise ValueError("cannot normalize all-zero counts")
        h, w = counts.shape
        return cls(width=w, height=h, values=counts / total)


def occupancy_from_trajectories(
    grid_map: SemanticMap, trajectories: Sequence[Trajectory]
) -> OccupancyGrid:
    """Occupancy distribution from state visitation counts.

    Every state occurrence counts, including repeat visits within one
    trajectory; the result is the visit histogram normalized to sum 1.
    """
    if not trajectories:
        raise ValueError("no trajectories")
    counts = np.zeros((grid_map.height, grid_map.width))
    for i, traj in enumerate(trajectories):
        for x, y in traj:
            if not grid_map.in_bounds(x, y):
                raise ValueError(f"trajectory {i}: state ({x}, {y}) out of bounds")
            counts[y, x] += 1.0
    return OccupancyGrid.from_counts(counts)


def walkable_mask(grid_map: SemanticMap) -> np.ndarray:
    """Boolean (height, width) grid, true where the cell class is walkable."""
    flags = np.array(grid_map.classes.walkable, dtype=bool)
    return flags[grid_map.cells]


# ---------------------------------------------------------------------------
# File I/O. All three formats are line-oriented ASCII; loaders report the
# offending 1-based line number in error messages.
# ---------------------------------------------------------------------------


def _load_lines(path) -> list[str]:
    return Path(path).read_text().splitlines()


def _split_ints(line: str, lineno: int) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise FormatError(f"line {lineno}: expected integers, got {line!r}") from None


def save_map(grid_map: SemanticMap, path):
    lines = [
        "SMAP 1",
        f"{grid_map.width} {grid_map.height} {len(grid_map.classes)}",
        " ".join(grid_map.classes.names),
        " ".join("1" if w else "0" for w in grid_map.classes.walkable),
    ]
    for row in grid_map.cells:
        lines.append(" ".join(str(int(c)) for c in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_map(path) -> SemanticMap:
    lines = _load_lines(path)
    if not lines or lines[0].strip() != "SMAP 1":
        raise FormatError("line 1: expected 'SMAP 1' header")
    if len(lines) < 4:
        raise FormatError("line 2: truncated map file")
    dims = _split_ints(lines[1], 2)
    if len(dims) != 3:
        raise FormatError("line 2: expected '<width> <height> <K>'")
    width, height, k = dims
    if width < 1 or height < 1 or k < 1:
        raise FormatError("line 2: dimensions and class count must be positive")
    names = lines[2].split()
    if len(names) != k:
        raise FormatError(f"line 3: expected {k} class names, got {len(names)}")
    flags = _split_ints(lines[3], 4)
    if len(flags) != k or any(f not in (0, 1) for f in flags):
        raise FormatError(f"line 4: expected {k} walkability flags (0/1)")
    if len(lines) < 4 + height:
        raise FormatError(f"line {len(lines) + 1}: expected {height} grid rows")
    rows = []
    for j in range(height):
        lineno = 5 + j
        row = _split_ints(lines[4 + j], lineno)
        if len(row) != width:
            raise FormatError(f"line {lineno}: expected {width} values, got {len(row)}")
        for v in row:
            if not 0 <= v < k:
                raise FormatError(f"line {lineno}: class id {v} out of range [0, {k - 1}]")
        rows.append(row)
    table = ClassTable(names=tuple(names), walkable=tuple(bool(f) for f in flags))
    return SemanticMap(width=width, height=height, classes=table, cells=np.array(rows))


def save_occupancy(occ: OccupancyGrid, path):
    lines = ["OCC 1", f"{occ.width} {occ.height}"]
    for row in occ.values:
        lines.append(" ".join(f"{v:.9g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_occupancy(path) -> OccupancyGrid:
    lines = _load_lines(path)
    if not lines or lines[0].strip() != "OCC 1":
        raise FormatError("line 1: expected 'OCC 1' header")
    if len(lines) < 2:
        raise FormatError("line 2: truncated occupancy file")
    dims = _split_ints(lines[1], 2)
    if len(dims) != 2 or dims[0] < 1 or dims[1] < 1:
        raise FormatError("line 2: expected '<width> <height>'")
    width, height = dims
    if len(lines) < 2 + height:
        raise FormatError(f"line {len(lines) + 1}: expected {height} grid rows")
    rows = np.zeros((height, width))
    for j in range(height):
        lineno = 3 + j
        toks = lines[2 + j].split()
        if len(toks) != width:
            raise FormatError(f"line {lineno}: expected {width} values, got {len(toks)}")
        try:
            rows[j] = [float(t) for t in toks]
        except ValueError:
            raise FormatError(f"line {lineno}: malformed float") from None
    if rows.min() < 0:
        raise FormatError("occupancy values must be non-negative")
    total = float(rows.sum())
    if abs(total - 1.0) > OCC_LOAD_TOL:
        raise FormatError(f"occupancy mass {total:.6g} ≠ 1")
    if abs(total - 1.0) > OCC_SUM_TOL:
        # Within the load gate but outside the type invariant: renormalize.
        rows /= total
    return OccupancyGrid(width=width, height=height, values=rows)


def save_trajectories(trajectories: Sequence[Trajectory], path):
    lines = ["TRAJ 1", str(len(trajectories))]
    for traj in trajectories:
        lines.append(str(len(traj)))
        for x, y in traj:
            lines.append(f"{x} {y}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_trajectories(path) -> list[Trajectory]:
    lines = _load_lines(path)
    if not lines or lines[0].strip() != "TRAJ 1":
        raise FormatError("line 1: expected 'TRAJ 1' header")
    if len(lines) < 2:
        raise FormatError("line 2: truncated trajectory file")
    counts = _split_ints(lines[1], 2)
    if len(counts) != 1 or counts[0] < 0:
        raise FormatError("line 2: expected trajectory count")
    out = []
    pos = 2
    for t in range(counts[0]):
        if pos >= len(lines):
            raise FormatError(f"line {pos + 1}: expected length of trajectory {t}")
        length = _split_ints(lines[pos], pos + 1)
        if len(length) != 1 or length[0] < 2:
            raise FormatError(f"line {pos + 1}: trajectory length must be ≥ 2")
        n = length[0]
        pos += 1
        if pos + n > len(lines):
            raise FormatError(f"line {len(lines) + 1}: expected {n} states")
        states = []
        for i in range(n):
            coords = _split_ints(lines[pos + i], pos + i + 1)
            if len(coords) != 2 or coords[0] < 0 or coords[1] < 0:
                raise FormatError(f"line {pos + i + 1}: expected '<x> <y>'")
            states.append((coords[0], coords[1]))
        pos += n
        try:
            out.append(Trajectory(states=tuple(states)))
        except ValueError as e:
            raise FormatError(f"trajectory {t}: {e}") from None
    return out
