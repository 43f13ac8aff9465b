"""Hypercube grid geometry over the unit cube.

The policy partitions [0,1]^d into axis-aligned cubes of a tuned side
length and reasons about regions that are unions of whole cubes.  This
module provides the lattice bookkeeping (deterministic point-to-cube
assignment), ball volumes, and midpoint-quadrature estimates of the
fraction of a ball covered by a region, which is the primitive behind the
weak-regularity screening test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

# Vectorized membership test: (n, d) points -> (n,) booleans.
Predicate = Callable[[np.ndarray], np.ndarray]


def unit_cube_support(points: np.ndarray) -> np.ndarray:
    """Default support predicate: the full unit cube."""
    points = np.atleast_2d(points)
    return np.all((points >= 0.0) & (points <= 1.0), axis=-1)


def unit_ball_volume(d: int) -> float:
    """Volume of the Euclidean unit ball in ``d`` dimensions."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


@dataclass(frozen=True)
class GridLattice:
    """Axis-aligned cube partition of [0,1]^d.

    Cube ``j = (j_1, ..., j_d)`` has center ``(j_i + 1/2) * delta`` per
    axis.  The last cube on each axis may extend past 1 so that the cubes
    always cover the unit cube (``cells_per_axis * delta >= 1``).
    """

    d: int
    delta: float
    cells_per_axis: int

    def __post_init__(self):
        if self.d < 1 or self.delta <= 0 or self.cells_per_axis < 1:
            raise ValueError("invalid lattice parameters")
        if self.cells_per_axis * self.delta < 1.0 - 1e-12:
            raise ValueError("cubes must cover the unit cube")

    @property
    def n_cubes(self) -> int:
        return self.cells_per_axis**self.d

    def axis_index(self, coords: np.ndarray) -> np.ndarray:
        """Per-axis cube index for raw coordinates (may fall out of range).

        A coordinate on the shared face of two cubes is equidistant from
        both centers; it is assigned to the lower-index cube, whose center
        is closer to the origin.
        """
        u = np.asarray(coords, dtype=float) / self.delta
        j = np.floor(u).astype(np.int64)
        j -= (u == j) & (j > 0)
        return j

    def cube_index(self, points: np.ndarray) -> np.ndarray:
        """Flat cube index for each point; -1 for points off the lattice."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        j = self.axis_index(points)
        valid = np.all((points >= 0.0) & (j >= 0) & (j < self.cells_per_axis), axis=1)
        flat = np.zeros(len(points), dtype=np.int64)
        mult = 1
        for axis in range(self.d - 1, -1, -1):
            flat += j[:, axis] * mult
            mult *= self.cells_per_axis
        flat[~valid] = -1
        return flat

    def cube_id(self, flat: int) -> tuple[int, ...]:
        """Multi-index of a flat cube index."""
        if not 0 <= flat < self.n_cubes:
            raise ValueError(f"flat index {flat} out of range")
        out = []
        for _ in range(self.d):
            out.append(flat % self.cells_per_axis)
            flat //= self.cells_per_axis
        return tuple(reversed(out))

    def flat_id(self, cube: tuple[int, ...]) -> int:
        flat = 0
        for j in cube:
            if not 0 <= j < self.cells_per_axis:
                raise ValueError(f"cube index {cube} out of range")
            flat = flat * self.cells_per_axis + j
        return flat

    def center(self, cube: tuple[int, ...] | int) -> np.ndarray:
        if isinstance(cube, (int, np.integer)):
            cube = self.cube_id(int(cube))
        return (np.asarray(cube, dtype=float) + 0.5) * self.delta

    def centers(self, flat: np.ndarray) -> np.ndarray:
        """Centers of the given flat cube indices, shape (n, d)."""
        flat = np.asarray(flat, dtype=np.int64)
        out = np.empty((len(flat), self.d))
        rem = flat.copy()
        for axis in range(self.d - 1, -1, -1):
            out[:, axis] = (rem % self.cells_per_axis + 0.5) * self.delta
            rem //= self.cells_per_axis
        return out

    def all_centers(self) -> np.ndarray:
        return self.centers(np.arange(self.n_cubes))


def build_lattice(horizon: int, beta: float, d: int) -> GridLattice:
    """Lattice whose cube side shrinks with the horizon and smoothness.

    The side length is ``T**(-beta / (2 beta + d)) / log(T)``; finer grids
    for longer horizons and smoother rewards.
    """
    if horizon < 3:
        raise ValueError(f"horizon must be >= 3, got {horizon}")
    if beta < 1:
        raise ValueError(f"smoothness must be >= 1, got {beta}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    delta = horizon ** (-beta / (2 * beta + d)) / math.log(horizon)
    return GridLattice(d=d, delta=delta, cells_per_axis=math.ceil(1.0 / delta))


def assign_cube(x: np.ndarray, lattice: GridLattice) -> tuple[tuple[int, ...], np.ndarray]:
    """Cube multi-index and center for a single point in [0,1]^d.

    Ties (points equidistant from several centers) go to the center
    closest to the origin; a residual tie would be broken toward the
    lexicographically smallest index, which per-axis assignment already
    guarantees.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != lattice.d:
        raise ValueError(f"point has dimension {x.shape[0]}, lattice has {lattice.d}")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError(f"point {x} outside the unit cube")
    j = lattice.axis_index(x)
    j = np.minimum(j, lattice.cells_per_axis - 1)
    cube = tuple(int(v) for v in j)
    return cube, lattice.center(cube)


@dataclass(frozen=True)
class RegionMask:
    """A union of lattice cubes intersected with a support set.

    ``cube_mask`` flags the member cubes by flat index; ``support`` further
    restricts membership (``None`` means the full unit cube).
    """

    lattice: GridLattice
    cube_mask: np.ndarray
    support: Predicate | None = None

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        flat = self.lattice.cube_index(points)
        inside = flat >= 0
        out = np.zeros(len(points), dtype=bool)
        out[inside] = self.cube_mask[flat[inside]]
        support = self.support if self.support is not None else unit_cube_support
        out &= np.asarray(support(points), dtype=bool)
        return out

    @property
    def n_member_cubes(self) -> int:
        return int(np.count_nonzero(self.cube_mask))


def empty_region(lattice: GridLattice) -> RegionMask:
    return RegionMask(lattice, np.zeros(lattice.n_cubes, dtype=bool))


def _midpoint_offsets(d: int, resolution: int) -> np.ndarray:
    """Midpoints of a resolution^d cell grid over [-1, 1]^d."""
    axis = (2.0 * np.arange(resolution) + 1.0) / resolution - 1.0
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def ball_region_fraction(
    center: np.ndarray,
    radius: float,
    region: RegionMask | Predicate,
    resolution: int = 32,
) -> float:
    """Fraction of the ball B(center, radius) covered by the region.

    Midpoint-rectangle quadrature on a regular grid over the bounding box
    of the ball: both the ball volume and the intersection volume are
    counted on the same grid, so the full-region fraction is exactly 1 and
    symmetric cuts through the center are exact.  Deterministic for a
    fixed resolution.
    """
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    center = np.asarray(center, dtype=float).reshape(-1)
    offsets = _midpoint_offsets(center.shape[0], resolution)
    in_ball = np.einsum("ij,ij->i", offsets, offsets) <= 1.0
    points = center[None, :] + radius * offsets[in_ball]
    member = region.contains(points) if isinstance(region, RegionMask) else np.asarray(region(points), dtype=bool)
    denom = int(in_ball.sum())
    if denom == 0:
        return 0.0
    return float(np.count_nonzero(member)) / denom


def is_weakly_regular(
    x: np.ndarray,
    radius: float,
    c: float,
    region: RegionMask | Predicate,
    resolution: int = 32,
) -> bool:
    """Whether the region fills at least a ``c`` fraction of B(x, radius)."""
    if not 0 < c <= 1:
        raise ValueError(f"regularity constant must be in (0, 1], got {c}")
    return ball_region_fraction(x, radius, region, resolution) >= c


def batch_weak_regularity(
    centers: np.ndarray,
    radius: float,
    c: float,
    region: RegionMask | Predicate,
    resolution: int = 32,
) -> np.ndarray:
    """Vectorized weak-regularity test at many centers with one shared radius.

    Same quadrature as :func:`ball_region_fraction`, evaluated for all
    centers in one membership call.
    """
    if not 0 < c <= 1:
        raise ValueError(f"regularity constant must be in (0, 1], got {c}")
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    centers = np.atleast_2d(centers)
    n, d = centers.shape
    if n == 0:
        return np.zeros(0, dtype=bool)
    offsets = _midpoint_offsets(d, resolution)
    offsets = offsets[np.einsum("ij,ij->i", offsets, offsets) <= 1.0]
    points = (centers[:, None, :] + radius * offsets[None, :, :]).reshape(-1, d)
    member = region.contains(points) if isinstance(region, RegionMask) else np.asarray(region(points), dtype=bool)
    fractions = member.reshape(n, len(offsets)).mean(axis=1)
    return fractions >= c


def support_cube_mask(
    lattice: GridLattice,
    support: Predicate | None,
    resolution: int = 8,
    mass_threshold: float = 1e-9,
) -> np.ndarray:
    """Flag cubes carrying context mass.

    A cube is kept when the quadrature fraction of its volume inside the
    support exceeds ``mass_threshold``.  With the default full-cube
    support every cube is kept (the overhang of the last cube past 1 still
    intersects the unit cube).
    """
    if support is None:
        support = unit_cube_support
    offsets = (_midpoint_offsets(lattice.d, resolution) + 1.0) / 2.0  # in [0,1]^d
    corners = lattice.all_centers() - lattice.delta / 2.0
    points = (corners[:, None, :] + lattice.delta * offsets[None, :, :]).reshape(-1, lattice.d)
    member = np.asarray(support(points), dtype=bool).reshape(lattice.n_cubes, -1)
    return member.mean(axis=1) > mass_threshold
