"""Cube lattices, point-to-cube assignment, and the weak-regularity test.

The policy's geometry layer partitions [0,1]^d into cubes whose side
shrinks with the horizon, and measures how much of a ball around a point
lies inside a region.  This script walks through both primitives.
"""

import numpy as np

from smoothbandit import (
    GridLattice,
    RegionMask,
    assign_cube,
    ball_region_fraction,
    build_lattice,
    is_weakly_regular,
    unit_ball_volume,
)
from smoothbandit.geometry import unit_cube_support

# --- lattice construction ---------------------------------------------------
# The cube side is T^(-beta/(2 beta + d)) / log T: finer grids for longer
# horizons and smoother rewards.
for T, beta, d in ((1000, 1.0, 1), (1000, 2.0, 1), (100_000, 2.0, 2)):
    lat = build_lattice(T, beta, d)
    print(f"T={T:>6d} beta={beta} d={d}:  delta={lat.delta:.5f}  "
          f"{lat.cells_per_axis} cells/axis, {lat.n_cubes} cubes")

# --- assignment and tie-breaking ---------------------------------------------
lat = GridLattice(d=1, delta=0.5, cells_per_axis=2)
for x in (0.3, 0.5, 1.0):
    cube, center = assign_cube(np.array([x]), lat)
    print(f"x={x}: cube {cube}, center {center[0]:.2f}")
# x=0.5 is equidistant from both centers and goes to the one nearer the origin

# --- ball volumes and region fractions ---------------------------------------
print("\nunit ball volumes:", [round(unit_ball_volume(d), 4) for d in (1, 2, 3)])

center = np.array([0.5, 0.5])
print("ball fully inside the cube:",
      ball_region_fraction(center, 0.1, unit_cube_support))
print("half-space cut through the center:",
      ball_region_fraction(center, 0.1, lambda p: p[:, 0] <= 0.5))
print("ball at a corner of the cube:",
      ball_region_fraction(np.zeros(2), 0.1, unit_cube_support))

# --- weak regularity: the screening primitive ---------------------------------
# A region is weakly (c, r)-regular at x when it fills at least a c
# fraction of the ball B(x, r).  The policy tests cube centers against the
# region an arm can still be sampled on; an isolated cube much smaller than
# the bandwidth fails the test and is screened out.
lat = GridLattice(d=2, delta=0.05, cells_per_axis=20)
mask = np.zeros(lat.n_cubes, dtype=bool)
mask[lat.cube_index(np.array([[0.5, 0.5]]))[0]] = True  # one isolated cube
lonely = RegionMask(lat, mask)
x = lat.centers(np.nonzero(mask)[0])[0]
print("\nisolated cube of side", lat.delta, "tested at radius 0.3:")
print("  ball fraction:", round(ball_region_fraction(x, 0.3, lonely), 5))
print("  weakly (1/12 / 2^d)-regular?", is_weakly_regular(x, 0.3, (1 / 12) / 4, lonely))
print("  the same cube at radius 0.05:",
      is_weakly_regular(x, 0.05, (1 / 12) / 4, lonely))
