import math

import numpy as np
import pytest

from smoothbandit.geometry import (
    GridLattice,
    RegionMask,
    assign_cube,
    ball_region_fraction,
    batch_weak_regularity,
    build_lattice,
    is_weakly_regular,
    support_cube_mask,
    unit_ball_volume,
    unit_cube_support,
)


class TestBuildLattice:
    def test_moderate_horizon(self):
        # independent arithmetic: T^(-1/3) / log T at T = e^5
        T = 148.413
        expected = T ** (-1.0 / 3.0) / math.log(T)
        lat = build_lattice(T, beta=1, d=1)
        assert lat.delta == pytest.approx(expected, rel=1e-12)
        assert lat.delta == pytest.approx(0.0378, abs=5e-4)
        assert lat.cells_per_axis == 27

    def test_minimal_horizon(self):
        lat = build_lattice(3, beta=1, d=1)
        assert lat.delta == pytest.approx(3 ** (-1 / 3) / math.log(3), rel=1e-12)
        assert lat.delta == pytest.approx(0.6311, abs=1e-4)
        assert lat.cells_per_axis == 2

    def test_cubes_cover_unit_cube(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            T = rng.integers(3, 10**6)
            beta = rng.uniform(1, 4)
            d = int(rng.integers(1, 4))
            lat = build_lattice(int(T), beta, d)
            assert lat.cells_per_axis * lat.delta >= 1.0

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            build_lattice(2, 1, 1)
        with pytest.raises(ValueError):
            build_lattice(100, 0.5, 1)
        with pytest.raises(ValueError):
            build_lattice(100, 1, 0)


class TestAssignCube:
    def test_origin(self):
        lat = build_lattice(1000, 2, 2)
        cube, center = assign_cube(np.zeros(2), lat)
        assert cube == (0, 0)
        assert np.allclose(center, lat.delta / 2)

    def test_tie_goes_to_cube_closer_to_origin(self):
        lat = GridLattice(d=1, delta=0.5, cells_per_axis=2)
        cube, center = assign_cube(np.array([0.5]), lat)
        assert cube == (0,)
        assert center[0] == pytest.approx(0.25)

    def test_nearest_point_rule(self):
        lat = GridLattice(d=1, delta=0.5, cells_per_axis=2)
        cube, center = assign_cube(np.array([0.3]), lat)
        assert cube == (0,)
        assert center[0] == pytest.approx(0.25)

    def test_rejects_out_of_domain(self):
        lat = build_lattice(100, 1, 2)
        with pytest.raises(ValueError):
            assign_cube(np.array([1.2, 0.0]), lat)
        with pytest.raises(ValueError):
            assign_cube(np.array([-0.1, 0.0]), lat)

    def test_partition_covers_million_points(self):
        # every point maps to exactly one cube whose center is within delta/2
        rng = np.random.default_rng(1)
        for T, beta, d in ((10_000, 1.0, 1), (2_000, 2.0, 2)):
            lat = build_lattice(T, beta, d)
            pts = rng.random((500_000, d))
            flat = lat.cube_index(pts)
            assert np.all(flat >= 0)
            centers = lat.centers(flat)
            assert np.all(np.abs(pts - centers) <= lat.delta / 2 + 1e-12)

    def test_scalar_matches_vectorized(self):
        lat = build_lattice(500, 1.5, 2)
        rng = np.random.default_rng(2)
        pts = rng.random((200, 2))
        flat = lat.cube_index(pts)
        for p, f in zip(pts, flat):
            cube, _ = assign_cube(p, lat)
            assert lat.flat_id(cube) == f

    def test_boundary_one(self):
        lat = GridLattice(d=1, delta=0.5, cells_per_axis=2)
        cube, _ = assign_cube(np.array([1.0]), lat)
        assert cube == (1,)


class TestUnitBallVolume:
    def test_known_dimensions(self):
        assert unit_ball_volume(1) == pytest.approx(2.0)
        assert unit_ball_volume(2) == pytest.approx(math.pi)
        assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def _halfspace(points):
    return points[:, 0] <= 0.5


class TestBallRegionFraction:
    def test_full_region(self):
        frac = ball_region_fraction(np.array([0.5, 0.5]), 0.1, unit_cube_support, resolution=32)
        assert frac == pytest.approx(1.0, abs=1e-3)

    def test_halfspace_through_center(self):
        # analytic oracle: the cut passes through the center, so exactly half
        frac = ball_region_fraction(np.array([0.5, 0.5]), 0.1, _halfspace, resolution=32)
        assert frac == pytest.approx(0.5, abs=0.01)

    def test_offset_halfspace_matches_circular_segment(self):
        # oracle: disk area with x <= c + 0.3 r is
        # 1 - (acos(a) - a sqrt(1-a^2)) / pi at a = 0.3
        a = 0.3
        expected = 1.0 - (math.acos(a) - a * math.sqrt(1 - a * a)) / math.pi

        def region(points):
            return points[:, 0] <= 0.5 + a * 0.1

        frac = ball_region_fraction(np.array([0.5, 0.5]), 0.1, region, resolution=32)
        assert frac == pytest.approx(expected, abs=0.01)

    def test_empty_region(self):
        def nothing(points):
            return np.zeros(len(points), dtype=bool)

        assert ball_region_fraction(np.array([0.5]), 0.1, nothing) == 0.0

    def test_corner_fraction(self):
        for d in (1, 2, 3):
            frac = ball_region_fraction(np.zeros(d), 0.1, unit_cube_support, resolution=32)
            assert frac == pytest.approx(2.0**-d, rel=0.01)

    def test_rejects_low_resolution(self):
        with pytest.raises(ValueError):
            ball_region_fraction(np.array([0.5]), 0.1, unit_cube_support, resolution=1)

    def test_convergence_in_resolution(self):
        a = 0.3
        expected = 1.0 - (math.acos(a) - a * math.sqrt(1 - a * a)) / math.pi

        def region(points):
            return points[:, 0] <= 0.5 + a * 0.1

        errs = []
        for res in (8, 16, 32, 64):
            frac = ball_region_fraction(np.array([0.5, 0.5]), 0.1, region, resolution=res)
            errs.append(abs(frac - expected))
        assert errs[2] <= 0.01
        for lo, hi in zip(errs[1:], errs[:-1]):
            assert lo <= hi + 0.005  # nonincreasing within quadrature noise

    def test_symmetric_halfspace_error_nonincreasing(self):
        errs = []
        for res in (8, 16, 32, 64):
            frac = ball_region_fraction(np.array([0.5, 0.5]), 0.1, _halfspace, resolution=res)
            errs.append(abs(frac - 0.5))
        assert errs[2] <= 0.01
        assert all(lo <= hi + 1e-12 for lo, hi in zip(errs[1:], errs[:-1]))

    def test_scale_consistency(self):
        # fraction is invariant under joint rescaling of center, radius, region
        lat = GridLattice(d=2, delta=0.1, cells_per_axis=10)
        mask = np.zeros(lat.n_cubes, dtype=bool)
        mask[lat.cube_index(np.array([[0.35, 0.45], [0.45, 0.45], [0.35, 0.55]]))] = True
        region = RegionMask(lat, mask)
        center = np.array([0.4, 0.5])
        base = ball_region_fraction(center, 0.12, region, resolution=32)
        for scale in (0.5, 2.0):
            def scaled(points, s=scale):
                return region.contains(points / s)

            frac = ball_region_fraction(center * scale, 0.12 * scale, scaled, resolution=32)
            assert frac == pytest.approx(base, abs=1e-9)


class TestWeakRegularity:
    def test_full_support_interior(self):
        assert is_weakly_regular(np.array([0.5, 0.5]), 0.1, 1.0, unit_cube_support)

    def test_empty_region(self):
        def nothing(points):
            return np.zeros(len(points), dtype=bool)

        assert not is_weakly_regular(np.array([0.5]), 0.1, 0.05, nothing)

    def test_halfspace_boundary_at_small_constant(self):
        # half of the ball volume is well above 1/12
        assert is_weakly_regular(np.array([0.5, 0.5]), 0.1, 1.0 / 12.0, _halfspace)

    def test_batch_matches_scalar(self):
        lat = build_lattice(2000, 1, 2)
        rng = np.random.default_rng(3)
        mask = rng.random(lat.n_cubes) < 0.4
        region = RegionMask(lat, mask)
        centers = rng.random((40, 2))
        batch = batch_weak_regularity(centers, 0.15, 0.2, region, resolution=16)
        for x, got in zip(centers, batch):
            assert got == is_weakly_regular(x, 0.15, 0.2, region, resolution=16)


class TestSupportCubeMask:
    def test_full_support_keeps_all(self):
        lat = build_lattice(5000, 1, 2)
        assert support_cube_mask(lat, None).all()

    def test_hole_is_dropped(self):
        lat = GridLattice(d=1, delta=0.1, cells_per_axis=10)

        def holey(points):
            x = np.atleast_2d(points)[:, 0]
            return (x >= 0) & (x <= 1) & ~((x > 0.31) & (x < 0.39))

        mask = support_cube_mask(lat, holey, resolution=16)
        assert mask.sum() == 10  # cube 3 keeps mass near its edges
        def hole_all(points):
            x = np.atleast_2d(points)[:, 0]
            return (x >= 0) & (x <= 1) & ~((x > 0.299) & (x < 0.401))

        mask = support_cube_mask(lat, hole_all, resolution=16)
        assert not mask[3] and mask.sum() == 9

    def test_region_mask_contains(self):
        lat = GridLattice(d=1, delta=0.25, cells_per_axis=4)
        mask = np.array([True, False, True, False])
        region = RegionMask(lat, mask)
        pts = np.array([[0.1], [0.3], [0.6], [0.9], [1.5]])
        np.testing.assert_array_equal(region.contains(pts), [True, False, True, False, False])

    def test_region_mask_clips_last_cube_overhang(self):
        # the last cube may extend past 1; the default support is still the
        # unit cube, so the overhang is outside every region
        lat = GridLattice(d=1, delta=0.35, cells_per_axis=3)
        region = RegionMask(lat, np.array([True, True, True]))
        pts = np.array([[0.99], [1.0], [1.04]])
        np.testing.assert_array_equal(region.contains(pts), [True, True, False])
