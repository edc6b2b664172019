"""Tests for the three-sheet partition toolkit.

Reference values marked "frozen" were produced by this implementation and
pinned after checking them against independent formulations noted inline
(mpmath for the mapping constant, finite-difference gradients of the
sheet-difference field for the critical points, the bisection threshold
against the closed form sqrt(3)/3).
"""

import math

import numpy as np
import pytest

import mpmath

from ellipflow.errors import (BranchPathCrossesSingularity, DegenerateTriangle,
                              PoleHit, SingularPoint, ValidationError)
from ellipflow.lattice import reduce_to_cell, zeta_w
from ellipflow.nuttall import (DEFAULT_BOUNDS, RHO, SC_CONSTANT, Z1,
                               NuttallContext, classify_sheets,
                               critical_points, hexagonal_invariants,
                               make_context, normalize_triangle, psi,
                               psi_root, schwarz_christoffel_inverse,
                               sheet_component_counts, u_value,
                               uniformizer_pi)

SQRT3 = math.sqrt(3.0)
RHO_BAR = np.conj(RHO)

# Frozen critical points (checked against vanishing finite-difference
# gradients of u below).
CRIT_05_IM = 0.1587784530944163
CRIT_06 = (0.4711764234442961, 0.6608743841247181)

# Frozen samples of the disk-to-plane inverse map.
SC_SAMPLES = {
    0.3 + 0.0j: 0.4788611488921601 + 0.0j,
    0.2j: 0.5772631222546228 - 0.06536110867101562j,
}


def u_triple(z, ctx):
    """u at z and at its two rotations."""
    return (u_value(z, ctx), u_value(RHO * z, ctx), u_value(RHO_BAR * z, ctx))


def rank_label(triple):
    """Sheet index of the first entry: how many competitors exceed it."""
    u0, u1, u2 = triple
    return int(u1 > u0) + int(u2 > u0)


def fd_gradient(f, z, h=1e-6):
    """Central-difference gradient of a real field on the plane."""
    gx = (f(z + h) - f(z - h)) / (2 * h)
    gy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
    return complex(gx, gy)


class TestTriangleNormalization:
    def test_cube_roots_map_to_inversion(self):
        tri = normalize_triangle(1.0 + 0j, RHO, RHO_BAR)
        assert abs(tri.z0) < 1e-13
        assert abs(tri.map(tri.a1) - 1.0) < 1e-12
        assert abs(tri.map(tri.a2) - RHO) < 1e-12
        assert abs(tri.map(tri.a3) - RHO_BAR) < 1e-12

    def test_scaled_equilateral_centers_at_origin(self):
        center, scale = 2.0 - 1.5j, 0.7 * np.exp(0.4j)
        pts = [center + scale * r for r in (1.0 + 0j, RHO, RHO_BAR)]
        tri = normalize_triangle(*pts)
        assert abs(tri.z0) < 1e-10

    def test_frozen_example(self):
        tri = normalize_triangle(1.0 + 2.0j, -0.5 + 0.25j, 2.0 - 1.0j)
        assert tri.z0 == pytest.approx(
            -0.006979242155687533 + 0.1813260301796654j, abs=1e-12)
        assert {tri.a1, tri.a2, tri.a3} == {1 + 2j, -0.5 + 0.25j, 2 - 1j}
        # the point at infinity lands at z0
        assert abs(tri.map(1e9 + 1e9j) - tri.z0) < 1e-8

    def test_random_triangles(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            pts = rng.normal(size=3) + 1j * rng.normal(size=3)
            area = np.imag(np.conj(pts[1] - pts[0]) * (pts[2] - pts[0]))
            if abs(area) < 1e-3:
                continue
            tri = normalize_triangle(*pts)
            assert {tri.a1, tri.a2, tri.a3} == set(pts)
            for src, dst in ((tri.a1, 1.0), (tri.a2, RHO), (tri.a3, RHO_BAR)):
                assert abs(tri.map(src) - dst) < 1e-12
            assert abs(tri.z0) < 1.0
            closed = RHO * ((tri.gamma - np.exp(-1j * np.pi / 3))
                            / (tri.gamma - np.exp(1j * np.pi / 3)))
            assert abs(tri.z0 - closed) < 1e-10

    def test_orientation_of_relabelled_triple(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            pts = rng.normal(size=3) + 1j * rng.normal(size=3)
            area = np.imag(np.conj(pts[1] - pts[0]) * (pts[2] - pts[0]))
            if abs(area) < 1e-3:
                continue
            tri = normalize_triangle(*pts)
            # traversal a1 -> a3 -> a2 is counterclockwise
            cross = np.imag(np.conj(tri.a3 - tri.a1) * (tri.a2 - tri.a1))
            assert cross > 0

    def test_coincident_points_rejected(self):
        with pytest.raises(DegenerateTriangle):
            normalize_triangle(1.0, 1.0, 2.0 + 1j)

    def test_collinear_points_rejected(self):
        with pytest.raises(DegenerateTriangle):
            normalize_triangle(0.0, 1.0 + 1.0j, 2.0 + 2.0j)


class TestContext:
    def test_hexagonal_invariants(self):
        inv = hexagonal_invariants()
        assert abs(inv.g2) < 1e-12
        assert abs(inv.eta1 - 2 * np.pi / 3) < 1e-12

    def test_alpha_range(self):
        make_context(Z1)  # threshold value is inside the open interval
        for bad in (0.0, -0.2, SQRT3 / 2, 1.2):
            with pytest.raises(ValidationError):
                make_context(bad)

    def test_complex_alpha_allowed(self):
        ctx = make_context(0.3 + 0.2j)
        assert np.isfinite(u_value(0.1 + 0.9j, ctx))

    def test_complex_alpha_on_sink_orbit_rejected(self):
        lat = hexagonal_invariants().lattice
        with pytest.raises(ValidationError):
            NuttallContext(alpha=complex(lat.omega1 / (1.0 - RHO)))


class TestUniformizer:
    def test_value_at_origin(self):
        assert abs(complex(uniformizer_pi(0.0)) - 1.0) < 1e-10

    def test_zeros_at_z1_orbit(self):
        for rot in (1.0, RHO, RHO_BAR):
            assert abs(complex(uniformizer_pi(rot * Z1))) < 1e-14

    def test_rotation_invariance(self):
        rng = np.random.default_rng(3)
        zs = rng.normal(size=20) + 1j * rng.normal(size=20)
        a = uniformizer_pi(zs)
        b = uniformizer_pi(RHO * zs)
        assert np.all(np.abs(a - b) <= 1e-11 * (1.0 + np.abs(a)))

    def test_double_periodicity(self):
        lat = hexagonal_invariants().lattice
        rng = np.random.default_rng(5)
        zs = 0.8 * (rng.normal(size=20) + 1j * rng.normal(size=20))
        base = uniformizer_pi(zs)
        for omega in (lat.omega1, lat.omega2):
            shifted = uniformizer_pi(zs + omega)
            assert np.all(np.abs(shifted - base) <= 1e-9 * (1.0 + np.abs(base)))

    def test_cubic_order_at_origin(self):
        # pi - 1 vanishes to third order at z = 0
        v1 = abs(complex(uniformizer_pi(1e-2 * np.exp(0.3j))) - 1.0)
        v2 = abs(complex(uniformizer_pi(5e-3 * np.exp(0.3j))) - 1.0)
        assert v1 / v2 == pytest.approx(8.0, rel=1e-2)

    def test_pole_raises(self):
        lat = hexagonal_invariants().lattice
        with pytest.raises(PoleHit):
            uniformizer_pi(-Z1)
        with pytest.raises(PoleHit):
            uniformizer_pi(-Z1 + lat.omega1)

    def test_vectorized_matches_scalar(self):
        zs = np.array([0.2 + 0.1j, -0.4 + 0.9j, 1.1 - 0.3j])
        vals = uniformizer_pi(zs)
        for z, v in zip(zs, vals):
            assert abs(complex(uniformizer_pi(z)) - v) < 1e-12


class TestSchwarzChristoffel:
    def test_constant_against_gamma_function(self):
        # C1 = -2 pi / Gamma(1/3)^3, evaluated independently with mpmath
        ref = float(-2 * mpmath.pi / mpmath.gamma(mpmath.mpf(1) / 3) ** 3)
        assert SC_CONSTANT == pytest.approx(ref, abs=1e-15)
        assert SC_CONSTANT == pytest.approx(-0.326807, abs=1e-6)

    def test_disk_center_maps_to_z1(self):
        assert schwarz_christoffel_inverse(0.0) == Z1

    def test_frozen_samples(self):
        for w, expected in SC_SAMPLES.items():
            assert schwarz_christoffel_inverse(w) == pytest.approx(
                expected, abs=1e-12)

    def test_linear_behavior_near_center(self):
        w = 1e-6
        z = schwarz_christoffel_inverse(w)
        assert abs(z - (Z1 + SC_CONSTANT * w)) < 1e-14

    def test_conjugation_symmetry(self):
        for w in (0.3 + 0.4j, -0.2 + 0.55j, 0.7 - 0.1j):
            a = schwarz_christoffel_inverse(w)
            b = schwarz_christoffel_inverse(np.conj(w))
            assert abs(np.conj(a) - b) < 1e-12

    def test_round_trip_through_uniformizer(self):
        ws = [r * np.exp(1j * np.pi * k / 7)
              for r in (0.2, 0.55, 0.85) for k in (-5, -2, 1, 4)]
        for w in ws[:10]:
            z = schwarz_christoffel_inverse(w)
            assert abs(complex(uniformizer_pi(z)) - w) < 1e-10

    def test_path_through_corner_rejected(self):
        for w in (1.0 + 0j, 1.5 + 0j, RHO, 2.0 * RHO_BAR):
            with pytest.raises(BranchPathCrossesSingularity):
                schwarz_christoffel_inverse(w)


class TestUValue:
    @pytest.mark.parametrize("alpha", [0.3, 0.5, Z1, 0.6])
    def test_double_periodicity(self, alpha):
        ctx = make_context(alpha)
        lat = ctx.inv.lattice
        rng = np.random.default_rng(17)
        zs = rng.uniform(-1, 1, size=50) + 1j * rng.uniform(-1, 1, size=50)
        base = u_value(zs, ctx)
        for omega in (lat.omega1, lat.omega2):
            shifted = u_value(zs + omega, ctx)
            assert np.all(np.abs(shifted - base) < 1e-9 * (1 + np.abs(base)))

    def test_conjugation_symmetry(self):
        ctx = make_context(0.45)
        rng = np.random.default_rng(19)
        zs = rng.normal(size=30) + 1j * rng.normal(size=30)
        assert np.all(np.abs(u_value(np.conj(zs), ctx) - u_value(zs, ctx))
                      < 1e-10)

    def test_rotated_values_tie_on_real_axis(self):
        # u(rho x) = u(conj(rho) x) for real x: the axis lies on the (1,2)
        # boundary curve
        ctx = make_context(0.5)
        xs = np.linspace(-1.4, 1.4, 20)
        diff = u_value(RHO * xs, ctx) - u_value(RHO_BAR * xs, ctx)
        assert np.all(np.abs(diff) < 1e-10)

    def test_singular_at_sink_orbit(self):
        ctx = make_context(0.5)
        with pytest.raises(SingularPoint):
            u_value(0.5, ctx)
        with pytest.raises(SingularPoint):
            u_value(RHO * 0.5, ctx)


class TestCriticalPoints:
    def test_conjugate_pair_below_threshold(self):
        r1, r2 = critical_points(0.5)
        xstar = SQRT3 / 2 - 0.25
        assert abs(r2 - np.conj(r1)) < 1e-9
        assert abs(r1.real - xstar) < 1e-9
        assert abs(abs(r1.imag) - CRIT_05_IM) < 1e-7
        assert min(abs(r1.imag), abs(r2.imag)) > 0.1  # nowhere near real

    def test_real_pair_above_threshold(self):
        r1, r2 = critical_points(0.6)
        assert abs(r1.imag) < 1e-10 and abs(r2.imag) < 1e-10
        assert r1.real == pytest.approx(CRIT_06[0], abs=1e-9)
        assert r2.real == pytest.approx(CRIT_06[1], abs=1e-9)
        xstar = SQRT3 / 2 - 0.3
        assert (r1 + r2).real == pytest.approx(2 * xstar, abs=1e-9)

    def test_double_point_at_threshold(self):
        r1, r2 = critical_points(Z1)
        assert abs(r1 - r2) < 1e-4
        assert abs(r1 - Z1) < 1e-3

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.6])
    def test_gradient_of_pair_difference_vanishes(self, alpha):
        # independent check: the returned points are genuine critical points
        # of the difference field u(rho z) - u(conj(rho) z), the defining
        # function of the (1, 2) boundary curve
        ctx = make_context(alpha)
        f = lambda z: u_value(RHO * z, ctx) - u_value(RHO_BAR * z, ctx)
        scale = abs(fd_gradient(f, 0.25 + 0.15j))
        for r in critical_points(alpha):
            assert abs(fd_gradient(f, complex(r))) < 1e-6 * max(scale, 1.0)

    @pytest.mark.parametrize("alpha", [0.3, 0.45, 0.57, 0.6, 0.7])
    def test_always_two_points(self, alpha):
        assert len(critical_points(alpha)) == 2

    def test_rejects_non_symmetric_alpha(self):
        with pytest.raises(ValidationError):
            critical_points(0.3 + 0.1j)
        ctx = make_context(0.2 + 0.1j)
        with pytest.raises(ValidationError):
            critical_points(0.2 + 0.1j, ctx)


class TestPsi:
    def test_boundary_values_and_signs(self):
        assert abs(psi(0.0)) < 1e-12
        assert psi(0.3) == pytest.approx(0.1337889641211527, abs=1e-12)
        assert psi(0.3) > 0
        assert psi(0.6) < 0

    def test_matches_critical_equation_at_symmetric_point(self):
        # F(x*) = -2i psi(alpha) with x* = sqrt(3)/2 - alpha/2: psi is the
        # obstruction to a real critical point
        inv = hexagonal_invariants()
        for alpha in (0.2, 0.35, 0.5, 0.65):
            xstar = SQRT3 / 2 - alpha / 2
            F = (zeta_w(xstar - RHO_BAR * alpha, inv)
                 - zeta_w(xstar - RHO * alpha, inv)
                 + 1j * inv.eta1 * alpha)
            assert abs(complex(F) + 2j * psi(alpha)) < 1e-12

    def test_root_is_sqrt3_over_3(self):
        assert abs(psi_root() - SQRT3 / 3) < 1e-10

    def test_sign_change_only_at_root(self):
        root = psi_root()
        for alpha in (0.05, 0.2, 0.4, 0.55):
            assert psi(alpha) > 0
            assert alpha < root
        for alpha in (0.62, 0.75, 0.85):
            assert psi(alpha) < 0
            assert alpha > root

    def test_single_interior_maximum(self):
        xs = np.linspace(0.02, 0.84, 200)
        vals = np.array([psi(x) for x in xs])
        slopes = np.sign(np.diff(vals))
        flips = np.sum(np.abs(np.diff(slopes)) > 0)
        assert flips == 1

    def test_validates_domain(self):
        with pytest.raises(ValidationError):
            psi(-0.1)
        with pytest.raises(ValidationError):
            psi(1.0)
        with pytest.raises(ValidationError):
            psi(0.3 + 0.1j)


@pytest.fixture(scope="module")
def field05():
    return classify_sheets(make_context(0.5), resolution=400)


class TestSheetClassification:
    def test_all_labels_present_and_balanced(self, field05):
        counts = np.bincount(field05.labels.ravel(), minlength=3)
        fractions = counts / counts.sum()
        assert np.all(fractions > 0.2) and np.all(fractions < 0.45)

    def test_contour_keys_and_bounds(self, field05):
        assert set(field05.contours) == {(0, 1), (0, 2), (1, 2)}
        (xmin, xmax, ymin, ymax) = field05.bounds
        pad = 1e-9
        for polylines in field05.contours.values():
            for line in polylines:
                assert np.all(line.real >= xmin - pad)
                assert np.all(line.real <= xmax + pad)
                assert np.all(line.imag >= ymin - pad)
                assert np.all(line.imag <= ymax + pad)

    def test_horizontal_lines_lie_on_gamma12(self, field05):
        # at alpha = 0.5 the boundary between rotations 1 and 2 contains the
        # lines Im z = 0 and Im z = 3/2
        pts = np.concatenate(field05.contours[(1, 2)])
        cell = 2.0 * max(field05.xs[1] - field05.xs[0],
                         field05.ys[1] - field05.ys[0])
        for y0 in (0.0, 1.5):
            for x in np.linspace(-1.5, 1.5, 40):
                dist = np.min(np.abs(pts - (x + 1j * y0)))
                assert dist < cell

    def test_no_isolated_label_pixels(self, field05):
        lab = field05.labels
        core = lab[1:-1, 1:-1]
        iso = ((core != lab[:-2, 1:-1]) & (core != lab[2:, 1:-1])
               & (core != lab[1:-1, :-2]) & (core != lab[1:-1, 2:]))
        assert int(iso.sum()) == 0

    def test_rotation_equivariance(self):
        # the sheet of rho z is the rank of the second rotation at z
        ctx = make_context(0.5)
        rng = np.random.default_rng(23)
        zs = 1.3 * (rng.uniform(-1, 1, 1000) + 1j * rng.uniform(-1, 1, 1000))
        mismatches = 0
        u0 = u_value(zs, ctx)
        u1 = u_value(RHO * zs, ctx)
        u2 = u_value(RHO_BAR * zs, ctx)
        label_z = (u1 > u0).astype(int) + (u2 > u0).astype(int)
        # at rho z the triple is (u1, u2, u0)
        label_rz = (u2 > u1).astype(int) + (u0 > u1).astype(int)
        direct0 = u_value(RHO * zs, ctx)
        direct1 = u_value(RHO * RHO * zs, ctx)
        direct2 = u_value(RHO * RHO_BAR * zs, ctx)
        label_direct = ((direct1 > direct0).astype(int)
                        + (direct2 > direct0).astype(int))
        mismatches = int(np.sum(label_rz != label_direct))
        assert mismatches <= 1  # 99.9% of 1000
        assert label_z.shape == label_rz.shape

    def test_resolution_pair_accepted(self):
        field = classify_sheets(make_context(0.5), resolution=(40, 60))
        assert field.labels.shape == (60, 40)
        with pytest.raises(ValidationError):
            classify_sheets(make_context(0.5), resolution=1)

    def test_component_counts_across_threshold(self):
        counts_below = sheet_component_counts(make_context(0.5),
                                              resolution=256)
        counts_above = sheet_component_counts(make_context(0.6),
                                              resolution=256)
        assert counts_below == (1, 4, 1)
        assert counts_above == (1, 6, 3)

    def test_component_counts_stable_in_resolution(self):
        assert sheet_component_counts(make_context(0.6),
                                      resolution=200) == (1, 6, 3)


class TestSheetHelpers:
    def test_rank_label_matches_membership(self):
        ctx = make_context(0.5)
        for z in (0.2 + 0.8j, -0.6 + 0.1j, 0.9 - 0.4j):
            triple = u_triple(z, ctx)
            label = rank_label(triple)
            assert label == sorted(triple, reverse=True).index(triple[0])

    def test_default_bounds(self):
        (xmin, xmax), (ymin, ymax) = DEFAULT_BOUNDS
        assert xmin == -SQRT3 and xmax == SQRT3
        assert ymin == -1.5 and ymax == 3.0
