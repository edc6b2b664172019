"""Closed-form period derivatives against finite-difference oracles."""
import numpy as np

from ellipflow.lattice import invariants, log_sigma, make_lattice, wp, zeta_w, wp_prime
from ellipflow.period_derivs import dlnsigma_domega, dwp_domega, dzeta_domega

LATTICES = [
    (1.0 + 0.0j, 0.3 + 1.1j),
    (1.3 - 0.2j, 0.4 + 0.9j),
]
POINTS = [0.31 + 0.17j, -0.22 + 0.41j]
H = 1e-5


def _fd(fun, lat_pair, z, which):
    """Central finite difference in the chosen period, rebuilt invariants."""
    w1, w2 = lat_pair
    vals = []
    for s in (+H, -H):
        if which == 1:
            inv = invariants(make_lattice(w1 + s, w2))
        else:
            inv = invariants(make_lattice(w1, w2 + s))
        vals.append(fun(z, inv))
    return (vals[0] - vals[1]) / (2 * H)


def test_dzeta_matches_finite_differences():
    for pair in LATTICES:
        inv = invariants(make_lattice(*pair))
        for z in POINTS:
            for which in (1, 2):
                fd = _fd(zeta_w, pair, z, which)
                assert abs(dzeta_domega(z, inv, which) - fd) < 1e-7


def test_dlnsigma_matches_finite_differences():
    for pair in LATTICES:
        inv = invariants(make_lattice(*pair))
        for z in POINTS:
            for which in (1, 2):
                fd = _fd(log_sigma, pair, z, which)
                assert abs(dlnsigma_domega(z, inv, which) - fd) < 1e-7


def test_dwp_matches_finite_differences():
    for pair in LATTICES:
        inv = invariants(make_lattice(*pair))
        for z in POINTS:
            for which in (1, 2):
                fd = _fd(wp, pair, z, which)
                assert abs(dwp_domega(z, inv, which) - fd) < 1e-6


def test_derivatives_at_unreduced_arguments():
    # the closed forms hold for any z once the quasi-periodic pieces are in
    pair = (1.0 + 0.0j, 0.3 + 1.1j)
    inv = invariants(make_lattice(*pair))
    lat = inv.lattice
    z = 0.31 + 0.17j + 2 * lat.omega1 - lat.omega2
    for which in (1, 2):
        # vary omega while z stays FIXED as a complex number
        assert abs(dzeta_domega(z, inv, which) - _fd(zeta_w, pair, z, which)) < 1e-6


def test_euler_homogeneity_relations():
    rng = np.random.default_rng(23)
    for pair in LATTICES:
        inv = invariants(make_lattice(*pair))
        w1, w2 = inv.lattice.omega1, inv.lattice.omega2
        z = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        d1z = dzeta_domega(z, inv, 1)
        d2z = dzeta_domega(z, inv, 2)
        rel1 = -z * wp(z, inv) + w1 * d1z + w2 * d2z + zeta_w(z, inv)
        np.testing.assert_allclose(np.abs(rel1), 0, atol=1e-10)
        d1s = dlnsigma_domega(z, inv, 1)
        d2s = dlnsigma_domega(z, inv, 2)
        rel2 = z * zeta_w(z, inv) + w1 * d1s + w2 * d2s - 1.0
        np.testing.assert_allclose(np.abs(rel2), 0, atol=1e-10)
        d1p = dwp_domega(z, inv, 1)
        d2p = dwp_domega(z, inv, 2)
        rel3 = z * wp_prime(z, inv) + w1 * d1p + w2 * d2p + 2 * wp(z, inv)
        np.testing.assert_allclose(
            np.abs(rel3) / np.maximum(1, np.abs(wp(z, inv))), 0, atol=1e-9)


def test_eta_derivative_consistency():
    # d eta1 / d omega2 at fixed omega1 equals 2 * dzeta(omega1/2)/d omega2
    pair = (1.0 + 0.0j, 0.3 + 1.1j)
    inv = invariants(make_lattice(*pair))
    z = pair[0] / 2
    fd = _fd(zeta_w, pair, z, 2)
    assert abs(dzeta_domega(z, inv, 2) - fd) < 1e-7


def test_vectorized_shapes():
    inv = invariants(make_lattice(1.0, 0.3 + 1.1j))
    z = np.array([0.31 + 0.17j, -0.22 + 0.41j, 0.5 + 0.5j])
    for fun in (dzeta_domega, dlnsigma_domega, dwp_domega):
        assert fun(z, inv, 1).shape == z.shape
        assert isinstance(fun(z[0], inv, 2), complex)
