"""One-parameter families of elliptic functions driven by critical-value paths.

The family member at time t is an elliptic function f(z, t) on the lattice
spanned by ``1`` and ``omega2(t)`` with a single pole of order n at the
origin and n + 1 simple finite critical points a_0(t), ..., a_n(t), so

    f'(z, t) = c(t) * prod_{k=0}^{n} sigma(z - a_k(t)) / sigma(z)^(n+1),

with the gauge sum(a_k) = 0 and the critical value at a_0 pinned to
A_0 = 0.  Prescribing paths for the remaining critical values
A_k = f(a_k) yields a coupled ODE system for the a_k, the scale c, and
the period omega2 itself; this module assembles that right-hand side
from the Weierstrass primitives, integrates it, and cross-checks
endpoint critical values by quadrature of the abelian integral

    A_k = c * integral from a_0 to a_k of the f' product above.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (ContourBlocked, DegenerateCriticalPoint,
                     LatticeDegenerate, ParameterCollision, ValidationError)
from .lattice import (EvalOptions, LatticeInvariants, invariants,
                      make_lattice, reduce_to_cell, sigma, wp, zeta_w)
from .ode import IntegratorConfig, TargetPath, integrate
from .period_derivs import dlnsigma_domega
from .quadrature import integrate_polyline

_TWO_PI_I = 2j * math.pi
_MIN_IM_OMEGA2 = 0.05       # below this the torus is numerically degenerate
_COLLISION_TOL = 1e-8        # min torus distance between critical points
_DEGENERATE_REL = 1e-12      # |D_k| / |c| below which a_k is not simple
_LATTICE_CLEARANCE = 0.05    # contours stay this far from lattice points
_DETOUR_POINT = 0.25 + 0.25j  # fallback interior waypoint (cell center offset)
_CACHE_SLOTS = 8


class _LatticeCache:
    """Reuse LatticeInvariants across rhs calls with slowly moving omega2."""

    def __init__(self):
        self._entries = {}

    def get(self, omega2: complex) -> LatticeInvariants:
        omega2 = complex(omega2)
        hit = self._entries.get(omega2)
        if hit is not None:
            return hit
        for key, inv in self._entries.items():
            if abs(key - omega2) < 1e-14:
                return inv
        if omega2.imag <= _MIN_IM_OMEGA2:
            raise LatticeDegenerate(
                f"Im(omega2) = {omega2.imag:.4f} <= {_MIN_IM_OMEGA2}")
        inv = invariants(make_lattice(1.0, omega2), tol=1e-12)
        if len(self._entries) >= _CACHE_SLOTS:
            self._entries.pop(next(iter(self._entries)))
        self._entries[omega2] = inv
        return inv


_CACHE = _LatticeCache()


@dataclass(frozen=True)
class TorusFamilyState:
    """Family member at one t: critical points a_0..a_n, scale c, period."""

    t: float
    a: tuple
    c: complex
    omega2: complex

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(complex(v) for v in self.a))
        object.__setattr__(self, "c", complex(self.c))
        object.__setattr__(self, "omega2", complex(self.omega2))

    @property
    def n(self) -> int:
        return len(self.a) - 1


@dataclass(frozen=True)
class TorusFamilySpec:
    """Initial state and one critical-value path per A_k, 1 <= k <= n."""

    n: int
    initial: TorusFamilyState
    paths: tuple

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "paths", tuple(self.paths))
        if self.n < 2:
            raise ValidationError("the pole order n must be at least 2")
        if len(self.initial.a) != self.n + 1:
            raise ValidationError("initial state needs n + 1 critical points")
        if len(self.paths) != self.n:
            raise ValidationError("need one critical-value path per A_k, "
                                  "k = 1..n (A_0 stays 0)")
        if not all(isinstance(p, TargetPath) for p in self.paths):
            raise ValidationError("paths must be TargetPath instances")
        if self.initial.omega2.imag <= _MIN_IM_OMEGA2:
            raise ValidationError("initial lattice is degenerate: "
                                  f"Im(omega2) <= {_MIN_IM_OMEGA2}")
        inv = _CACHE.get(self.initial.omega2)
        _check_positions(self.initial.a, inv, ValidationError)


def _check_positions(a, inv: LatticeInvariants, err=ParameterCollision):
    """Reject critical points on the pole or colliding on the torus."""
    arr = np.asarray(a, dtype=complex)
    z_red, _, _ = reduce_to_cell(arr, inv.lattice)
    if np.abs(z_red).min() < _COLLISION_TOL:
        raise err("a critical point sits on the pole lattice")
    n1 = len(arr)
    diffs = arr[:, None] - arr[None, :]
    off = diffs[~np.eye(n1, dtype=bool)]
    d_red, _, _ = reduce_to_cell(off, inv.lattice)
    if np.abs(d_red).min() < _COLLISION_TOL:
        raise err("two critical points collide on the torus")


def _stable_prod(values) -> complex:
    """Product of complex factors with rescaling to dodge overflow."""
    acc = 1.0 + 0j
    shift = 0
    for v in values:
        acc *= complex(v)
        m = abs(acc)
        if m > 1e100 or (0 < m < 1e-100):
            e = int(math.log10(m))
            acc *= 10.0 ** (-e)
            shift += e
    return acc * 10.0 ** shift


def critical_point_scales(state: TorusFamilyState,
                          inv: LatticeInvariants | None = None):
    """The second derivatives D_k = f''(a_k), k = 1..n.

    D_k = c * prod_{j != k} sigma(a_k - a_j) / sigma(a_k)^(n+1); products
    use plain sigma values (branch-free) with overflow rescaling.
    """
    if inv is None:
        inv = _CACHE.get(state.omega2)
    a = np.asarray(state.a, dtype=complex)
    n = state.n
    sig_a = sigma(a, inv)
    out = []
    for k in range(1, n + 1):
        diffs = np.delete(a[k] - a, k)
        num = _stable_prod(sigma(diffs, inv))
        den = _stable_prod([sig_a[k]] * (n + 1))
        out.append(state.c * num / den)
    return tuple(out)


def torus_rhs(state: TorusFamilyState, Adot):
    """Velocities (adot_1..n, a0dot, cdot, omega2dot) for velocities Adot.

    With gamma_k = Adot_k / D_k the system reads

        omega2dot = 2 pi i * sum_k gamma_k
        adot_l = sum_{k != l, k >= 1} gamma_k [zeta(a_k - a_l) - zeta(a_k)
                                               + eta_1 a_l]
                 + gamma_l (sum_{s != l, s >= 0} zeta(a_s - a_l)
                            + eta_1 a_l + n zeta(a_l))
        a0dot = -sum_l adot_l
        cdot / c = -sum_{j=0}^{n} [zeta(a_j) adot_j
                                   + omega2dot * d ln sigma(a_j) / d omega2]
                   + n sum_k gamma_k (wp(a_k) + eta_1),

    all Weierstrass data taken on the current lattice (1, omega2).

    Raises
    ------
    LatticeDegenerate
        If Im(omega2) <= 0.05.
    ParameterCollision
        If critical points collide or hit the pole on the torus.
    DegenerateCriticalPoint
        If some |D_k| < 1e-12 |c| (the critical point is not simple).
    """
    n = state.n
    Adot = [complex(v) for v in Adot]
    if len(Adot) != n:
        raise ValidationError("need one Adot entry per A_k, k = 1..n")
    if state.omega2.imag <= _MIN_IM_OMEGA2:
        raise LatticeDegenerate(
            f"Im(omega2) = {state.omega2.imag:.4f} <= {_MIN_IM_OMEGA2}")
    inv = _CACHE.get(state.omega2)
    _check_positions(state.a, inv)

    a = np.asarray(state.a, dtype=complex)
    eta1 = inv.eta1
    D = critical_point_scales(state, inv)
    floor = _DEGENERATE_REL * abs(state.c)
    for k, dk in enumerate(D, start=1):
        if abs(dk) < floor:
            raise DegenerateCriticalPoint(
                f"|D_{k}| = {abs(dk):.3e} below {floor:.3e}")
    gamma = np.array([ad / dk for ad, dk in zip(Adot, D)])

    omega2dot = _TWO_PI_I * gamma.sum()

    # zeta on all pairwise differences (off-diagonal) and at the points.
    n1 = n + 1
    diffs = a[:, None] - a[None, :]
    mask = ~np.eye(n1, dtype=bool)
    zd = np.zeros((n1, n1), dtype=complex)
    zd[mask] = zeta_w(diffs[mask], inv)
    za = zeta_w(a, inv)

    adot = np.zeros(n, dtype=complex)
    for l in range(1, n1):
        acc = 0j
        for k in range(1, n1):
            if k == l:
                continue
            acc += gamma[k - 1] * (zd[k, l] - za[k] + eta1 * a[l])
        cross = sum(zd[s, l] for s in range(n1) if s != l)
        acc += gamma[l - 1] * (cross + eta1 * a[l] + n * za[l])
        adot[l - 1] = acc
    a0dot = -adot.sum()

    alldot = np.concatenate([[a0dot], adot])
    dls = dlnsigma_domega(a, inv, 2)
    cdot = state.c * (-(za @ alldot + omega2dot * dls.sum())
                      + n * (gamma @ (wp(a[1:], inv) + eta1)))
    return tuple(adot), a0dot, cdot, omega2dot


def torus_initial_p2m4p(tol: float = 1e-10) -> TorusFamilyState:
    """Initial n = 4 state for the family starting at f = wp^2 - 4 wp.

    On the square lattice (1, i) the derivative f' = (2 wp - 4) wp' has
    simple zeros at the three half-periods and at the two preimages of
    wp = 2; the state places a_0 at -(1+i)/2 (where f = 0), a_1 = 1/2,
    a_2 = i/2, a_3 = the preimage of 2 with positive imaginary part and
    real part in [0, 1), and a_4 = -a_3.  The scale follows from
    c = f''(a_1) sigma(a_1)^5 / prod_{j != 1} sigma(a_1 - a_j) with
    f''(a_1) = (2 wp(a_1) - 4) wp''(a_1), since wp'(a_1) = 0.
    """
    inv = _CACHE.get(1j)
    opt = EvalOptions(tol=tol)
    a3 = complex(wp_inverse_normalized(2.0, inv, opt))
    a = (-(1 + 1j) / 2, 0.5 + 0j, 0.5j, a3, -a3)

    e1 = inv.e1
    wpp = 6 * e1 ** 2 - inv.g2 / 2          # wp'' at the half-period 1/2
    f2 = (2 * e1 - 4) * wpp
    num = sigma(0.5, inv, opt) ** 5
    den = _stable_prod(sigma(np.array([0.5 - aj for j, aj in enumerate(a)
                                       if j != 1]), inv, opt))
    return TorusFamilyState(t=0.0, a=a, c=f2 * num / den, omega2=1j)


def wp_inverse_normalized(w, inv: LatticeInvariants,
                          opt: EvalOptions | None = None) -> complex:
    """A wp preimage of w placed with Im > 0 and Re in [0, 1)."""
    from .lattice import wp_inverse

    z = complex(wp_inverse(w, inv, opt))
    z_red, _, _ = reduce_to_cell(z, inv.lattice)
    z = complex(z_red)
    if z.imag < 0 or (z.imag == 0 and z.real < 0):
        z = -z
    return complex(z.real - math.floor(z.real), z.imag)


@dataclass(frozen=True)
class TorusTrajectory:
    """Accepted states of a torus family solve, plus requested checkpoints."""

    states: tuple
    checkpoints: tuple
    n_accepted: int
    n_rejected: int
    n_rhs: int

    @property
    def endpoint(self) -> TorusFamilyState:
        return self.states[-1]


def _unpack(t, y, n) -> TorusFamilyState:
    return TorusFamilyState(t=float(t), a=tuple(y[:n + 1]),
                            c=complex(y[n + 1]), omega2=complex(y[n + 2]))


def solve_torus_family(spec: TorusFamilySpec,
                       cfg: IntegratorConfig = IntegratorConfig(),
                       checkpoints: Sequence[float] = ()) -> TorusTrajectory:
    """Integrate the torus family from t = 0 to t = 1.

    The gauge sum(a_k) = 0 is preserved analytically by the a0dot
    construction and is monitored by tests rather than re-projected.

    Raises
    ------
    LatticeDegenerate, ParameterCollision, DegenerateCriticalPoint
        Propagated from the rhs if the family degenerates en route.
    """
    n = spec.n

    def rhs(t, y):
        state = _unpack(t, y, n)
        Adot = [p.rate(t) for p in spec.paths]
        adot, a0dot, cdot, omega2dot = torus_rhs(state, Adot)
        return np.concatenate([[a0dot], adot, [cdot, omega2dot]])

    y0 = np.concatenate([spec.initial.a, [spec.initial.c,
                                          spec.initial.omega2]])
    traj = integrate(rhs, 0.0, 1.0, y0, cfg, checkpoints=tuple(checkpoints))
    states = tuple(_unpack(t, y, n) for t, y in zip(traj.ts, traj.ys))
    cps = tuple(_unpack(t, y, n)
                for t, y in zip(traj.checkpoint_ts, traj.checkpoint_ys))
    return TorusTrajectory(states=states, checkpoints=cps,
                           n_accepted=traj.n_accepted,
                           n_rejected=traj.n_rejected, n_rhs=traj.n_rhs)


def _lattice_points_near(seg_a: complex, seg_b: complex, omega2: complex):
    """Lattice points m1 + m2*omega2 within reach of the segment's box."""
    pts = []
    corners = np.array([seg_a, seg_b])
    # Solve for lattice coordinates of the segment box, pad by one cell.
    mat = np.array([[1.0, omega2.real], [0.0, omega2.imag]])
    inv_mat = np.linalg.inv(mat)
    coords = inv_mat @ np.stack([corners.real, corners.imag])
    lo = np.floor(coords.min(axis=1)).astype(int) - 1
    hi = np.ceil(coords.max(axis=1)).astype(int) + 1
    for m1 in range(lo[0], hi[0] + 1):
        for m2 in range(lo[1], hi[1] + 1):
            pts.append(m1 + m2 * omega2)
    return pts


def _seg_clearance(p: complex, q: complex, points) -> float:
    """Min distance from segment [p, q] to the given points."""
    d = q - p
    dd = abs(d) ** 2
    best = math.inf
    for o in points:
        s = 0.0 if dd == 0 else min(1.0, max(0.0, ((o - p).conjugate() * d).real / dd))
        best = min(best, abs(p + s * d - o))
    return best


def torus_critical_values(state: TorusFamilyState, tol: float = 1e-10):
    """Critical values A_0..A_n by quadrature of the abelian integral.

    A_k = c * integral from a_0 to a_k of
    prod_j sigma(zeta - a_j) / sigma(zeta)^(n+1) d zeta, along a straight
    segment, or with a single interior detour waypoint at 0.25 + 0.25i
    (an off-axis point well inside the cell) whenever the segment passes
    within 0.05 of a lattice point.  A_0 = 0 by construction.

    Raises
    ------
    ContourBlocked
        If neither the straight segment nor the detour keeps the required
        clearance from lattice points.
    """
    inv = _CACHE.get(state.omega2)
    a = np.asarray(state.a, dtype=complex)
    n = state.n
    c = state.c

    def integrand(z):
        z = np.asarray(z, dtype=complex)
        # In-cell magnitudes are O(1) for small n, so a plain product is
        # safe here; D_k products (which stack n+1 pole factors) rescale.
        num = np.prod(sigma(z[..., None] - a, inv), axis=-1)
        return num / sigma(z, inv) ** (n + 1)

    values = [0j]
    for k in range(1, n + 1):
        obstacles = _lattice_points_near(a[0], a[k], state.omega2)
        if _seg_clearance(a[0], a[k], obstacles) >= _LATTICE_CLEARANCE:
            pts = (a[0], a[k])
        else:
            pts = (a[0], _DETOUR_POINT, a[k])
            clear = min(
                _seg_clearance(pts[0], pts[1], obstacles),
                _seg_clearance(pts[1], pts[2], obstacles))
            if clear < _LATTICE_CLEARANCE:
                raise ContourBlocked(
                    f"no contour from a_0 to a_{k} keeps clearance "
                    f"{_LATTICE_CLEARANCE} from lattice points")
        values.append(c * integrate_polyline(integrand, pts, tol))
    return tuple(values)
