"""One-parameter families of rational maps driven by critical-value paths.

A rational function f whose finite critical points are ``a_l`` (with
multiplicities ``m_l >= 2``) and whose finite poles are ``b_j`` (with
orders ``n_j >= 1``) has, after normalization, the derivative

    f'(z) = prod_l (z - a_l)**(m_l - 1) / prod_j (z - b_j)**(n_j + 1).

Prescribing smooth paths t -> A_l(t) for the critical values A_l = f(a_l)
makes the critical points and poles move along trajectories of an ODE
system that is linear in the velocities Adot_l.  This module assembles
that right-hand side with truncated Taylor (jet) arithmetic, integrates
it, and cross-checks endpoints by direct contour integration of f'.

Writing m_sum = sum(m_l - 1) and n_sum = sum(n_j + 1), the three shapes
of f at infinity are: a pole (m_sum > n_sum, critical value pinned to
A_1 = 0), a finite value normalized to 0 (m_sum < n_sum - 1), and the
tangent-to-identity form f(z) = z + O(1/z) (m_sum = n_sum).  The
logarithmic case m_sum = n_sum - 1 is excluded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ParameterCollision, ToleranceUnreachable, ValidationError
from .jets import Jet, jet_const, jet_deriv, jet_from_linear, jet_pow_int
from .ode import IntegratorConfig, TargetPath, integrate
from .quadrature import integrate_polyline, route_polyline

_COLLISION_REL = 1e-8       # collision gap, relative to the spec scale
_MOMENT_TOL = 1e-10         # admissible residual of the weighted-moment normalization
_POLE_CLEARANCE_REL = 0.1   # contour clearance around poles, relative to scale
_INF_RADIUS_REL = 1e3       # |Z0| / scale for contours anchored at infinity
_TAIL_ORDER = 48            # series order for the analytic tail beyond Z0


def _pairwise_scale(points) -> float:
    """Largest pairwise distance among ``points`` (1.0 if fewer than two)."""
    pts = np.asarray(points, dtype=complex)
    if len(pts) < 2:
        return 1.0
    gaps = np.abs(pts[:, None] - pts[None, :])
    return float(gaps.max())


def _min_gap(points) -> float:
    pts = np.asarray(points, dtype=complex)
    if len(pts) < 2:
        return math.inf
    gaps = np.abs(pts[:, None] - pts[None, :])
    gaps[np.diag_indices(len(pts))] = math.inf
    return float(gaps.min())


def moment_residual(m, a, n, b) -> complex:
    """The weighted moment sum(m_l - 1) a_l - sum(n_j + 1) b_j.

    The normalization fixes the translation gauge of the parameter plane;
    the ODE flow conserves this combination when m_sum = n_sum.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    wa = np.asarray(m, dtype=float) - 1.0
    wb = np.asarray(n, dtype=float) + 1.0
    return complex(wa @ a - (wb @ b if len(b) else 0.0))


@dataclass(frozen=True)
class RationalFamilySpec:
    """Initial data and critical-value paths for a rational family.

    Parameters
    ----------
    m : sequence of int
        Multiplicities of the critical points, each at least 2.
    n : sequence of int
        Orders of the finite poles, each at least 1.
    a0 : sequence of complex
        Initial critical points (same length as ``m``).
    b0 : sequence of complex
        Initial poles (same length as ``n``).
    paths : sequence of TargetPath
        One path per critical value A_l.  When m_sum > n_sum the first
        critical value is pinned by the normalization, so ``paths[0]``
        must be identically zero.
    """

    m: tuple
    n: tuple
    a0: tuple
    b0: tuple
    paths: tuple

    def __post_init__(self):
        object.__setattr__(self, "m", tuple(int(v) for v in self.m))
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        object.__setattr__(self, "a0", tuple(complex(v) for v in self.a0))
        object.__setattr__(self, "b0", tuple(complex(v) for v in self.b0))
        object.__setattr__(self, "paths", tuple(self.paths))
        self._validate()

    def _validate(self):
        if not self.m:
            raise ValidationError("a family needs at least one critical point")
        if any(v < 2 for v in self.m):
            raise ValidationError("critical multiplicities must be >= 2")
        if any(v < 1 for v in self.n):
            raise ValidationError("pole orders must be >= 1")
        if len(self.a0) != len(self.m):
            raise ValidationError("a0 and m must have the same length")
        if len(self.b0) != len(self.n):
            raise ValidationError("b0 and n must have the same length")
        if len(self.paths) != len(self.m):
            raise ValidationError("need exactly one critical-value path per a_l")
        if not all(isinstance(p, TargetPath) for p in self.paths):
            raise ValidationError("paths must be TargetPath instances")
        if self.m_sum == self.n_sum - 1:
            raise ValidationError(
                "degree balance sum(m_l - 1) = sum(n_j + 1) - 1 makes the "
                "primitive of f' logarithmic; this family shape is excluded")
        resid = moment_residual(self.m, self.a0, self.n, self.b0)
        if abs(resid) >= _MOMENT_TOL:
            raise ValidationError(
                f"initial data violates the weighted-moment normalization "
                f"(residual {abs(resid):.3e})")
        params = self.a0 + self.b0
        if _min_gap(params) <= _COLLISION_REL * self.scale:
            raise ValidationError("initial critical points and poles must be "
                                  "pairwise distinct")
        if self.m_sum > self.n_sum:
            p0 = self.paths[0]
            if p0.start != 0 or p0.delta != 0:
                raise ValidationError(
                    "with a pole at infinity the first critical value is "
                    "pinned to 0, so paths[0] must be identically zero")

    @property
    def M(self) -> int:
        """Number of finite critical points."""
        return len(self.m)

    @property
    def N(self) -> int:
        """Number of finite poles."""
        return len(self.n)

    @property
    def m_sum(self) -> int:
        return sum(v - 1 for v in self.m)

    @property
    def n_sum(self) -> int:
        return sum(v + 1 for v in self.n)

    @property
    def scale(self) -> float:
        """Largest pairwise distance among the initial parameters."""
        return _pairwise_scale(self.a0 + self.b0)

    def initial_state(self) -> "RationalFamilyState":
        return RationalFamilyState(t=0.0, a=self.a0, b=self.b0)


@dataclass(frozen=True)
class RationalFamilyState:
    """Snapshot of the family parameters at one value of t."""

    t: float
    a: tuple
    b: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(complex(v) for v in self.a))
        object.__setattr__(self, "b", tuple(complex(v) for v in self.b))


def _check_collision(a, b, scale: float):
    gap = _min_gap(tuple(a) + tuple(b))
    if gap <= _COLLISION_REL * scale:
        raise ParameterCollision(
            f"parameter gap {gap:.3e} below collision threshold "
            f"{_COLLISION_REL * scale:.3e}")


def rational_rhs(state: RationalFamilyState, Adot, spec: RationalFamilySpec):
    """Velocities (adot, bdot) for given critical-value velocities Adot.

    For each critical point a_k let

        H_k(x) = prod_j (x - b_j)**(n_j + 1) / prod_{i != k} (x - a_i)**(m_i - 1),

    i.e. 1/f'(x) with the vanishing factor (x - a_k)**(m_k - 1) removed.
    Then, with G_{kl} = H_k / (x - a_l) and I_{kj} = H_k / (x - b_j),

        adot_l = H_l^{(m_l - 1)}(a_l) / (m_l - 1)! * Adot_l
                 + sum_{k != l} G_{kl}^{(m_k - 2)}(a_k) / (m_k - 2)! * Adot_k
        bdot_j = sum_k I_{kj}^{(m_k - 2)}(a_k) / (m_k - 2)! * Adot_k.

    All Taylor coefficients come from jet arithmetic of order max(m_l).

    Raises
    ------
    ParameterCollision
        If any two parameters are closer than 1e-8 times the spec scale.
    """
    a, b = state.a, state.b
    m, n = spec.m, spec.n
    if len(a) != spec.M or len(b) != spec.N:
        raise ValidationError("state shape does not match the spec")
    _check_collision(a, b, spec.scale)
    Adot = [complex(v) for v in Adot]
    if len(Adot) != spec.M:
        raise ValidationError("need one Adot entry per critical point")

    adot = [0j] * spec.M
    bdot = [0j] * spec.N
    for k in range(spec.M):
        if Adot[k] == 0:
            continue
        order = m[k] - 1
        # H_k as a jet about a_k.
        H = jet_const(1.0, order)
        for bj, nj in zip(b, n):
            H = H * jet_pow_int(jet_from_linear(bj, a[k], order), nj + 1)
        for i in range(spec.M):
            if i != k:
                H = H * jet_pow_int(jet_from_linear(a[i], a[k], order),
                                    -(m[i] - 1))
        c = math.factorial(m[k] - 2)
        adot[k] += jet_deriv(H, m[k] - 1) / math.factorial(m[k] - 1) * Adot[k]
        for l in range(spec.M):
            if l == k:
                continue
            G = H / jet_from_linear(a[l], a[k], order)
            adot[l] += jet_deriv(G, m[k] - 2) / c * Adot[k]
        for j in range(spec.N):
            I = H / jet_from_linear(b[j], a[k], order)
            bdot[j] += jet_deriv(I, m[k] - 2) / c * Adot[k]
    return tuple(adot), tuple(bdot)


@dataclass(frozen=True)
class RationalTrajectory:
    """Accepted states of a family solve, plus requested checkpoints."""

    states: tuple
    checkpoints: tuple
    n_accepted: int
    n_rejected: int
    n_rhs: int

    @property
    def endpoint(self) -> RationalFamilyState:
        return self.states[-1]


def _pack(a, b):
    return np.concatenate([np.asarray(a, dtype=complex),
                           np.asarray(b, dtype=complex)])


def _unpack(t, y, M):
    return RationalFamilyState(t=float(t), a=tuple(y[:M]), b=tuple(y[M:]))


def solve_rational_family(spec: RationalFamilySpec,
                          cfg: IntegratorConfig = IntegratorConfig(),
                          checkpoints: Sequence[float] = ()) -> RationalTrajectory:
    """Integrate the family from t = 0 to t = 1.

    After each accepted step the translation gauge is re-centered so the
    weighted moment stays at zero whenever m_sum != n_sum (translation of
    the parameter plane is a symmetry of the family); when m_sum = n_sum
    the moment is conserved by the flow and is left untouched.

    Returns
    -------
    RationalTrajectory
        States at every accepted step and at the requested checkpoints.

    Raises
    ------
    ParameterCollision
        If two parameters approach within 1e-8 of the spec scale.
    """
    M = spec.M
    balance = spec.m_sum - spec.n_sum
    wa = np.array([v - 1.0 for v in spec.m])
    wb = np.array([-(v + 1.0) for v in spec.n])
    weights = np.concatenate([wa, wb])

    def rhs(t, y):
        state = _unpack(t, y, M)
        Adot = [p.rate(t) for p in spec.paths]
        adot, bdot = rational_rhs(state, Adot, spec)
        return _pack(adot, bdot)

    def recenter(t, y):
        if balance == 0:
            return None
        delta = complex(weights @ y) / balance
        return y - delta

    y0 = _pack(spec.a0, spec.b0)
    traj = integrate(rhs, 0.0, 1.0, y0, cfg, checkpoints=tuple(checkpoints),
                     step_hook=recenter)
    states = tuple(_unpack(t, y, M) for t, y in zip(traj.ts, traj.ys))
    cps = tuple(_unpack(t, y, M)
                for t, y in zip(traj.checkpoint_ts, traj.checkpoint_ys))
    return RationalTrajectory(states=states, checkpoints=cps,
                              n_accepted=traj.n_accepted,
                              n_rejected=traj.n_rejected, n_rhs=traj.n_rhs)


def _fprime_factory(state: RationalFamilyState,
                    spec: RationalFamilySpec) -> Callable:
    a = np.asarray(state.a, dtype=complex)
    b = np.asarray(state.b, dtype=complex)
    ma = np.array([v - 1.0 for v in spec.m])
    nb = np.array([v + 1.0 for v in spec.n])

    def fprime(z):
        z = np.asarray(z, dtype=complex)
        num = np.prod((z[..., None] - a) ** ma, axis=-1)
        if len(b):
            den = np.prod((z[..., None] - b) ** nb, axis=-1)
        else:
            den = 1.0
        return num / den

    return fprime


def _one_minus(c, order: int) -> Jet:
    """The linear function 1 - c*u as a jet in u about 0."""
    coeffs = np.zeros(order + 1, dtype=complex)
    coeffs[0] = 1.0
    if order >= 1:
        coeffs[1] = -complex(c)
    return Jet(coeffs)


def _tail_coefficients(state, spec):
    """Taylor coefficients of u**(m_sum - n_sum) * f'(1/u) about u = 0.

    Substituting z = 1/u gives f'(1/u) = u**d * G(u) with d = n_sum -
    m_sum and G(u) = prod(1 - a u)**(m-1) / prod(1 - b u)**(n+1); the
    returned array holds the Taylor coefficients of G.
    """
    G = jet_const(1.0, _TAIL_ORDER)
    for ak, mk in zip(state.a, spec.m):
        G = G * jet_pow_int(_one_minus(ak, _TAIL_ORDER), mk - 1)
    for bj, nj in zip(state.b, spec.n):
        G = G * jet_pow_int(_one_minus(bj, _TAIL_ORDER), -(nj + 1))
    return G.coeffs


def _tail_integral(state, spec, z0: complex, tol: float) -> complex:
    """Integral of f' (or f' - 1 when m_sum = n_sum) from infinity to z0.

    In the variable u = 1/z the integrand becomes -u**(d-2) G(u) with
    d = n_sum - m_sum >= 2, or -(G(u) - 1)/u**2 when d = 0; either way a
    power series evaluated at u0 = 1/z0, |u0| ~ 1e-3 / scale.  The u**-1
    coefficient in the d = 0 case is the weighted moment, which the
    normalization holds at zero, so it is dropped.
    """
    d = spec.n_sum - spec.m_sum
    coeffs = _tail_coefficients(state, spec)
    u0 = 1.0 / z0
    total = 0j
    term = 0j
    for k, g in enumerate(coeffs):
        p = d - 2 + k          # power of u in the integrand term -g_k u^p
        if p < 0:
            continue           # the 1 subtracted from f', and the zero moment
        term = -g * u0 ** (p + 1) / (p + 1)
        total += term
    if abs(term) > tol:
        raise ToleranceUnreachable(
            f"truncated tail term {abs(term):.3e} exceeds tolerance {tol:.3e}")
    return total


def critical_values_quadrature(state: RationalFamilyState,
                               spec: RationalFamilySpec,
                               tol: float = 1e-10):
    """Critical values A_l recovered by contour integration of f'.

    The base point and integrand depend on the degree balance:

    - m_sum > n_sum: f has a pole at infinity and A_1 = 0, so
      A_l = integral of f' from a_1 to a_l.
    - m_sum < n_sum - 1: f(inf) = 0, so A_l = integral of f' from
      infinity to a_l; the tail beyond |z| = 1e3 * scale is summed
      analytically from the expansion of f' at infinity.
    - m_sum = n_sum: f(z) = z + O(1/z), so A_l = a_l + integral of
      (f' - 1) from infinity to a_l, with the same analytic tail.

    Contours are piecewise linear, routed to keep distance
    0.1 * scale from every pole b_j.

    Raises
    ------
    ContourBlocked
        If no pole-avoiding polyline exists (e.g. a critical point
        sits closer than the clearance to a pole).
    """
    fprime = _fprime_factory(state, spec)
    scale = spec.scale
    clearance = _POLE_CLEARANCE_REL * scale
    obstacles = list(state.b)
    values = []
    if spec.m_sum > spec.n_sum:
        base = state.a[0]
        for l, al in enumerate(state.a):
            if l == 0:
                values.append(0j)
                continue
            pts = route_polyline(base, al, obstacles, clearance)
            values.append(integrate_polyline(fprime, pts, tol))
        return tuple(values)

    z0 = _INF_RADIUS_REL * scale * complex(math.cos(0.3), math.sin(0.3))
    if spec.m_sum < spec.n_sum - 1:
        head = _tail_integral(state, spec, z0, tol)
        for al in state.a:
            pts = route_polyline(z0, al, obstacles, clearance)
            values.append(head + integrate_polyline(fprime, pts, tol))
        return tuple(values)

    # m_sum = n_sum: integrate f' - 1 and add the identity part.
    head = _tail_integral(state, spec, z0, tol)

    def integrand(z):
        return fprime(z) - 1.0

    for al in state.a:
        pts = route_polyline(z0, al, obstacles, clearance)
        values.append(al + head + integrate_polyline(integrand, pts, tol))
    return tuple(values)
