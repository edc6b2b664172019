"""Complex period lattices and the classical doubly periodic functions.

Every evaluation first reduces its argument to the half-open fundamental
cell centered at the origin, computes there, and restores the unreduced
value through the quasi-periodicity laws.  Inside the cell the lattice
sums are organized into rows parallel to ``omega1``; each row is summed
in closed trigonometric form, so the row sequence decays geometrically
with ratio exp(-2*pi*Im(omega2/omega1)) and the truncation point follows
from that bound.  A small disk around the origin switches to the Laurent
expansion, whose coefficients come from the classical recursion seeded by
g2/20 and g3/28.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CollinearPeriods,
    DivisorMismatch,
    NoConvergence,
    NotPrincipal,
    PoleAtLatticePoint,
    ToleranceUnreachable,
)

_ROW_CAP = 4000          # hard cap on accelerated-row count
_LAURENT_ORDERS = 30     # Eisenstein coefficients kept for the origin disk
_COLLINEAR_TOL = 1e-14   # |Im(omega2/omega1)| below this is collinear


@dataclass(frozen=True)
class Lattice:
    """Period pair with Im(omega2/omega1) > 0."""

    omega1: complex
    omega2: complex

    @property
    def tau(self) -> complex:
        return self.omega2 / self.omega1

    @property
    def scale(self) -> float:
        return max(abs(self.omega1), abs(self.omega2))


def make_lattice(omega1: complex, omega2: complex) -> Lattice:
    """Build an oriented lattice from two periods.

    Parameters
    ----------
    omega1, omega2 : complex
        Generators.  If Im(omega2/omega1) < 0 the sign of omega2 is
        flipped so the returned pair is positively oriented.

    Raises
    ------
    CollinearPeriods
        If the period ratio is real to within 1e-14 (relative).
    """
    omega1 = complex(omega1)
    omega2 = complex(omega2)
    if omega1 == 0 or omega2 == 0:
        raise CollinearPeriods("periods must be nonzero")
    ratio = omega2 / omega1
    if abs(ratio.imag) <= _COLLINEAR_TOL * max(1.0, abs(ratio)):
        raise CollinearPeriods(
            f"period ratio {ratio} is real within tolerance")
    if ratio.imag < 0:
        omega2 = -omega2
    return Lattice(omega1, omega2)


def reduce_to_cell(z, lat: Lattice):
    """Translate ``z`` by lattice vectors into the centered fundamental cell.

    The cell is half-open: both lattice coordinates lie in [-1/2, 1/2).
    Works on scalars and arrays.

    Returns
    -------
    (z_red, m1, m2)
        ``z = z_red + m1*omega1 + m2*omega2`` with integer m1, m2.
    """
    z_arr = np.asarray(z, dtype=complex)
    w1, w2 = lat.omega1, lat.omega2
    det = w1.real * w2.imag - w1.imag * w2.real
    # coordinates of z in the (omega1, omega2) basis
    ca = (z_arr.real * w2.imag - z_arr.imag * w2.real) / det
    cb = (z_arr.imag * w1.real - z_arr.real * w1.imag) / det
    m1 = np.floor(ca + 0.5).astype(int)
    m2 = np.floor(cb + 0.5).astype(int)
    z_red = z_arr - m1 * w1 - m2 * w2
    if np.ndim(z) == 0:
        return complex(z_red), int(m1), int(m2)
    return z_red, m1, m2


@dataclass
class EvalOptions:
    """Evaluation controls shared by the function family.

    ``near_origin_radius=None`` means the per-lattice default
    0.1 * (shortest nonzero lattice vector).
    """

    tol: float = 1e-10
    near_origin_radius: float | None = None

    def radius_for(self, inv: "LatticeInvariants") -> float:
        if self.near_origin_radius is not None:
            return self.near_origin_radius
        return 0.1 * inv._shortest


class _Workspace:
    """Per-lattice precomputed data for the row-accelerated sums."""

    def __init__(self, lat: Lattice):
        self.lat = lat
        self.tau = lat.tau
        # p = exp(2*pi*i*tau) controls the row decay; |p| < 1 strictly.
        self.p = cmath.exp(2j * cmath.pi * self.tau)
        self.row_ratio = abs(self.p)
        self.f = cmath.pi / lat.omega1
        # shortest nonzero lattice vector from a bounded coefficient scan;
        # coefficients beyond +-8 cannot win for Im(tau) >= 1e-3 scales
        best = min(
            abs(m1 * lat.omega1 + m2 * lat.omega2)
            for m1 in range(-8, 9)
            for m2 in range(-8, 9)
            if (m1, m2) != (0, 0)
        )
        self.shortest = best
        self.eisenstein: np.ndarray | None = None  # S_{2k}, k = 2..

    def rows_needed(self, tol: float) -> int:
        """Row count from the geometric tail bound; ToleranceUnreachable
        past the cap."""
        r = self.row_ratio
        if r >= 1.0:
            raise ToleranceUnreachable("period ratio has no positive imaginary part")
        # first row is O(|p|^(1/2)) in the worst cell corner
        n = int(math.log(max(tol, 1e-300)) / math.log(r)) + 3
        if n > _ROW_CAP:
            raise ToleranceUnreachable(
                f"need {n} accelerated rows (> cap {_ROW_CAP}) for tol {tol}")
        return n

    def set_eisenstein(self, g2: complex, g3: complex) -> None:
        """Fill S_{2k} (k >= 2) by the classical recursion for the Laurent
        coefficients of the p-function."""
        kmax = _LAURENT_ORDERS
        c = np.zeros(kmax + 1, dtype=complex)  # c[n] = (2n+1) S_{2n+2}
        c[1] = g2 / 20.0
        c[2] = g3 / 28.0
        for n in range(3, kmax + 1):
            acc = 0.0 + 0.0j
            for m in range(1, n - 1):
                acc += c[m] * c[n - 1 - m]
            c[n] = 3.0 * acc / ((2 * n + 3) * (n - 2))
        # S[k] = S_{2k} for k = 2..kmax+1
        self.eisenstein = np.array(
            [c[n] / (2 * n + 1) for n in range(1, kmax + 1)], dtype=complex)
        # self.eisenstein[k-2] = S_{2k}


@dataclass(eq=False)
class LatticeInvariants:
    """Lattice constants: modular invariants, half-period values, eta pair."""

    lattice: Lattice
    g2: complex
    g3: complex
    eta1: complex
    eta2: complex
    e1: complex
    e2: complex
    e3: complex
    tol: float
    trunc_radius: int
    _ws: _Workspace = field(repr=False)

    @property
    def _shortest(self) -> float:
        return self._ws.shortest


def _eisenstein_weight(ws: _Workspace, weight: int, tol: float):
    """Sum' of omega^{-weight} (weight 4 or 6) by closed-form rows."""
    p, w1 = ws.p, ws.lat.omega1
    if weight == 4:
        total = 2.0 * math.pi ** 4 / 90.0

        def row(q):
            return (8 * math.pi ** 4 / 3) * q * (1 + 4 * q + q * q) / (1 - q) ** 4
    else:
        total = 2.0 * math.pi ** 6 / 945.0

        def row(q):
            poly = 1 + q * (26 + q * (66 + q * (26 + q)))
            return -(8 * math.pi ** 6 / 15) * q * poly / (1 - q) ** 6

    q = p
    for n in range(1, _ROW_CAP):
        term = 2.0 * row(q)  # rows n and -n coincide
        total += term
        if abs(term) < tol and n > 2:
            return total / w1 ** weight, n
        q *= p
    raise ToleranceUnreachable(f"Eisenstein weight-{weight} rows exceeded cap")


def invariants(lat: Lattice, tol: float = 1e-12) -> LatticeInvariants:
    """Compute g2, g3, the eta pair and the half-period values.

    Post conditions checked at ``tol``: the Legendre relation
    eta1*omega2 - eta2*omega1 = 2*pi*i, e1 + e2 + e3 = 0, pairwise
    distinct e_i, and the cubic 4e^3 - g2 e - g3 = 0 at each e_i.

    Raises
    ------
    ToleranceUnreachable
        If the row sums cannot reach ``tol`` within the row cap, or a
        post condition fails at ``tol`` scale.
    """
    ws = _Workspace(lat)
    scale4 = ws.shortest ** -4
    scale6 = ws.shortest ** -6
    s4, rows4 = _eisenstein_weight(ws, 4, tol * scale4 / 10)
    s6, rows6 = _eisenstein_weight(ws, 6, tol * scale6 / 10)
    g2, g3 = 60.0 * s4, 140.0 * s6
    ws.set_eisenstein(g2, g3)

    half1 = lat.omega1 / 2.0
    half2 = lat.omega2 / 2.0
    half3 = (lat.omega1 + lat.omega2) / 2.0
    eta1 = 2.0 * _zeta_cell(half1, ws, tol)
    eta2 = 2.0 * _zeta_cell(half2, ws, tol)
    e1 = _wp_cell(half1, ws, tol)
    e2 = _wp_cell(half2, ws, tol)
    e3 = _wp_cell(half3, ws, tol)

    inv = LatticeInvariants(
        lattice=lat, g2=g2, g3=g3, eta1=eta1, eta2=eta2,
        e1=complex(e1), e2=complex(e2), e3=complex(e3),
        tol=tol, trunc_radius=max(rows4, rows6), _ws=ws)

    legendre = eta1 * lat.omega2 - eta2 * lat.omega1 - 2j * math.pi
    checks = {
        "legendre relation": abs(legendre),
        "e1+e2+e3": abs(e1 + e2 + e3) / max(1.0, abs(e1)),
    }
    for name, ev in (("e1", e1), ("e2", e2), ("e3", e3)):
        res = 4 * ev ** 3 - g2 * ev - g3
        checks[f"cubic at {name}"] = abs(res) / max(1.0, abs(ev)) ** 3
    for name, resid in checks.items():
        if not resid < 100 * tol:
            raise ToleranceUnreachable(
                f"invariant check '{name}' residual {resid:.3e} exceeds {100 * tol:.1e}")
    sep = min(abs(e1 - e2), abs(e1 - e3), abs(e2 - e3))
    if not sep > tol:
        raise ToleranceUnreachable(f"half-period values not distinct: min gap {sep:.3e}")
    return inv


def default_eval_options(inv: LatticeInvariants) -> EvalOptions:
    """Evaluation options with the documented defaults for this lattice."""
    return EvalOptions(tol=1e-10, near_origin_radius=0.1 * inv._shortest)


# ---------------------------------------------------------------------------
# cell evaluators (arguments already inside or near the centered cell)
# ---------------------------------------------------------------------------

def _wp_cell(z, ws: _Workspace, tol: float):
    f, p, w2 = ws.f, ws.p, ws.lat.omega2
    u = f * np.asarray(z, dtype=complex)
    w = np.exp(2j * u)
    acc = -1.0 / 3.0 + np.sin(u) ** -2
    n_rows = ws.rows_needed(tol / 10)
    pn = p
    scale = abs(f) ** 2
    for n in range(1, n_rows + 1):
        a = pn / w
        b = pn * w
        term = -4.0 * (a / (1 - a) ** 2 + b / (1 - b) ** 2 - 2 * pn / (1 - pn) ** 2)
        acc = acc + term
        if np.max(np.abs(term)) * scale < tol / 10 and n > 1:
            break
        pn *= p
    return f * f * acc


def _wp_prime_cell(z, ws: _Workspace, tol: float):
    f, p = ws.f, ws.p
    u = f * np.asarray(z, dtype=complex)
    w = np.exp(2j * u)
    acc = np.cos(u) / np.sin(u) ** 3
    n_rows = ws.rows_needed(tol / 10)
    pn = p
    scale = 2 * abs(f) ** 3
    for n in range(1, n_rows + 1):
        a = pn / w
        b = pn * w
        term = -4j * a * (1 + a) / (1 - a) ** 3 + 4j * b * (1 + b) / (1 - b) ** 3
        acc = acc + term
        if np.max(np.abs(term)) * scale < tol / 10 and n > 1:
            break
        pn *= p
    return -2.0 * f ** 3 * acc


def _zeta_cell(z, ws: _Workspace, tol: float):
    f, p = ws.f, ws.p
    z_arr = np.asarray(z, dtype=complex)
    u = f * z_arr
    w = np.exp(2j * u)
    acc = f / np.tan(u) + (f * f / 3.0) * z_arr
    n_rows = ws.rows_needed(tol / 10)
    pn = p
    s2 = np.sin(2.0 * u)
    for n in range(1, n_rows + 1):
        a = pn / w
        b = pn * w
        term = (4.0 * f * pn * s2 / ((1 - a) * (1 - b))
                - 8.0 * f * f * z_arr * pn / (1 - pn) ** 2)
        acc = acc + term
        if np.max(np.abs(term)) < tol / 10 and n > 1:
            break
        pn *= p
    return acc


def _log_sigma_cell(z, ws: _Workspace, tol: float):
    """A branch of log sigma, analytic on the closed centered cell."""
    f, p = ws.f, ws.p
    z_arr = np.asarray(z, dtype=complex)
    u = f * z_arr
    w = np.exp(2j * u)
    acc = np.log(np.sin(u) / f) + (f * f / 6.0) * z_arr ** 2
    n_rows = ws.rows_needed(tol / 10)
    pn = p
    for n in range(1, n_rows + 1):
        a = pn / w
        b = pn * w
        term = (np.log1p(-a) + np.log1p(-b) - 2 * np.log1p(-pn)
                - 4.0 * f * f * z_arr ** 2 * pn / (1 - pn) ** 2)
        acc = acc + term
        if np.max(np.abs(term)) < tol / 10 and n > 1:
            break
        pn *= p
    return acc


def _laurent(z, ws: _Workspace, kind: str):
    """Origin-disk expansions; ``kind`` in {wp, wp_prime, zeta, log_sigma}."""
    S = ws.eisenstein  # S[k-2] = S_{2k}
    z_arr = np.asarray(z, dtype=complex)
    z2 = z_arr * z_arr
    if kind == "wp":
        acc = np.zeros_like(z_arr)
        for k in range(len(S) + 1, 1, -1):
            acc = (acc + (2 * k - 1) * S[k - 2]) * z2
        return 1.0 / z2 + acc
    if kind == "wp_prime":
        acc = np.zeros_like(z_arr)
        for k in range(len(S) + 1, 1, -1):
            acc = acc * z2 + (2 * k - 1) * (2 * k - 2) * S[k - 2]
        return -2.0 / (z2 * z_arr) + acc * z_arr
    if kind == "zeta":
        acc = np.zeros_like(z_arr)
        for k in range(len(S) + 1, 1, -1):
            acc = acc * z2 + S[k - 2]
        return 1.0 / z_arr - acc * z2 * z_arr
    if kind == "log_sigma":
        acc = np.zeros_like(z_arr)
        for k in range(len(S) + 1, 1, -1):
            acc = acc * z2 + S[k - 2] / (2 * k)
        return np.log(z_arr) - acc * z2 * z2
    raise ValueError(kind)


def _pole_threshold(lat: Lattice) -> float:
    return 1e-13 * lat.scale


def _dispatch(z, inv: LatticeInvariants, opt: EvalOptions | None, kind: str,
              pole_ok: bool = False):
    """Reduce, split near/far, evaluate, without quasi-periodic corrections.

    Returns (value_on_reduced_argument, z_red, m1, m2, scalar_input).
    """
    opt = opt or default_eval_options(inv)
    ws = inv._ws
    scalar = np.ndim(z) == 0
    z_red, m1, m2 = reduce_to_cell(z, inv.lattice)
    z_red = np.asarray(z_red, dtype=complex)
    r = np.abs(z_red)
    if not pole_ok and np.any(r < _pole_threshold(inv.lattice)):
        raise PoleAtLatticePoint(
            "argument coincides with a lattice point within 1e-13*scale")
    near = r < opt.radius_for(inv)
    if np.ndim(z_red) == 0:
        if bool(near):
            val = _laurent(z_red, ws, kind if kind != "sigma" else "log_sigma")
        else:
            val = _CELL_EVAL[kind](z_red, ws, opt.tol)
        return np.asarray(val, dtype=complex), z_red, m1, m2, scalar
    out = np.empty_like(z_red)
    if np.any(near):
        out[near] = _laurent(z_red[near], ws, kind)
    if np.any(~near):
        out[~near] = _CELL_EVAL[kind](z_red[~near], ws, opt.tol)
    return out, z_red, m1, m2, scalar


_CELL_EVAL = {
    "wp": _wp_cell,
    "wp_prime": _wp_prime_cell,
    "zeta": _zeta_cell,
    "log_sigma": _log_sigma_cell,
}


def _ret(val, scalar):
    return complex(val) if scalar else val


# ---------------------------------------------------------------------------
# public evaluators
# ---------------------------------------------------------------------------

def wp(z, inv: LatticeInvariants, opt: EvalOptions | None = None):
    """Weierstrass p-function.  Elliptic: the reduced value is returned as is.

    Accepts scalars or arrays.  Raises PoleAtLatticePoint on lattice hits.
    """
    val, _, _, _, scalar = _dispatch(z, inv, opt, "wp")
    return _ret(val, scalar)


def wp_prime(z, inv: LatticeInvariants, opt: EvalOptions | None = None):
    """Derivative of the p-function."""
    val, _, _, _, scalar = _dispatch(z, inv, opt, "wp_prime")
    return _ret(val, scalar)


def zeta_w(z, inv: LatticeInvariants, opt: EvalOptions | None = None):
    """Weierstrass zeta.  Quasi-periodic: adds m1*eta1 + m2*eta2 after
    cell reduction."""
    val, _, m1, m2, scalar = _dispatch(z, inv, opt, "zeta")
    return _ret(val + m1 * inv.eta1 + m2 * inv.eta2, scalar)


def _sign_exponent(m1, m2):
    # sigma(z + Omega) picks up (-1)^(m1 + m2 + m1*m2)
    return np.asarray(m1 + m2 + m1 * m2) % 2


def log_sigma(z, inv: LatticeInvariants, opt: EvalOptions | None = None):
    """A branch of log sigma.

    Analytic (single Log branch) for arguments inside the centered cell;
    for unreduced arguments the quasi-periodicity correction
    eta(Omega)*(z_red + Omega/2) + i*pi*(m1 + m2 + m1*m2) is added, which
    makes exp(log_sigma) agree with ``sigma`` everywhere.
    """
    val, z_red, m1, m2, scalar = _dispatch(z, inv, opt, "log_sigma")
    lat = inv.lattice
    omega = m1 * lat.omega1 + m2 * lat.omega2
    eta = m1 * inv.eta1 + m2 * inv.eta2
    corr = eta * (z_red + omega / 2.0) + 1j * math.pi * _sign_exponent(m1, m2)
    return _ret(val + corr, scalar)


def log_abs_sigma(z, inv: LatticeInvariants, opt: EvalOptions | None = None):
    """ln |sigma(z)|, branch-free; vector-friendly form used by field scans."""
    val, z_red, m1, m2, scalar = _dispatch(z, inv, opt, "log_sigma")
    lat = inv.lattice
    omega = m1 * lat.omega1 + m2 * lat.omega2
    eta = m1 * inv.eta1 + m2 * inv.eta2
    out = np.real(val) + np.real(eta * (z_red + omega / 2.0))
    return float(out) if scalar else out


def sigma(z, inv: LatticeInvariants, opt: EvalOptions | None = None):
    """Weierstrass sigma, extended to unreduced arguments by
    sigma(z + Omega) = eps * sigma(z) * exp(eta(Omega) (z + Omega/2)).

    Returns exactly 0 at lattice points.
    """
    scalar = np.ndim(z) == 0
    z_arr = np.asarray(z, dtype=complex)
    z_red, m1, m2 = reduce_to_cell(z_arr, inv.lattice)
    on_pole = np.abs(np.asarray(z_red)) < _pole_threshold(inv.lattice)
    if scalar:
        if bool(on_pole):
            return 0j
        return complex(np.exp(log_sigma(z, inv, opt)))
    out = np.zeros_like(z_arr)
    ok = ~on_pole
    if np.any(ok):
        out[ok] = np.exp(log_sigma(z_arr[ok], inv, opt))
    return out


def wp_inverse(w, inv: LatticeInvariants, opt: EvalOptions | None = None):
    """One solution z of wp(z) = w in the fundamental cell.

    Newton from a coarse cell grid; the companion solution is -z mod the
    lattice.  Raises NoConvergence if no seed converges.
    """
    opt = opt or default_eval_options(inv)
    lat = inv.lattice
    w = complex(w)
    tol = max(opt.tol, 1e-13)
    seeds = []
    for sa in np.linspace(-0.45, 0.45, 8):
        for sb in np.linspace(-0.45, 0.45, 8):
            s = sa * lat.omega1 + sb * lat.omega2
            if abs(s) > 0.05 * inv._shortest:
                seeds.append(s)
    # try seeds in order of initial residual
    resid = np.abs(wp(np.array(seeds), inv, opt) - w)
    seeds = [seeds[i] for i in np.argsort(resid)]
    fscale = max(1.0, abs(w))
    for seed in seeds[:20]:
        zk = seed
        for _ in range(60):
            fz = wp(zk, inv, opt) - w
            if abs(fz) < tol * fscale:
                zk, _, _ = reduce_to_cell(zk, lat)
                return zk
            dz = wp_prime(zk, inv, opt)
            if dz == 0:
                break
            step = fz / dz
            if abs(step) > lat.scale:
                step *= lat.scale / abs(step)
            # keep iterates away from the poles
            zr, _, _ = reduce_to_cell(zk - step, lat)
            if abs(zr) < 0.02 * inv._shortest:
                step *= 0.5
            zk = zk - step
        else:
            fz = wp(zk, inv, opt) - w
            if abs(fz) < tol * fscale * 10:
                zk, _, _ = reduce_to_cell(zk, lat)
                return zk
    raise NoConvergence(f"wp_inverse failed for w = {w}")


def elliptic_from_divisor(zeros, poles, inv: LatticeInvariants,
                          opt: EvalOptions | None = None):
    """Evaluator for the elliptic function with the given zeros and poles.

    The pole list is adjusted by the lattice vector omega = sum(poles) -
    sum(zeros) (moved onto the last pole), after which the sigma quotient
    is doubly periodic.  The returned callable is normalized only up to a
    multiplicative constant.

    Raises
    ------
    DivisorMismatch
        If the multisets have different sizes.
    NotPrincipal
        If sum(poles) - sum(zeros) is not a lattice vector (within
        1e-9 * scale).
    """
    zeros = [complex(a) for a in zeros]
    poles = [complex(b) for b in poles]
    if len(zeros) != len(poles):
        raise DivisorMismatch(
            f"{len(zeros)} zeros vs {len(poles)} poles")
    if not zeros:
        raise DivisorMismatch("empty divisor")
    lat = inv.lattice
    omega = sum(poles) - sum(zeros)
    omega_red, _, _ = reduce_to_cell(omega, lat)
    if abs(omega_red) > 1e-9 * lat.scale:
        raise NotPrincipal(
            f"zero/pole sums differ by {omega} which is off-lattice "
            f"by {abs(omega_red):.3e}")
    # exact lattice vector, then shift the last pole
    adj = poles[:-1] + [poles[-1] - (omega - omega_red) - omega_red]

    def evaluator(z):
        z_arr = np.asarray(z, dtype=complex)
        num = np.ones_like(z_arr)
        den = np.ones_like(z_arr)
        for a in zeros:
            num = num * sigma(z_arr - a, inv, opt)
        for b in adj:
            den = den * sigma(z_arr - b, inv, opt)
        out = num / den
        return complex(out) if np.ndim(z) == 0 else out

    return evaluator
