"""Nuttall sheet partition of a three-sheeted genus-1 cover of the sphere.

A branch triple (a1, a2, a3) is normalized by a Moebius map onto the cube
roots of unity, which turns the covering surface into the torus of the
hexagonal lattice (sqrt(3), sqrt(3) e^{i pi/3}).  The module evaluates the
uniformizing elliptic function pi, the real part u of the distinguished
abelian integral on the universal cover, the critical points of the
sheet-difference field, the threshold alpha separating the two sheet
topologies, and the partition of the plane into the three Nuttall sheets
with their boundary curves.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from skimage import measure

from .errors import (BranchPathCrossesSingularity, DegenerateTriangle,
                     NoConvergence, PoleHit, SingularPoint, ValidationError)
from .lattice import (LatticeInvariants, invariants, make_lattice,
                      reduce_to_cell, sigma, wp, zeta_w)
from .quadrature import integrate_segment

SQRT3 = math.sqrt(3.0)
RHO = complex(np.exp(2j * np.pi / 3))
Z1 = SQRT3 / 3.0
ROTATIONS = (1.0 + 0j, RHO, RHO.conjugate())

# z = C1 * int_0^w (w^3 - 1)^(-2/3) dw + z1 inverts the uniformizer on the
# fundamental triangle; the constant has the Gamma(1/3) closed form.
SC_CONSTANT = -2.0 * math.pi / math.gamma(1.0 / 3.0) ** 3

_SINGULAR_TOL = 1e-9
_BRANCH_CLEARANCE = 1e-6
_MAP_TOL = 1e-12


@functools.cache
def hexagonal_invariants() -> LatticeInvariants:
    """Weierstrass data of the fixed lattice (sqrt(3), sqrt(3) e^{i pi/3})."""
    inv = invariants(make_lattice(SQRT3, SQRT3 * np.exp(1j * np.pi / 3)))
    if abs(inv.eta1 - 2.0 * np.pi / 3.0) > 1e-10:
        raise ValidationError("hexagonal lattice eta_1 != 2 pi / 3")
    return inv


def _mobius_apply(mobius, z: complex) -> complex:
    a, b, c, d = mobius
    if z == math.inf:
        return a / c
    return (a * z + b) / (c * z + d)


@dataclass(frozen=True)
class TriangleConfig:
    """A branch triple normalized onto the cube roots of unity.

    The points are relabeled so that a1, a3, a2 run counterclockwise on
    their circumcircle; the Moebius map T then sends (a1, a2, a3) to
    (1, rho, conj(rho)) with rho = e^{2 pi i/3}, reversing the traversal of
    the circumcircle so the exterior lands inside the unit disk.  z0 = T(oo)
    is where the point at infinity of the branch plane ends up.
    """

    a1: complex
    a2: complex
    a3: complex
    gamma: complex
    z0: complex
    mobius: tuple

    def __post_init__(self):
        pts = (self.a1, self.a2, self.a3)
        scale = max(abs(p - q) for p in pts for q in pts)
        if scale == 0 or min(abs(self.a1 - self.a2), abs(self.a2 - self.a3),
                             abs(self.a3 - self.a1)) < 1e-13 * scale:
            raise DegenerateTriangle("branch points coincide")
        area = ((self.a3 - self.a1).conjugate() * (self.a2 - self.a1)).imag
        if abs(area) <= 1e-12 * scale ** 2:
            raise DegenerateTriangle("branch points are collinear")
        if area <= 0:
            raise ValidationError("a1, a3, a2 must run counterclockwise")
        for point, target in zip(pts, ROTATIONS):
            if abs(_mobius_apply(self.mobius, point) - target) > _MAP_TOL:
                raise ValidationError(
                    "mobius does not send the branch points to the cube "
                    "roots of unity")
        if not abs(self.z0) < 1:
            raise ValidationError("T(oo) must lie inside the unit disk")

    def map(self, z: complex) -> complex:
        """Apply the normalizing Moebius map T."""
        return _mobius_apply(self.mobius, z)


def _interpolating_mobius(sources, targets):
    """Matrix of the Moebius map sending three sources to three targets."""

    def to_zero_one_inf(p, q, r):
        # z -> cross ratio sending p -> 1, q -> 0, r -> oo
        k = (p - r) / (p - q)
        return np.array([[k, -k * q], [1.0, -r]], dtype=complex)

    m_src = to_zero_one_inf(*sources)
    m_tgt = to_zero_one_inf(*targets)
    adj = np.array([[m_tgt[1, 1], -m_tgt[0, 1]],
                    [-m_tgt[1, 0], m_tgt[0, 0]]], dtype=complex)
    mat = adj @ m_src
    return mat / mat.ravel()[np.argmax(np.abs(mat))]


def normalize_triangle(a1: complex, a2: complex, a3: complex) -> TriangleConfig:
    """Relabel a branch triple and build its normalizing Moebius map.

    Parameters
    ----------
    a1, a2, a3 : complex
        Pairwise distinct, non-collinear points in arbitrary order.

    Returns
    -------
    TriangleConfig
        Relabeled points with the map T, the ratio
        gamma = (a3 - a2)/(a3 - a1), and z0 = T(oo).

    Raises
    ------
    DegenerateTriangle
        If the points coincide or are collinear.
    """
    pts = tuple(complex(p) for p in (a1, a2, a3))
    scale = max(abs(p - q) for p in pts for q in pts)
    if scale == 0 or min(abs(pts[0] - pts[1]), abs(pts[1] - pts[2]),
                         abs(pts[2] - pts[0])) < 1e-13 * scale:
        raise DegenerateTriangle("branch points coincide")
    orientation = ((pts[1] - pts[0]).conjugate() * (pts[2] - pts[0])).imag
    if abs(orientation) <= 1e-12 * scale ** 2:
        raise DegenerateTriangle("branch points are collinear")
    if orientation > 0:  # p1 -> p2 -> p3 already counterclockwise
        b1, b3, b2 = pts
    else:
        b1, b2, b3 = pts
    mat = _interpolating_mobius((b1, b2, b3), ROTATIONS)
    mobius = (mat[0, 0], mat[0, 1], mat[1, 0], mat[1, 1])
    z0 = mat[0, 0] / mat[1, 0]
    gamma = (b3 - b2) / (b3 - b1)
    return TriangleConfig(a1=b1, a2=b2, a3=b3, gamma=gamma, z0=z0,
                          mobius=mobius)


@dataclass(frozen=True)
class NuttallContext:
    """A normalized configuration on the fixed hexagonal lattice.

    alpha is the point of the fundamental triangle whose uniformizer value
    is z0; its rotations alpha * e^{+-2 pi i/3} mark the two logarithmic
    sinks of the sheet potential u.  In the mirror-symmetric case alpha is
    real in (0, sqrt(3)/2).
    """

    alpha: complex
    inv: LatticeInvariants = field(default_factory=hexagonal_invariants,
                                   repr=False)

    def __post_init__(self):
        alpha = complex(self.alpha)
        if alpha.imag == 0:
            alpha = alpha.real
            if not 0 < alpha < SQRT3 / 2:
                raise ValidationError(
                    "real alpha must lie in (0, sqrt(3)/2)")
        z_red, _, _ = reduce_to_cell(np.array([alpha, (1 - RHO) * alpha]),
                                     self.inv.lattice)
        if np.abs(z_red).min() < _SINGULAR_TOL:
            raise ValidationError("alpha and its rotations must be "
                                  "distinct modulo the lattice")
        object.__setattr__(self, "alpha", alpha)


def make_context(alpha) -> NuttallContext:
    """Context for a given alpha on the hexagonal lattice."""
    return NuttallContext(alpha=alpha)


def uniformizer_pi(z, ctx: NuttallContext | None = None):
    """The degree-3 uniformizing elliptic function.

    pi(z) = -prod_k sigma(z - z1 rho^k) / prod_k sigma(z + z1 rho^k) with
    z1 = sqrt(3)/3 and rho = e^{2 pi i/3}; pi(0) = 1 and pi is genuinely
    periodic (its zeros and poles balance).

    Raises
    ------
    PoleHit
        If z is congruent to one of the poles -z1 rho^k.
    """
    inv = ctx.inv if ctx is not None else hexagonal_invariants()
    z = np.asarray(z, dtype=complex)
    num = np.ones_like(z)
    den = np.ones_like(z)
    for rot in ROTATIONS:
        red, _, _ = reduce_to_cell(z + Z1 * rot, inv.lattice)
        if np.abs(red).min() < _SINGULAR_TOL:
            raise PoleHit("z is congruent to a pole -z1 rho^k")
        num = num * sigma(z - Z1 * rot, inv)
        den = den * sigma(z + Z1 * rot, inv)
    result = -num / den
    return result if result.shape else complex(result)


def schwarz_christoffel_inverse(w: complex,
                                ctx: NuttallContext | None = None,
                                tol: float = 1e-12) -> complex:
    """Map a point of the unit disk into the fundamental triangle.

    Evaluates z = C1 * int_0^w (1 - s^3)^(-2/3) ds + z1 along the straight
    segment [0, w], with the principal branch (1 - s^3 has positive real
    part on the open unit disk).  Inverts uniformizer_pi there: w = 0 maps
    to z1 and w = 1 to 0.

    Raises
    ------
    BranchPathCrossesSingularity
        If the segment passes within 1e-6 of a cube root of unity.
    """
    w = complex(w)
    for root in ROTATIONS:
        if _point_segment_distance(root, 0j, w) < _BRANCH_CLEARANCE:
            raise BranchPathCrossesSingularity(
                "integration path passes through a cube root of unity")
    if w == 0:
        return complex(Z1)

    def integrand(s):
        return np.exp(-(2.0 / 3.0) * np.log(1.0 - s ** 3))

    return SC_CONSTANT * integrate_segment(integrand, 0j, w, tol) + Z1


def _point_segment_distance(p: complex, a: complex, b: complex) -> float:
    d = b - a
    if d == 0:
        return abs(p - a)
    t = min(1.0, max(0.0, ((p - a) / d).real))
    return abs(p - (a + t * d))


def _sink_offsets(alpha: complex):
    """u is singular at the rotations of alpha: a double logarithmic source
    at alpha itself and simple sinks at the other two rotations."""
    return (alpha, RHO * alpha, RHO.conjugate() * alpha)


def _u_raw(z, alpha: complex, inv: LatticeInvariants):
    source, sink1, sink2 = _sink_offsets(alpha)
    val = (-2.0 * np.log(np.abs(sigma(z - source, inv)))
           + np.log(np.abs(sigma(z - sink1, inv)))
           + np.log(np.abs(sigma(z - sink2, inv)))
           - SQRT3 * inv.eta1.real * (np.conj(alpha) * z).real)
    return val


def u_value(z, ctx: NuttallContext):
    """Real part of the abelian integral on the universal cover.

    u(z) = -2 ln|sigma(z - alpha)| + ln|sigma(z - rho alpha)|
           + ln|sigma(z - conj(rho) alpha)| - sqrt(3) eta_1 Re(conj(alpha) z)

    is doubly periodic and harmonic away from the rotations of alpha.

    Raises
    ------
    SingularPoint
        If z is congruent to a rotation of alpha.
    """
    z = np.asarray(z, dtype=complex)
    for offset in _sink_offsets(ctx.alpha):
        red, _, _ = reduce_to_cell(z - offset, ctx.inv.lattice)
        if np.abs(red).min() < _SINGULAR_TOL:
            raise SingularPoint("z is congruent to a rotation of alpha")
    val = _u_raw(z, ctx.alpha, ctx.inv)
    return val if val.shape else float(val)


def _require_symmetric_alpha(alpha) -> float:
    alpha = complex(alpha)
    if alpha.imag != 0:
        raise ValidationError("this analysis needs real alpha")
    if not 0 < alpha.real < SQRT3 / 2:
        raise ValidationError("alpha must lie in (0, sqrt(3)/2)")
    return alpha.real


def critical_points(alpha, ctx: NuttallContext | None = None,
                    tol: float = 1e-11):
    """Both zeros of the sheet-difference gradient in the fundamental cell.

    Solves zeta(z - conj(rho) alpha) - zeta(z - rho alpha) + i eta_1 alpha
    = 0 by Newton iteration from a 12 x 12 seed grid, deduplicated modulo
    the lattice.  There are exactly two zeros counting multiplicity: a
    conjugate pair off the real axis for alpha below the threshold, two
    real points above it, and a double real point at the threshold (the
    double point is returned twice).
    """
    alpha = _require_symmetric_alpha(alpha)
    inv = ctx.inv if ctx is not None else hexagonal_invariants()
    lat = inv.lattice
    sink1, sink2 = RHO * alpha, RHO.conjugate() * alpha
    shift = 1j * inv.eta1.real * alpha

    def f_and_fprime(z):
        w1, w2 = z - sink2, z - sink1
        return (zeta_w(w1, inv) - zeta_w(w2, inv) + shift,
                wp(w2, inv) - wp(w1, inv))

    roots = []
    for i in range(12):
        for j in range(12):
            z = ((i + 0.5) / 12) * lat.omega1 + ((j + 0.5) / 12) * lat.omega2
            converged = False
            for _ in range(80):
                red, _, _ = reduce_to_cell(
                    np.array([z - sink1, z - sink2]), lat)
                if np.abs(red).min() < 1e-8:
                    break
                value, slope = f_and_fprime(z)
                if abs(value) < tol:
                    converged = True
                    break
                if slope == 0 or not np.isfinite(slope):
                    break
                step = value / slope
                if abs(step) > SQRT3:  # diverging; abandon this seed
                    break
                z = z - step
            if converged:
                z_red, _, _ = reduce_to_cell(z, lat)
                roots.append(complex(z_red))
    unique = []
    for r in roots:
        if not any(_lattice_distance(r, s, lat) < 3e-6 for s in unique):
            unique.append(r)
    unique.sort(key=lambda r: (round(r.real, 8), round(r.imag, 8)))
    if not unique:
        return ()
    if len(unique) == 1:
        return (unique[0], unique[0])
    if len(unique) > 2:
        unique.sort(key=lambda r: abs(f_and_fprime(r)[0]))
        unique = sorted(unique[:2],
                        key=lambda r: (round(r.real, 8), round(r.imag, 8)))
    return tuple(unique)


def _lattice_distance(p: complex, q: complex, lat) -> float:
    red, _, _ = reduce_to_cell(np.asarray(p - q), lat)
    return float(abs(red))


def psi(alpha, ctx: NuttallContext | None = None) -> float:
    """Sheet-difference slope indicator at the symmetry point.

    psi(alpha) = Im zeta((sqrt(3)/2)(1 - i alpha)) - (eta_1 / 2) alpha;
    its unique positive zero separates configurations with no real
    critical points from those with two.
    """
    alpha = complex(alpha)
    if alpha.imag != 0:
        raise ValidationError("this analysis needs real alpha")
    alpha = alpha.real
    if not 0 <= alpha <= SQRT3 / 2:
        raise ValidationError("alpha must lie in [0, sqrt(3)/2]")
    inv = ctx.inv if ctx is not None else hexagonal_invariants()
    value = zeta_w((SQRT3 / 2.0) * (1.0 - 1j * alpha), inv)
    return float(value.imag - (inv.eta1.real / 2.0) * alpha)


def psi_root(ctx: NuttallContext | None = None, tol: float = 1e-12) -> float:
    """The unique zero of psi in (0, sqrt(3)/2], by bisection.

    psi also vanishes at alpha = 0, so the bracket starts at 0.05, inside
    the initial rising stretch.
    """
    lo, hi = 0.05, SQRT3 / 2.0
    flo, fhi = psi(lo, ctx), psi(hi, ctx)
    if not (flo > 0 > fhi):
        raise NoConvergence("psi does not change sign on [0.05, sqrt(3)/2]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if psi(mid, ctx) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SheetField:
    """Grid classification of the plane into the three Nuttall sheets.

    labels[i, j] is the rank of u(z) among the triple
    (u(z), u(z rho), u(z conj(rho))) at z = xs[j] + i ys[i]: rank 0 marks
    S_0 (u maximal there), rank 2 marks S_2.  contours maps each pair
    (j, k) to the polylines where u(z rho^j) = u(z rho^k).
    """

    bounds: tuple
    xs: np.ndarray
    ys: np.ndarray
    labels: np.ndarray
    contours: dict


DEFAULT_BOUNDS = ((-SQRT3, SQRT3), (-1.5, 3.0))


def _rotation_fields(ctx: NuttallContext, grid: np.ndarray, nudge: complex):
    """u on the grid and its two rotations, nudging singular nodes."""
    offsets = _sink_offsets(ctx.alpha)
    work = grid.copy()
    for rot in ROTATIONS:
        for offset in offsets:
            red, _, _ = reduce_to_cell(work * rot - offset, ctx.inv.lattice)
            near = np.abs(red) < _SINGULAR_TOL
            if near.any():
                work[near] += nudge
    return tuple(_u_raw(work * rot, ctx.alpha, ctx.inv) for rot in ROTATIONS)


def classify_sheets(ctx: NuttallContext, bounds=DEFAULT_BOUNDS,
                    resolution: int = 800) -> SheetField:
    """Label every grid node by its sheet and extract the boundary curves.

    Parameters
    ----------
    ctx : NuttallContext
    bounds : ((xmin, xmax), (ymin, ymax))
        Sampling rectangle, default (-sqrt(3), sqrt(3)) x (-1.5, 3.0).
    resolution : int or (nx, ny)
        Nodes per axis.

    Returns
    -------
    SheetField
        labels in {0, 1, 2} per node and marching-squares polylines for
        each difference field u_j - u_k, (j, k) in {(0,1), (0,2), (1,2)}.
    """
    (xmin, xmax), (ymin, ymax) = bounds
    if np.isscalar(resolution):
        nx = ny = int(resolution)
    else:
        nx, ny = (int(r) for r in resolution)
    if nx < 2 or ny < 2:
        raise ValidationError("resolution must be at least 2 per axis")
    xs = np.linspace(xmin, xmax, nx)
    ys = np.linspace(ymin, ymax, ny)
    dx, dy = xs[1] - xs[0], ys[1] - ys[0]
    grid = xs[None, :] + 1j * ys[:, None]
    u0, u1, u2 = _rotation_fields(ctx, grid, 0.5 * (dx + 1j * dy))

    labels = ((u1 > u0).astype(np.int8) + (u2 > u0).astype(np.int8))
    contours = {}
    for (j, k), diff in (((0, 1), u0 - u1), ((0, 2), u0 - u2),
                         ((1, 2), u1 - u2)):
        polylines = []
        for curve in measure.find_contours(diff, 0.0):
            rows, cols = curve[:, 0], curve[:, 1]
            polylines.append((xs[0] + cols * dx) + 1j * (ys[0] + rows * dy))
        contours[(j, k)] = tuple(polylines)
    return SheetField(bounds=(float(xmin), float(xmax), float(ymin),
                              float(ymax)),
                      xs=xs, ys=ys, labels=labels, contours=contours)


# Distinct sheet components can meet at isolated points (transversal
# crossings and triple points of the boundary curves), where the deciding
# rank gap vanishes quadratically.  Nodes straddling such a point would
# thread a one-pixel bridge between the components, so nodes whose rank
# margin is below _RANK_MARGIN are excluded from the component masks; the
# excluded band is sub-pixel wide along regular boundary arcs but covers a
# couple of pixels around each meeting point.  Leftover fragments below
# _MIN_COMPONENT_PIXELS (slivers pinched off near those points) are dropped.
_RANK_MARGIN = 1e-4
_MIN_COMPONENT_PIXELS = 8


def sheet_component_counts(ctx: NuttallContext,
                           resolution: int = 400) -> tuple:
    """Connected components of each sheet on the period torus.

    Samples one fundamental cell on a resolution^2 grid in lattice
    coordinates, labels 4-connected components of each sheet, and merges
    components across the periodic edges, so the counts are per fundamental
    domain of the lattice.  Nodes too close to a sheet boundary (rank margin
    below _RANK_MARGIN) are left out of the masks, and components smaller
    than _MIN_COMPONENT_PIXELS nodes are ignored, which keeps the counts
    stable against grid artifacts where components meet at a point.
    """
    inv = ctx.inv
    lat = inv.lattice
    n = int(resolution)
    frac = (np.arange(n) + 0.5) / n
    grid = frac[None, :] * lat.omega1 + frac[:, None] * lat.omega2
    dstep = (lat.omega1 + lat.omega2) / (2.0 * n)
    u0, u1, u2 = _rotation_fields(ctx, grid, dstep)
    labels = ((u1 > u0).astype(np.int8) + (u2 > u0).astype(np.int8))
    upper = np.maximum(u1, u2)
    lower = np.minimum(u1, u2)
    margin = np.where(labels == 0, u0 - upper,
                      np.where(labels == 2, lower - u0,
                               np.minimum(upper - u0, u0 - lower)))

    counts = []
    for sheet in (0, 1, 2):
        mask = (labels == sheet) & (margin > _RANK_MARGIN)
        comp = measure.label(mask, connectivity=1)
        parent = {}

        def find(x):
            while parent.get(x, x) != x:
                parent[x] = parent.get(parent[x], parent[x])
                x = parent[x]
            return x

        def union(x, y):
            rx, ry = find(x), find(y)
            if rx != ry:
                parent[rx] = ry

        for i in range(n):
            if mask[i, 0] and mask[i, -1]:
                union(comp[i, 0], comp[i, -1])
            if mask[0, i] and mask[-1, i]:
                union(comp[0, i], comp[-1, i])
        sizes = {}
        for c, count in zip(*np.unique(comp[comp > 0], return_counts=True)):
            root = find(c)
            sizes[root] = sizes.get(root, 0) + int(count)
        counts.append(sum(1 for s in sizes.values()
                          if s >= _MIN_COMPONENT_PIXELS))
    return tuple(counts)
