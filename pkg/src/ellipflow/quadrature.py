"""Adaptive Gauss-Legendre quadrature along polylines in the complex
plane, plus waypoint routing that keeps contours clear of known
singularities.

Each segment is integrated with a 32-point Gauss-Legendre rule and
compared against the two-half refinement; halving recurses until the
difference is below the local tolerance budget or the depth cap trips.
"""
from __future__ import annotations

import numpy as np

from .errors import ContourBlocked, NoConvergence

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(32)
_MAX_DEPTH = 24


def _gauss_segment(f, z0: complex, z1: complex) -> complex:
    mid = 0.5 * (z0 + z1)
    half = 0.5 * (z1 - z0)
    vals = f(mid + half * _NODES)
    return half * np.sum(_WEIGHTS * vals)


def integrate_segment(f, z0: complex, z1: complex, tol: float = 1e-10) -> complex:
    """Integral of ``f`` along the straight segment [z0, z1].

    ``f`` must accept a complex numpy array.  Raises NoConvergence if the
    recursive refinement still disagrees at depth 24.
    """
    def recurse(a, b, whole, depth):
        m = 0.5 * (a + b)
        left = _gauss_segment(f, a, m)
        right = _gauss_segment(f, m, b)
        if abs(left + right - whole) <= tol:
            return left + right
        if depth >= _MAX_DEPTH:
            raise NoConvergence(
                f"quadrature refinement stalled on [{a}, {b}]")
        half_tol = tol  # the Gauss error shrinks much faster than the budget
        return (recurse(a, m, left, depth + 1)
                + recurse(m, b, right, depth + 1))

    return recurse(z0, z1, _gauss_segment(f, z0, z1), 0)


def integrate_polyline(f, points, tol: float = 1e-10) -> complex:
    """Integral of ``f`` along consecutive segments of ``points``."""
    pts = [complex(p) for p in points]
    total = 0j
    budget = tol / max(1, len(pts) - 1)
    for a, b in zip(pts[:-1], pts[1:]):
        if a != b:
            total += integrate_segment(f, a, b, budget)
    return total


def _seg_point_dist(a: complex, b: complex, p: complex) -> tuple[float, float]:
    """(distance, parameter in [0,1]) from point p to segment [a, b]."""
    d = b - a
    L2 = abs(d) ** 2
    if L2 == 0:
        return abs(p - a), 0.0
    s = ((p - a).conjugate() * d).real / L2
    s = min(1.0, max(0.0, s))
    return abs(a + s * d - p), s


def route_polyline(start: complex, end: complex, obstacles,
                   clearance: float, max_inserts: int = 24) -> list[complex]:
    """Waypoints from start to end keeping every obstacle at ``clearance``.

    Detour points are placed on the perpendicular through the closest
    approach, on the side away from the obstacle.  Raises ContourBlocked
    if an endpoint is itself within clearance of an obstacle or the
    insertion budget runs out.
    """
    obs = [complex(o) for o in obstacles]
    for p in (start, end):
        for o in obs:
            if abs(p - o) < 0.99 * clearance:
                raise ContourBlocked(
                    f"contour endpoint {p} lies within clearance of {o}")
    pts = [complex(start), complex(end)]
    for _ in range(max_inserts):
        worst = None  # (violation, seg_index, obstacle, s)
        for i in range(len(pts) - 1):
            for o in obs:
                d, s = _seg_point_dist(pts[i], pts[i + 1], o)
                if d < clearance and 0.0 < s < 1.0:
                    gap = clearance - d
                    if worst is None or gap > worst[0]:
                        worst = (gap, i, o, s)
        if worst is None:
            return pts
        _, i, o, s = worst
        a, b = pts[i], pts[i + 1]
        foot = a + s * (b - a)
        away = foot - o
        if abs(away) < 1e-14 * max(1.0, abs(b - a)):
            # segment passes through the obstacle; deterministic side
            away = 1j * (b - a) / abs(b - a)
        else:
            away = away / abs(away)
        pts.insert(i + 1, o + 2.0 * clearance * away)
    raise ContourBlocked(
        f"could not route from {start} to {end} around {len(obs)} obstacles")
