"""Adaptive embedded Runge-Kutta integration for complex ODE systems.

The scheme is the Dormand-Prince 5(4) pair with the first-same-as-last
stage reuse, a proportional-integral step controller, and cubic Hermite
interpolation for values at user checkpoints.  State vectors are complex
numpy arrays; the error norm is the scaled RMS over components with
componentwise scale abs_tol + rel_tol * max(|y|, |y_new|).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MaxStepsExceeded, RhsFailure, StepUnderflow

# Dormand-Prince 5(4) tableau; row 7 equals the 5th-order weights (FSAL).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                187 / 2100, 1 / 40])
_E = _B5 - _B4

_SAFETY = 0.9
_ALPHA = 0.14          # proportional exponent of the PI controller
_BETA = 0.08           # integral exponent
_FACTOR_MIN = 0.2
_FACTOR_MAX = 5.0


@dataclass
class IntegratorConfig:
    """Tolerances and limits for :func:`integrate`."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    initial_step: float = 1e-3
    max_steps: int = 10 ** 6


@dataclass(frozen=True)
class TargetPath:
    """Affine path t -> start + t * delta on [0, 1]."""

    start: complex
    delta: complex

    def value(self, t: float) -> complex:
        return self.start + t * self.delta

    def rate(self, t: float) -> complex:
        return self.delta


@dataclass
class Trajectory:
    """Accepted steps plus interpolated checkpoint states."""

    ts: np.ndarray
    ys: np.ndarray                    # shape (len(ts), dim)
    checkpoint_ts: np.ndarray
    checkpoint_ys: np.ndarray         # shape (len(checkpoint_ts), dim)
    n_accepted: int = 0
    n_rejected: int = 0
    n_rhs: int = 0

    @property
    def endpoint(self) -> np.ndarray:
        return self.ys[-1]


def _call_rhs(rhs, t, y, counter):
    f = np.asarray(rhs(t, y), dtype=complex)
    counter[0] += 1
    if not np.all(np.isfinite(f.view(float))):
        raise RhsFailure(f"right-hand side returned a non-finite value at t = {t}")
    return f


def _hermite(t, t0, y0, f0, t1, y1, f1):
    """Cubic Hermite interpolant on [t0, t1]."""
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def integrate(rhs, t0: float, t1: float, y0, config: IntegratorConfig | None = None,
              checkpoints=(), step_hook=None) -> Trajectory:
    """Integrate y' = rhs(t, y) from t0 to t1 (t1 > t0).

    Parameters
    ----------
    rhs : callable
        ``rhs(t, y) -> array``.  Exceptions raised inside propagate
        unchanged; non-finite return values raise RhsFailure.
    checkpoints : sequence of float
        Times in [t0, t1] at which interpolated states are recorded.
    step_hook : callable, optional
        ``step_hook(t, y) -> y_new or None``, called after every accepted
        step; a returned array replaces the state (used for constraint
        re-centering).

    Raises
    ------
    StepUnderflow
        If the controller drives the step below 16 * eps * time scale.
    MaxStepsExceeded
        If more than ``config.max_steps`` steps are attempted.
    RhsFailure
        If the right-hand side produces NaN or infinity.
    """
    config = config or IntegratorConfig()
    if not t1 > t0:
        raise ValueError("integrate requires t1 > t0")
    y = np.atleast_1d(np.asarray(y0, dtype=complex)).copy()
    cps = np.sort(np.asarray(checkpoints, dtype=float))
    if np.any(cps < t0 - 1e-12) or np.any(cps > t1 + 1e-12):
        raise ValueError("checkpoints must lie in [t0, t1]")
    cp_ys = np.empty((len(cps), len(y)), dtype=complex)
    cp_next = 0
    # checkpoints at exactly t0
    while cp_next < len(cps) and cps[cp_next] <= t0:
        cp_ys[cp_next] = y
        cp_next += 1

    counter = [0]
    t = t0
    f = _call_rhs(rhs, t, y, counter)
    h = min(config.initial_step, t1 - t0)
    err_prev = 1.0
    ts_out = [t0]
    ys_out = [y.copy()]
    n_acc = n_rej = 0
    tiny = 16.0 * np.finfo(float).eps * max(abs(t0), abs(t1), t1 - t0)

    for _ in range(config.max_steps):
        if t >= t1:
            break
        h = min(h, t1 - t)
        if h < tiny:
            raise StepUnderflow(f"step size {h:.3e} underflowed at t = {t:.6f}")

        k = np.empty((7, len(y)), dtype=complex)
        k[0] = f
        for i in range(1, 7):
            yi = y + h * (_A[i] @ k[:i])
            k[i] = _call_rhs(rhs, t + _C[i] * h, yi, counter)
        y_new = y + h * (_B5 @ k)
        err_vec = h * (_E @ k)
        scale = config.abs_tol + config.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean(np.abs(err_vec / scale) ** 2)))

        if not np.isfinite(err):
            err = 10.0  # force rejection on overflow inside a trial step
        if err <= 1.0:
            t_new = t + h
            f_new = k[6]  # FSAL: already evaluated at (t_new, y_new)
            while cp_next < len(cps) and cps[cp_next] <= t_new + 1e-15:
                cp_ys[cp_next] = _hermite(min(cps[cp_next], t_new),
                                          t, y, k[0], t_new, y_new, f_new)
                cp_next += 1
            if step_hook is not None:
                adjusted = step_hook(t_new, y_new)
                if adjusted is not None:
                    y_new = np.asarray(adjusted, dtype=complex)
                    f_new = _call_rhs(rhs, t_new, y_new, counter)
            t, y, f = t_new, y_new, f_new
            ts_out.append(t)
            ys_out.append(y.copy())
            n_acc += 1
            factor = _SAFETY * err ** (-_ALPHA) * err_prev ** _BETA if err > 0 \
                else _FACTOR_MAX
            err_prev = max(err, 1e-10)
            h *= min(_FACTOR_MAX, max(_FACTOR_MIN, factor))
        else:
            n_rej += 1
            h *= max(_FACTOR_MIN, _SAFETY * err ** (-_ALPHA))
    else:
        raise MaxStepsExceeded(f"no convergence within {config.max_steps} steps")

    return Trajectory(
        ts=np.array(ts_out), ys=np.array(ys_out),
        checkpoint_ts=cps, checkpoint_ys=cp_ys,
        n_accepted=n_acc, n_rejected=n_rej, n_rhs=counter[0])


def rk_step_fixed(rhs, t: float, y, h: float):
    """One fixed 5th-order step (no error control); used by order tests."""
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    counter = [0]
    k = np.empty((7, len(y)), dtype=complex)
    k[0] = _call_rhs(rhs, t, y, counter)
    for i in range(1, 7):
        yi = y + h * (_A[i] @ k[:i])
        k[i] = _call_rhs(rhs, t + _C[i] * h, yi, counter)
    return y + h * (_B5 @ k)
