"""Closed-form derivatives of zeta, log sigma and the p-function with
respect to the periods, at fixed argument z.

Each derivative is a polynomial in (wp, wp', zeta, z) with coefficients
built from the opposite period, the opposite eta constant and g2, divided
by 2*pi*i.  The two period directions differ by swapping the (omega, eta)
pair and an overall sign.  Useful checks: the Euler homogeneity relations

    z * (-wp)  + omega1 * d1(zeta)      + omega2 * d2(zeta)      = -zeta,
    z * zeta   + omega1 * d1(log sigma) + omega2 * d2(log sigma) = 1,
    z * wp'    + omega1 * d1(wp)        + omega2 * d2(wp)        = -2 * wp,

which all follow from the degree -1, 0, -2 homogeneity of the three
functions under lattice scaling.
"""
from __future__ import annotations

import math

import numpy as np

from .lattice import EvalOptions, LatticeInvariants, wp, wp_prime, zeta_w

_TWO_PI_I = 2j * math.pi


def _pair(inv: LatticeInvariants, which: int):
    """(opposite period, opposite eta, sign) for d/d omega_which."""
    if which == 1:
        return inv.lattice.omega2, inv.eta2, 1.0
    if which == 2:
        return inv.lattice.omega1, inv.eta1, -1.0
    raise ValueError(f"which must be 1 or 2, got {which!r}")


def dzeta_domega(z, inv: LatticeInvariants, which: int,
                 opt: EvalOptions | None = None):
    """d zeta(z; omega1, omega2) / d omega_which at fixed z."""
    om, eta, sgn = _pair(inv, which)
    z_arr = np.asarray(z, dtype=complex)
    p = wp(z_arr, inv, opt)
    pp = wp_prime(z_arr, inv, opt)
    zt = zeta_w(z_arr, inv, opt)
    val = sgn * (0.5 * om * pp + (om * zt - eta * z_arr) * p
                 + eta * zt - om * inv.g2 / 12.0 * z_arr) / _TWO_PI_I
    return complex(val) if np.ndim(z) == 0 else val


def dlnsigma_domega(z, inv: LatticeInvariants, which: int,
                    opt: EvalOptions | None = None):
    """d log sigma(z; omega1, omega2) / d omega_which at fixed z."""
    om, eta, sgn = _pair(inv, which)
    z_arr = np.asarray(z, dtype=complex)
    p = wp(z_arr, inv, opt)
    zt = zeta_w(z_arr, inv, opt)
    val = sgn * (0.5 * om * (p - zt * zt) + eta * (z_arr * zt - 1.0)
                 - om * inv.g2 / 24.0 * z_arr ** 2) / _TWO_PI_I
    return complex(val) if np.ndim(z) == 0 else val


def dwp_domega(z, inv: LatticeInvariants, which: int,
               opt: EvalOptions | None = None):
    """d wp(z; omega1, omega2) / d omega_which at fixed z."""
    om, eta, sgn = _pair(inv, which)
    z_arr = np.asarray(z, dtype=complex)
    p = wp(z_arr, inv, opt)
    pp = wp_prime(z_arr, inv, opt)
    zt = zeta_w(z_arr, inv, opt)
    val = -sgn * (2.0 * om * p * p - 2.0 * eta * p
                  + (om * zt - eta * z_arr) * pp
                  - om * inv.g2 / 3.0) / _TWO_PI_I
    return complex(val) if np.ndim(z) == 0 else val
