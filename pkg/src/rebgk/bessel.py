"""Modified Bessel functions of the second kind, orders 0, 1, 2.

Values come from the Cephes-based routines in :mod:`scipy.special`. The
exponentially scaled forms ``exp(z) K_n(z)`` stay finite far past the point
where ``K_n`` itself underflows, so every moment functional downstream is
assembled from them in log space.
"""
from __future__ import annotations

import numpy as np
from scipy import special

ORDERS = (0, 1, 2)


class BesselDomainError(ValueError):
    pass


class BesselUnderflowError(ArithmeticError):
    pass


def _check(order, z):
    if order not in ORDERS:
        raise BesselDomainError(f"order must be one of {ORDERS}, got {order!r}")
    z = np.asarray(z, dtype=float)
    if np.any(~np.isfinite(z)) or np.any(z <= 0):
        raise BesselDomainError("argument must be finite and strictly positive")
    return z


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def besselK_scaled(order, z):
    """exp(z) * K_order(z)."""
    z = _check(order, z)
    if order == 0:
        out = special.k0e(z)
    elif order == 1:
        out = special.k1e(z)
    else:
        out = special.kve(2, z)
    return _scalar(out)


def besselK(order, z, scaled=False):
    """K_order(z) for z > 0.

    With ``scaled=True`` this is ``exp(z) K_order(z)``. Unscaled evaluation
    raises :class:`BesselUnderflowError` once the result is no longer a
    normal double.
    """
    if scaled:
        return besselK_scaled(order, z)
    z = _check(order, z)
    val = np.asarray(besselK_scaled(order, z)) * np.exp(-z)
    if np.any(val < np.finfo(float).tiny):
        raise BesselUnderflowError(
            f"K_{order}(z) underflows for z up to {np.max(z):g}; use scaled=True or log_besselK"
        )
    return _scalar(val)


def log_besselK(order, z):
    """ln K_order(z), finite for any z > 0."""
    z = _check(order, z)
    return _scalar(np.log(np.asarray(besselK_scaled(order, z))) - z)


def ratio_K0_K1(z):
    """K0(z) / K1(z); increases from 0 (z -> 0) to 1 (z -> inf)."""
    return _scalar(np.asarray(besselK_scaled(0, z)) / besselK_scaled(1, z))


def ratio_K1_K0(z):
    return _scalar(np.asarray(besselK_scaled(1, z)) / besselK_scaled(0, z))


def d_ratio_K0_K1(z):
    """Derivative of K0/K1, from K0' = -K1 and K1' = -K0 - K1/z."""
    z = np.asarray(z, dtype=float)
    r = np.asarray(ratio_K0_K1(z))
    return _scalar(r * r + r / z - 1.0)


def d_ratio_K1_K0(z):
    z = np.asarray(z, dtype=float)
    q = np.asarray(ratio_K1_K0(z))
    return _scalar(q * q - q / z - 1.0)
