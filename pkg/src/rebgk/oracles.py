"""Independent quadrature references for the closed-form Bessel paths.

Nothing here touches :mod:`scipy.special`; everything is direct numerical
integration with :mod:`mpmath`, used by the test suite and ``rebgk validate``.
"""
from __future__ import annotations

import mpmath as mp

_DPS = 17

# K_n(z) = int_0^inf w_n(r) exp(-z sqrt(1 + r^2)) dr
_WEIGHTS = {
    0: lambda r: 1 / mp.sqrt(1 + r * r),
    1: lambda r: mp.mpf(1),
    2: lambda r: (2 * r * r + 1) / mp.sqrt(1 + r * r),
}


def besselK_quadrature(order: int, z: float, scaled: bool = False) -> float:
    """K_order(z) from its integral representation.

    Integrated in t with r = sinh(t), on uniform panels out to where the
    integrand has decayed by e^-80 relative to its peak. With ``scaled`` the
    result is exp(z) K_order(z).
    """
    if order not in _WEIGHTS:
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    if not z > 0:
        raise ValueError(f"z must be positive, got {z}")
    with mp.workdps(_DPS):
        z = mp.mpf(z)
        w = _WEIGHTS[order]

        def integrand(t):
            r = mp.sinh(t)
            return w(r) * mp.cosh(t) * mp.exp(-z * (mp.cosh(t) - 1))

        t_max = mp.acosh(1 + mp.mpf(80) / z)
        val = mp.quad(integrand, mp.linspace(0, t_max, 6), method="gauss-legendre")
        return float(val if scaled else val * mp.exp(-z))


def juttner_quadrature(beta: float, mass: float, c: float = 1.0, dimension: int = 1, kind: str = "M") -> float:
    """int exp(-c beta p0) dp (kind "M") or the same with dp/p0 (kind "Mt"), by direct quadrature."""
    with mp.workdps(_DPS):
        beta, mass, c = mp.mpf(beta), mp.mpf(mass), mp.mpf(c)
        mc = mass * c
        z = mc * c * beta
        scale = mp.exp(-z)

        def p0(p):
            return mp.sqrt(mc * mc + p * p)

        if kind == "M":
            kernel = lambda p: 1
        elif kind == "Mt":
            kernel = lambda p: 1 / p0(p)
        else:
            raise ValueError(f"kind must be 'M' or 'Mt', got {kind!r}")
        # exp(-c beta (p0 - m c)) has decayed by e^-80 beyond p_max
        e_max = mc + mp.mpf(80) / (c * beta)
        p_max = mp.sqrt(e_max**2 - mc * mc)
        panels = mp.linspace(0, p_max, 16)
        if dimension == 1:
            val = 2 * mp.quad(lambda p: kernel(p) * mp.exp(-c * beta * (p0(p) - mc)), panels)
        elif dimension == 3:
            val = 4 * mp.pi * mp.quad(lambda p: p * p * kernel(p) * mp.exp(-c * beta * (p0(p) - mc)), panels)
        else:
            raise ValueError(f"dimension must be 1 or 3, got {dimension}")
        return float(val * scale)
