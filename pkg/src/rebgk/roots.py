"""Bracketed scalar root finding: Newton steps safeguarded by bisection."""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Callable


class RootFindingError(RuntimeError):
    pass


@dataclass(frozen=True)
class RootResult:
    root: float
    value: float
    iterations: int
    converged: bool


_EPS = sys.float_info.epsilon


def _sign(v):
    return (v > 0) - (v < 0)


def newton_bisect(
    func: Callable[[float], tuple[float, float]],
    lo: float,
    hi: float,
    x0: float | None = None,
    xtol_rel: float = 1e-14,
    maxiter: int = 200,
    f_lo: float | None = None,
    f_hi: float | None = None,
    ftol: float | None = None,
) -> RootResult:
    """Find a sign change of ``func`` inside ``[lo, hi]``.

    ``func(x)`` returns ``(f, dfdx)``; ``f`` may be +-inf and ``dfdx`` may be
    nan, in which case the step falls back to bisection. Endpoint values can
    be supplied when the caller already knows them (e.g. an open boundary
    where f is only defined as a limit). With ``ftol`` a step-size stop is
    only accepted once ``|f| <= ftol`` or the bracket is at machine resolution.
    """
    if not lo < hi:
        raise RootFindingError(f"empty bracket [{lo}, {hi}]")
    if f_lo is None:
        f_lo = func(lo)[0]
    if f_hi is None:
        f_hi = func(hi)[0]
    s_lo, s_hi = _sign(f_lo), _sign(f_hi)
    if s_lo == 0:
        return RootResult(lo, f_lo, 0, True)
    if s_hi == 0:
        return RootResult(hi, f_hi, 0, True)
    if s_lo == s_hi:
        raise RootFindingError(f"no sign change on [{lo:.6g}, {hi:.6g}] (f = {f_lo:.3g}, {f_hi:.3g})")

    x = 0.5 * (lo + hi) if x0 is None or not lo < x0 < hi else float(x0)
    dx_old = hi - lo
    dx = dx_old
    fx, dfx = func(x)
    for it in range(1, maxiter + 1):
        sx = _sign(fx)
        if sx == 0:
            return RootResult(x, fx, it, True)
        if sx == s_lo:
            lo = x
        else:
            hi = x
        newton_ok = (
            math.isfinite(fx)
            and math.isfinite(dfx)
            and dfx != 0.0
            and lo < x - fx / dfx < hi
            and abs(2.0 * fx) <= abs(dx_old * dfx)
        )
        dx_old = dx
        if newton_ok:
            dx = fx / dfx
            x_new = x - dx
        else:
            x_new = 0.5 * (lo + hi)
            dx = x - x_new
        scale = max(abs(x_new), 1e-300)
        x = x_new
        fx, dfx = func(x)
        if abs(dx) <= xtol_rel * scale or hi - lo <= xtol_rel * scale:
            if ftol is None or abs(fx) <= ftol or hi - lo <= 4 * _EPS * scale:
                return RootResult(x, fx, it, True)
    return RootResult(x, fx, maxiter, False)


def expand_increasing_bracket(g: Callable[[float], float], lo: float, hi: float, max_doublings: int = 200):
    """Widen ``[lo, hi]`` on (0, inf) by halving ``lo`` and doubling ``hi`` until an
    increasing ``g`` changes sign from negative to positive."""
    g_lo, g_hi = g(lo), g(hi)
    for _ in range(max_doublings):
        if g_lo < 0:
            break
        hi, g_hi = lo, g_lo
        lo *= 0.5
        g_lo = g(lo)
    for _ in range(max_doublings):
        if g_hi > 0:
            break
        lo, g_lo = hi, g_hi
        hi *= 2.0
        g_hi = g(hi)
    if not (g_lo < 0 < g_hi):
        raise RootFindingError(f"could not bracket a root: g({lo:.3g}) = {g_lo:.3g}, g({hi:.3g}) = {g_hi:.3g}")
    return lo, hi, g_lo, g_hi
