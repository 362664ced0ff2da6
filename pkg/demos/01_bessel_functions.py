# %% [markdown]
# Modified Bessel functions K0, K1, K2 and the Juttner moment functionals
# built from them. The library path uses scipy's scaled routines; the
# reference path integrates the defining integrals with mpmath.

# %%
import numpy as np

from rebgk import bessel, moments
from rebgk.oracles import besselK_quadrature, juttner_quadrature

# %% a small table against the quadrature reference
print(f"{'z':>8} {'K0':>22} {'K1':>22} {'K2':>22}  max rel. diff")
for z in (1e-3, 0.1, 1.0, 10.0, 100.0):
    K = [bessel.besselK(n, z) for n in (0, 1, 2)]
    Q = [besselK_quadrature(n, z) for n in (0, 1, 2)]
    diff = max(abs(k - q) / q for k, q in zip(K, Q))
    print(f"{z:8g} {K[0]:22.15e} {K[1]:22.15e} {K[2]:22.15e}  {diff:.1e}")

# %% K_n itself underflows near z = 700; the scaled and log forms do not
z = 2000.0
print("exp(z) K1(z) at z = 2000:", bessel.besselK_scaled(1, z))
print("ln K1(2000):", bessel.log_besselK(1, z))
try:
    bessel.besselK(1, z)
except bessel.BesselUnderflowError as exc:
    print("unscaled:", exc)

# %% M / Mt is the mean energy per particle seen through the dp/p0 measure
for dim in (1, 3):
    jm = moments.juttner_M(1.0, 2.0, dimension=dim)
    q = juttner_quadrature(1.0, 2.0, dimension=dim, kind="Mt")
    print(f"{dim}-D  M = {jm.M:.12f}  Mt = {jm.Mt:.12f} (quadrature {q:.12f})  M/Mt = {jm.ratio:.6f}")

# %% heavy-particle limit: the ratio falls towards c m as z grows
betas = np.logspace(-2, 3, 6)
print("beta      1-D ratio / m   3-D ratio / m")
for b in betas:
    print(f"{b:8.2e}  {moments.ratio(b, 2.0) / 2:12.6f}  {moments.ratio(b, 2.0, dimension=3) / 2:12.6f}")
