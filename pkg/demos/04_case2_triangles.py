# %% [markdown]
# Case 2: compactly supported triangular data, far from any equilibrium.
# Regions where f vanishes fill in at the rate nu_i / p0.

# %%
import sys

import numpy as np

from rebgk.config import case2_config
from rebgk.moments import quad
from rebgk.output import run_config
from rebgk.scenarios import build_grid, init_case2

cfg = case2_config()
grid = build_grid(cfg)
f0 = init_case2(cfg, grid).f
print("initial particle numbers:", quad(grid, f0))

# %%
out = sys.argv[1] if len(sys.argv) > 1 else "out/case2"
result = run_config(cfg, out)
final = result.series[-1]
print(f"t = {final.t:g}: beta~ = {final.beta:.6f}, U~ = {np.round(final.U, 6)}")
print("mu~ =", np.round(final.mu, 6))

# %% the slowest species relaxes where nu_i / p0 is smallest
for i, s in enumerate(cfg.species, start=1):
    d = result.column(f"d{i}")
    print(f"species {i} (nu = {s.rate:g}, m = {s.mass:g}): |f - J|_inf {d[0]:.3e} -> {d[-1]:.3e}")

H = result.column("H")
print(f"H: {H[0]:.6f} -> {H[-1]:.6f}")
