# %% [markdown]
# Case 1: each species starts as its own Juttner distribution with a
# different temperature, velocity and chemical potential. The run writes
# CSV output that any plotting tool can read.

# %%
import sys

import numpy as np

from rebgk.config import case1_config
from rebgk.output import run_config

out = sys.argv[1] if len(sys.argv) > 1 else "out/case1"
result = run_config(case1_config(), out)
print(f"wrote {out}: {len(result.series)} diagnostics rows")

# %% conserved quantities
for name in ("N13", "N14", "N24", "E", "P"):
    x = result.column(name)
    print(f"{name:>4}: {x[0]: .12f}  relative drift {np.max(np.abs(x - x[0])) / abs(x[0]):.1e}")

# %% entropy falls monotonically, distances to the attractor shrink
H = result.column("H")
print(f"H: {H[0]:.6f} -> {H[-1]:.6f}, largest step increase {np.max(np.diff(H)):.2e}")
for i in range(1, 5):
    d = result.column(f"d{i}")
    print(f"|f{i} - J{i}|_inf: {d[0]:.3e} -> {d[-1]:.3e}")
print("beta~ over time:", np.round(result.column("beta_tilde")[::20], 5))
