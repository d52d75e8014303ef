# %% [markdown]
# # Watching the outer iterations
#
# A 100-row Boston subsample, embedded in three dimensions.  Each outer
# step solves a surrogate problem and the objective climbs.

# %%
import numpy as np
import pandas as pd

from discomax import SolverConfig, discomax
from discomax.cli import bundled_dataset

df = pd.read_csv(bundled_dataset("boston"))
X, y = df.iloc[:, :-1].to_numpy(float), df["MEDV"].to_numpy(float)
idx = np.random.default_rng(0).permutation(len(y))[:100]
X = (X[idx] - X[idx].mean(0)) / X[idx].std(0)
y = (y[idx] - y[idx].min()) / np.ptp(y[idx])

# %%
res = discomax(X, y, SolverConfig(dim=3, max_outer=10))
print(f"stop reason: {res.trace.stop_reason}")
print(f"{'k':>3} {'f':>8} {'dcorr XZ':>9} {'dcorr Zy':>9} {'alpha*':>10} {'inner':>6}")
for r in res.trace.records:
    print(f"{r.k:3d} {r.f:8.4f} {r.dcorr2_XZ:9.4f} {r.dcorr2_Zy:9.4f} "
          f"{r.alpha_star:10.3e} {r.inner_iters:6d}")

# %% [markdown]
# The trace chain along the way.  The middle term is the new iterate
# measured in the old Laplacian; it does not always sit between the
# other two.

# %%
for r in res.trace.records[1:]:
    ok = r.trace_next <= r.trace_cross + 1e-8 <= r.trace_prev + 2e-8
    print(f"k={r.k:2d}  {r.trace_next:12.4f} {r.trace_cross:8.4f} {r.trace_prev:8.4f}  "
          f"{'holds' if ok else 'broken'}")

# %% [markdown]
# Saving the trace for plotting elsewhere.

# %%
res.trace.write("/tmp/boston_trace.csv")
print(open("/tmp/boston_trace.csv").read().splitlines()[0])
