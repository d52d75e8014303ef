# %% [markdown]
# # Embedding new rows
#
# The learned embedding has no formula, so kernel ridge maps carry test
# rows into it and then on to the response.  A linear toy problem makes
# the target easy to check.

# %%
import numpy as np

from discomax import SolverConfig
from discomax.pipeline import fit_embedding_model, predict, rms

rng = np.random.default_rng(0)
n, p = 200, 5
X = rng.standard_normal((n, p))
y = 2 * X[:, 0] + 0.01 * rng.standard_normal(n)
train, test = np.arange(160), np.arange(160, 200)

# %%
model = fit_embedding_model(X[train], y[train], SolverConfig(dim=2))
last = model.trace.records[-1]
print(f"outer steps {last.k}, dCorr^2(Z, y) on training rows {last.dcorr2_Zy:.4f}")

# %%
y_hat = predict(model, X[test])
scaled = rms(model.predict_scaled(X[test]), model.y_scaler.apply(y[test]))
print(f"held-out RMS: {rms(y_hat, y[test]):.4f} raw, {scaled:.4f} scaled")

# %% [markdown]
# How well does the out-of-sample map reproduce the training embedding?

# %%
Z_fit = model.z_scaler.apply(model.Z_train)
Z_map = model.embed(X[train])
print(f"in-sample embedding RMS {rms(Z_fit, Z_map):.4f}")
