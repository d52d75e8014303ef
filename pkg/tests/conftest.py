import numpy as np
import pandas as pd
import pytest

from discomax.cli import bundled_dataset


@pytest.fixture(scope="session")
def boston():
    df = pd.read_csv(bundled_dataset("boston"))
    return df.iloc[:, :-1].to_numpy(float), df.iloc[:, -1].to_numpy(float)


@pytest.fixture(scope="session")
def boston_subsample(boston):
    """Seed-0 subsample of 100 rows, features z-scored, response min-max scaled."""
    X, y = boston
    idx = np.random.default_rng(0).permutation(len(y))[:100]
    Xs, ys = X[idx], y[idx]
    Xs = (Xs - Xs.mean(0)) / Xs.std(0)
    ys = (ys - ys.min()) / (ys.max() - ys.min())
    return Xs, ys


def linear_toy(n=200, p=5, noise=0.01, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    return X, 2.0 * X[:, 0] + noise * rng.standard_normal(n)
