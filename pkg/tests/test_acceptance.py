"""Acceptance criteria 1-11.

Each ``criterion_N`` returns ``(passed, detail)``.  Under pytest every
criterion prints one ``CRITERION N: PASS|FAIL`` line and then asserts.
Run ``python tests/test_acceptance.py`` to print all eleven lines without
pytest.
"""

import math
import os
import sys
import tempfile
import time
from functools import lru_cache

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from conftest import linear_toy  # noqa: E402

from discomax.baselines import save, sir  # noqa: E402
from discomax.cli import ExperimentConfig, bundled_dataset, emit_report, run_experiment  # noqa: E402
from discomax.dcor import dcov2_via_laplacian, laplacian_from_data, sample_dcorr2, sample_dcov2  # noqa: E402
from discomax.pipeline import fit_embedding_model, rms  # noqa: E402
from discomax.solver import (  # noqa: E402
    FixedPointOperator,
    SolverConfig,
    alpha_upper,
    build_bundle,
    discomax,
    gamma_squared,
    init_Z0,
    objective_f,
    solve_subproblem,
    surrogate_g,
    trace_self,
)
from discomax.dcor import gram_laplacian  # noqa: E402

# tolerances
TOL_LEMMA1 = 1e-9
TOL_CLOSED_FORM = 1e-10
TOL_INIT_TRACE = 1e-10
TOL_INIT_FG = 1e-9
TOL_INNER = 1e-9
TOL_SPECTRAL = 1e-8
TOL_ASCENT = 1e-8
TOL_CHAIN = 1e-8


def _boston_subsample():
    import pandas as pd

    df = pd.read_csv(bundled_dataset("boston"))
    X, y = df.iloc[:, :-1].to_numpy(float), df.iloc[:, -1].to_numpy(float)
    idx = np.random.default_rng(0).permutation(len(y))[:100]
    X, y = X[idx], y[idx]
    return (X - X.mean(0)) / X.std(0), (y - y.min()) / (y.max() - y.min())


def criterion_1():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(3, 51))
        X = rng.standard_normal((n, int(rng.integers(1, 6))))
        Y = rng.standard_normal((n, int(rng.integers(1, 6))))
        a = dcov2_via_laplacian(X, laplacian_from_data(Y))
        b = sample_dcov2(X, Y)
        worst = max(worst, abs(a - b) / max(1.0, b))
    dt = time.perf_counter() - t0
    return worst <= TOL_LEMMA1 and dt < 5, f"max scaled gap {worst:.2e}, {dt:.2f}s"


def criterion_2():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(3, 40))
        X = rng.standard_normal((n, int(rng.integers(1, 6))))
        Y = rng.standard_normal((n, int(rng.integers(1, 6))))
        Xc, Yc = X - X.mean(0), Y - Y.mean(0)
        cf = np.sum((Xc.T @ Yc) ** 2) / math.sqrt(np.sum((Xc.T @ Xc) ** 2) * np.sum((Yc.T @ Yc) ** 2))
        worst = max(worst, abs(sample_dcorr2(X, Y) - cf))
    return worst <= TOL_CLOSED_FORM, f"max gap {worst:.2e}"


def criterion_3():
    rng = np.random.default_rng(3)
    wt, wf = 0.0, 0.0
    for d in range(2, 11):
        n = d + 5
        b = build_bundle(rng.standard_normal((n, 3)), rng.standard_normal(n))
        Z0 = init_Z0(n, d)
        wt = max(wt, abs(trace_self(Z0) - 1.0))
        wf = max(wf, abs(objective_f(Z0, b) - surrogate_g(Z0, Z0, b)))
    return wt <= TOL_INIT_TRACE and wf <= TOL_INIT_FG, f"trace gap {wt:.1e}, f-g gap {wf:.1e}"


@lru_cache(maxsize=None)
def _inner_instances():
    """50 random (bundle, M, alpha) instances with alpha in the eigenvalue bound."""
    rng = np.random.default_rng(4)
    cfg = SolverConfig()
    out = []
    for i in range(50):
        n = int(rng.integers(6, 61))
        # every other instance uses d = n - 1 so that the bound is positive
        d = n - 1 if i % 2 == 0 else int(rng.integers(2, n - 1))
        X = rng.standard_normal((n, int(rng.integers(1, 6))))
        y = X[:, 0] + rng.standard_normal(n)
        b = build_bundle(X, y)
        M = rng.standard_normal((n, d))
        M -= M.mean(0)
        L_M = gram_laplacian(M)
        g2 = gamma_squared(b, L_M, cfg)
        a = float(rng.uniform()) * alpha_upper(L_M, b, cfg)
        op = FixedPointOperator(b, g2, a, L_M, M)
        res = solve_subproblem(a, M, b, cfg, gamma2=g2, L_M=L_M, operator=op)
        out.append((res, op, a))
    return out


def criterion_4():
    worst, steps, positive = -math.inf, 0, 0
    for res, _, a in _inner_instances():
        h = np.diff(res.h_values)
        worst = max(worst, float(h.max()) if h.size else -math.inf)
        steps += h.size
        positive += a > 0
    return worst <= TOL_INNER, (f"largest increase {worst:.1e} over {steps} steps "
                                f"({positive}/50 instances with alpha > 0)")


def criterion_5():
    radii = [op.spectral_radius() for _, op, _ in _inner_instances()]
    return max(radii) <= 1 + TOL_SPECTRAL, f"max spectral radius {max(radii):.12f}"


@lru_cache(maxsize=None)
def _boston_run():
    X, y = _boston_subsample()
    t0 = time.perf_counter()
    res = discomax(X, y, SolverConfig(dim=3, max_outer=10))
    return res, time.perf_counter() - t0


def criterion_6():
    res, dt = _boston_run()
    recs = res.trace.records
    f = res.trace.f
    mono = bool(np.all(np.diff(f) >= -TOL_ASCENT))
    up = recs[-1].dcorr2_XZ > recs[0].dcorr2_XZ and recs[-1].dcorr2_Zy > recs[0].dcorr2_Zy
    ok = mono and up and dt < 120 and len(recs) - 1 <= 10
    return ok, (f"f {f[0]:.4f} -> {f[-1]:.4f} over {len(recs) - 1} steps, "
                f"rho2(X,Z) {recs[0].dcorr2_XZ:.3f} -> {recs[-1].dcorr2_XZ:.3f}, "
                f"rho2(Z,y) {recs[0].dcorr2_Zy:.3f} -> {recs[-1].dcorr2_Zy:.3f}, {dt:.1f}s")


def criterion_7():
    res, _ = _boston_run()
    bad = []
    for r in res.trace.records[1:]:
        first = r.trace_next <= r.trace_cross + TOL_CHAIN
        second = r.trace_cross <= r.trace_prev + TOL_CHAIN
        if not (first and second):
            bad.append(f"k={r.k}: {r.trace_next:.4f} / {r.trace_cross:.4f} / {r.trace_prev:.4f}")
    n = len(res.trace.records) - 1
    detail = f"{n - len(bad)}/{n} steps satisfy Tr(Z'L_Z Z) <= Tr(Z'L_M Z) <= Tr(M'L_M M)"
    if bad:
        detail += "; violations " + ", ".join(bad[:3])
    return not bad, detail


def criterion_8():
    X, y = linear_toy(n=200, p=5, noise=0.01, seed=0)
    perm = np.random.default_rng(8).permutation(200)
    tr, te = perm[:160], perm[160:]
    model = fit_embedding_model(X[tr], y[tr], SolverConfig(dim=2))
    err = rms(model.predict_scaled(X[te]), model.y_scaler.apply(y[te]))
    rho = model.trace.records[-1].dcorr2_Zy
    return err <= 0.1 and rho >= 0.95, f"held-out RMS {err:.4f}, rho2(Z,y) {rho:.4f}"


def criterion_9():
    rng = np.random.default_rng(9)
    X = rng.standard_normal((500, 5))
    beta = np.array([1.0, -1.0, 0.5, 0.0, 0.0])
    b = sir(X, X @ beta + 0.1 * rng.standard_normal(500), 1).B[:, 0]
    c_sir = abs(b @ beta) / (np.linalg.norm(b) * np.linalg.norm(beta))
    X = rng.standard_normal((1000, 5))
    beta = np.array([1.0, 1.0, 0.0, 0.0, 0.0]) / math.sqrt(2)
    b = save(X, (X @ beta) ** 2 + 0.1 * rng.standard_normal(1000), 1).B[:, 0]
    c_save = abs(b @ beta) / np.linalg.norm(b)
    return c_sir >= 0.95 and c_save >= 0.9, f"SIR |cos| {c_sir:.4f}, SAVE |cos| {c_save:.4f}"


DIMS = [3, 5, 7, 9, 11]


def _boston_config(out_dir):
    return ExperimentConfig(data="boston", methods=["discomax", "sir", "full"], dims=DIMS,
                            folds=5, seed=0, out_dir=out_dir)


@lru_cache(maxsize=None)
def _boston_cv(run_id):
    out = tempfile.mkdtemp(prefix=f"discomax_cv{run_id}_")
    cfg = _boston_config(out)
    t0 = time.perf_counter()
    res = run_experiment(cfg)
    emit_report(res, out)
    with open(os.path.join(out, "results.json"), "rb") as fh:
        doc = fh.read()
    return res, doc, time.perf_counter() - t0


def criterion_10():
    res, _, dt = _boston_cv(0)
    cell = {(c["method"], c["d"]): c for c in res.cells}
    dm = [cell[("discomax", d)]["mean_rms"] for d in DIMS]
    ds = [cell[("discomax", d)]["std_rms"] for d in DIMS]
    sr = [cell[("sir", d)]["mean_rms"] for d in DIMS]
    full = next(c["mean_rms"] for c in res.cells if c["method"] == "full")
    pooled = math.sqrt(float(np.mean(np.square(ds))))
    a = dm[1] < full
    b = all(dm[i + 1] <= dm[i] + pooled for i in range(len(DIMS) - 1))
    c = all(x <= s for x, s in zip(dm, sr))
    detail = (f"(a) {'ok' if a else 'fails'}: d=5 {dm[1]:.4f} vs full {full:.4f}; "
              f"(b) {'ok' if b else 'fails'}: {' '.join(f'{v:.4f}' for v in dm)} pooled std {pooled:.4f}; "
              f"(c) {'ok' if c else 'fails'}: SIR {' '.join(f'{v:.4f}' for v in sr)}; {dt / 60:.1f} min")
    return a and b and c and dt < 1800, detail


def criterion_11():
    _, doc0, _ = _boston_cv(0)
    _, doc1, _ = _boston_cv(1)
    return doc0 == doc1, f"result documents {'identical' if doc0 == doc1 else 'differ'} ({len(doc0)} bytes)"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 12)}


def _report(i):
    ok, detail = CRITERIA[i]()
    print(f"CRITERION {i}: {'PASS' if ok else 'FAIL'} - {detail}", flush=True)
    return ok, detail


@pytest.mark.parametrize("i", range(1, 12))
def test_criterion(i, capsys):
    ok, detail = _report(i)
    with capsys.disabled():
        print(f"\nCRITERION {i}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


if __name__ == "__main__":
    results = [_report(i)[0] for i in CRITERIA]
    sys.exit(0 if all(results) else 1)
