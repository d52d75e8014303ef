"""Command-line experiment runner.

Subcommands
-----------
run              k-fold RMS table over methods and embedding dimensions
embed            fit DisCoMax on a whole dataset and dump Z plus its trace
dcorr            squared distance correlation between two CSV matrices
trace-plot-data  collect the per-fold traces of a run into one long table

Exit status is 0 on success, 1 when any result cell failed and 2 on a
configuration or input error.
"""

import argparse
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from . import __version__
from .dcor import sample_dcorr2
from .errors import (
    ConfigError,
    DisCoMaxError,
    NoNumericColumnsError,
    ResponseColumnMissingError,
)
from .pipeline import DIMENSIONLESS, METHODS, fit_embedding_model, kfold_cv
from .solver import TRACE_COLUMNS, GmmTrace, SolverConfig

EXIT_OK, EXIT_CELL_FAILURE, EXIT_CONFIG = 0, 1, 2

RESULT_SCHEMA = "discomax-results/1"


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: List[str]
    response_name: str
    dropped_rows: int
    sha256: str


def bundled_dataset(name="boston"):
    """Path of a dataset shipped with the package."""
    return str(resources.files("discomax") / "data" / f"{name}.csv")


def _resolve_path(path):
    if path == "boston":
        return bundled_dataset("boston")
    return path


def load_csv(path, response="last", drop_columns=()):
    """Read a delimited file with a header row.

    The delimiter (comma or tab) is sniffed.  Columns whose cells are all
    non-numeric are discarded; rows with any remaining non-numeric or
    missing cell are dropped and counted.

    Parameters
    ----------
    response : str or int
        Column name, integer position, or ``"last"``.
    drop_columns : sequence of str
        Columns excluded from the features (ignored if absent).
    """
    path = _resolve_path(path)
    with open(path, "rb") as fh:
        raw = fh.read()
    text = raw.decode("utf-8-sig")
    first = text.split("\n", 1)[0]
    sep = "\t" if first.count("\t") > first.count(",") else ","
    df = pd.read_csv(io.StringIO(text), sep=sep, dtype=str, keep_default_na=False)
    df.columns = [str(c).strip() for c in df.columns]
    num = df.apply(lambda s: pd.to_numeric(s.str.strip(), errors="coerce"))
    num = num.loc[:, num.notna().any(axis=0)]
    if num.shape[1] < 2:
        raise NoNumericColumnsError(f"{path}: need at least two numeric columns")
    cols = list(num.columns)
    if response == "last":
        resp = cols[-1]
    elif isinstance(response, int) or (isinstance(response, str) and response.lstrip("-").isdigit()):
        try:
            resp = list(df.columns)[int(response)]
        except IndexError:
            raise ResponseColumnMissingError(f"no column at index {response}") from None
    else:
        matches = [c for c in cols if c == response] or [c for c in cols if c.lower() == str(response).lower()]
        if not matches:
            raise ResponseColumnMissingError(f"no numeric column named {response!r}")
        resp = matches[0]
    if resp not in cols:
        raise ResponseColumnMissingError(f"response column {resp!r} is not numeric")
    feats = [c for c in cols if c != resp and c not in set(drop_columns)]
    if not feats:
        raise NoNumericColumnsError(f"{path}: no numeric feature columns")
    sub = num[feats + [resp]]
    ok = sub.notna().all(axis=1).to_numpy()
    sub = sub.loc[ok]
    return Dataset(sub[feats].to_numpy(float), sub[resp].to_numpy(float), feats, resp,
                   int((~ok).sum()), hashlib.sha256(raw).hexdigest())


@dataclass
class ExperimentConfig:
    data: str
    response: str = "last"
    methods: List[str] = field(default_factory=lambda: ["discomax", "sir", "save", "full"])
    dims: List[int] = field(default_factory=lambda: [3, 5, 7, 9, 11])
    folds: int = 5
    seed: int = 0
    solver: Dict[str, object] = field(default_factory=dict)
    out_dir: str = "results"
    scale_response: str = "minmax"
    verbose_trace: bool = False
    drop_columns: List[str] = field(default_factory=list)

    def validate(self, n_features):
        if self.folds < 2:
            raise ConfigError("--folds must be at least 2")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {sorted(METHODS)}")
        if any(m not in DIMENSIONLESS for m in self.methods):
            for d in self.dims:
                if d < 2 or d >= n_features:
                    raise ConfigError(f"dimension {d} must satisfy 2 <= d < {n_features}")
        if self.scale_response not in ("minmax", "zscore", "none"):
            raise ConfigError("--scale-response must be minmax, zscore or none")
        try:
            self.solver_config(2)
        except TypeError as exc:
            raise ConfigError(f"bad solver override: {exc}") from exc

    def solver_config(self, dim=3):
        return SolverConfig(**{**self.solver, "dim": dim})

    def echo(self):
        return {
            "data": self.data, "response": self.response, "methods": list(self.methods),
            "dims": [int(d) for d in self.dims], "folds": self.folds, "seed": self.seed,
            "solver": {k: v for k, v in self.solver_config().to_dict().items() if k != "dim"},
            "scale_response": self.scale_response, "drop_columns": list(self.drop_columns),
        }


@dataclass
class ResultSet:
    """Run metadata plus one record per (method, d) cell."""

    metadata: Dict[str, object]
    cells: List[Dict[str, object]]
    traces: Dict[str, GmmTrace] = field(default_factory=dict, repr=False, compare=False)
    timing: Dict[str, float] = field(default_factory=dict, repr=False, compare=False)

    @property
    def failed(self):
        return any(c["error"] is not None for c in self.cells)

    def to_dict(self):
        return {"schema": RESULT_SCHEMA, "metadata": self.metadata, "cells": self.cells}

    def to_json(self):
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        if doc.get("schema") != RESULT_SCHEMA:
            raise ValueError("not a DisCoMax result document")
        return cls(doc["metadata"], doc["cells"])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def _trace_name(method, d, fold):
    return os.path.join("traces", f"{method}_d{d}_fold{fold}.csv")


def run_experiment(config, progress=None):
    """Cross-validate every (method, d) cell and collect a :class:`ResultSet`."""
    ds = load_csv(config.data, config.response, config.drop_columns)
    config.validate(ds.X.shape[1])
    cells = kfold_cv(ds.X, ds.y, config.methods, config.dims, config.folds, config.seed,
                     config.solver_config(), y_scaling=config.scale_response,
                     progress=progress)
    records, traces, timing = [], {}, {}
    for c in cells:
        names = []
        for i, tr in enumerate(c.traces):
            name = _trace_name(c.method, c.dim, i)
            traces[name] = tr
            names.append(name)
        records.append({
            "method": c.method, "d": c.dim,
            "mean_rms": c.mean_rms, "std_rms": c.std_rms,
            "fold_rms": list(c.fold_rms) if c.error is None else [],
            "error": c.error, "trace_files": names,
            "stop_reasons": [t.stop_reason for t in c.traces],
            "outer_iterations": [len(t.records) - 1 for t in c.traces],
        })
        timing[f"{c.method}_d{c.dim}"] = c.wall_time
    echo = config.echo()
    meta = {
        "version": __version__,
        "config": echo,
        "config_hash": hashlib.sha256(json.dumps(echo, sort_keys=True).encode()).hexdigest(),
        "dataset": {"sha256": ds.sha256, "rows": int(ds.X.shape[0]),
                    "features": ds.feature_names, "response": ds.response_name,
                    "dropped_rows": ds.dropped_rows},
        "scalers": {"features": "zscore", "response": config.scale_response,
                    "embedding": "zscore"},
        "regressor": {"kind": "kernel ridge, RBF", "sigma": "median pairwise distance",
                      "lambda_r": "1e-3 * n_train", "target_centering": True},
        "rms_units": "scaled response",
        "folds": {"k": config.folds, "seed": config.seed,
                  "assignment": "seeded permutation, contiguous split"},
    }
    return ResultSet(meta, records, traces, timing)


def format_table(results):
    """Aligned text table: one row per method, one column per dimension."""
    dims = sorted({c["d"] for c in results.cells if c["method"] not in DIMENSIONLESS}
                  | set(results.metadata.get("config", {}).get("dims", [])))
    methods = list(dict.fromkeys(c["method"] for c in results.cells))
    header = ["method/d"] + [str(d) for d in dims] + ["all"]
    rows = [header]
    for m in methods:
        row = [m]
        cells = {c["d"]: c for c in results.cells if c["method"] == m}
        for d in dims:
            row.append(_cell_text(cells.get(d)) if m not in DIMENSIONLESS else "")
        row.append(_cell_text(next(iter(cells.values()))) if m in DIMENSIONLESS else "")
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(v.ljust(w) if i == 0 else v.rjust(w) for i, (v, w) in enumerate(zip(r, widths)))
             for r in rows]
    return "\n".join(line.rstrip() for line in lines) + "\n"


def _cell_text(cell):
    if cell is None:
        return ""
    if cell["error"] is not None:
        return "error"
    return f"{cell['mean_rms']:.4f}"


def emit_report(results, out_dir, verbose_trace=False):
    """Write ``results.json``, ``results.txt``, ``timing.json`` and traces."""
    os.makedirs(os.path.join(out_dir, "traces"), exist_ok=True)
    with open(os.path.join(out_dir, "results.json"), "w") as fh:
        fh.write(results.to_json())
    with open(os.path.join(out_dir, "results.txt"), "w") as fh:
        fh.write(format_table(results))
    with open(os.path.join(out_dir, "timing.json"), "w") as fh:
        json.dump(results.timing, fh, indent=2, sort_keys=True)
    for name, tr in sorted(results.traces.items()):
        tr.write(os.path.join(out_dir, name))
        if verbose_trace:
            tr.write_inner(os.path.join(out_dir, name.replace(".csv", "_inner.csv")))
    return [os.path.join(out_dir, p) for p in ("results.json", "results.txt", "timing.json")]


def trace_plot_data(results_path, out_path=None):
    """Concatenate all traces of a run into one table with method/d/fold keys."""
    base = os.path.dirname(os.path.abspath(results_path))
    with open(results_path) as fh:
        results = ResultSet.from_json(fh.read())
    out_path = out_path or os.path.join(base, "traces_long.csv")
    with open(out_path, "w") as fh:
        fh.write(",".join(("method", "d", "fold") + TRACE_COLUMNS) + "\n")
        for cell in results.cells:
            for fold, name in enumerate(cell["trace_files"]):
                tr = GmmTrace.read(os.path.join(base, name))
                for row in tr.rows():
                    vals = [cell["method"], str(cell["d"]), str(fold)]
                    vals += [str(v) if isinstance(v, int) else repr(float(v)) for v in row]
                    fh.write(",".join(vals) + "\n")
    return out_path


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _solver_overrides(args):
    out = {}
    for key in ("max_outer", "alpha_bound", "alpha_search", "gamma_margin", "T_max", "patience"):
        val = getattr(args, key, None)
        if val is not None:
            out[key] = val
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="discomax", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def data_args(sp):
        sp.add_argument("--data", required=True,
                        help="delimited file with header, or 'boston' for the bundled copy")
        sp.add_argument("--response", default="last",
                        help="response column: name, index or 'last' (default)")
        sp.add_argument("--drop-columns", type=_str_list, default=[],
                        help="comma-separated columns excluded from the features")

    def solver_args(sp):
        sp.add_argument("--max-outer", dest="max_outer", type=int)
        sp.add_argument("--alpha-bound", dest="alpha_bound",
                        choices=["dinkelbach", "psd", "pencil_max"])
        sp.add_argument("--alpha-search", dest="alpha_search", choices=["objective", "surrogate"])
        sp.add_argument("--gamma-margin", dest="gamma_margin", type=float)
        sp.add_argument("--t-max", dest="T_max", type=int)
        sp.add_argument("--patience", type=int)

    r = sub.add_parser("run", help="k-fold cross-validated RMS table")
    data_args(r)
    solver_args(r)
    r.add_argument("--methods", type=_str_list, default=["discomax", "sir", "save", "full"],
                   help=f"comma-separated subset of {','.join(METHODS)}")
    r.add_argument("--dims", type=_int_list, default=[3, 5, 7, 9, 11])
    r.add_argument("--folds", type=int, default=5)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out-dir", default="results")
    r.add_argument("--scale-response", choices=["minmax", "zscore", "none"], default="minmax")
    r.add_argument("--verbose-trace", action="store_true",
                   help="also write inner fixed-point values per outer step")
    r.add_argument("--quiet", action="store_true")

    e = sub.add_parser("embed", help="fit DisCoMax on all rows and write Z")
    data_args(e)
    solver_args(e)
    e.add_argument("--dim", type=int, default=3)
    e.add_argument("--out-dir", default="embedding")
    e.add_argument("--scale-response", choices=["minmax", "zscore", "none"], default="minmax")
    e.add_argument("--verbose-trace", action="store_true")

    d = sub.add_parser("dcorr", help="squared distance correlation of two CSV matrices")
    d.add_argument("a")
    d.add_argument("b")

    t = sub.add_parser("trace-plot-data", help="merge the traces of a run")
    t.add_argument("--results", required=True, help="results.json written by 'run'")
    t.add_argument("--out", default=None)
    return p


def _cmd_run(args):
    cfg = ExperimentConfig(
        data=args.data, response=args.response, methods=args.methods, dims=args.dims,
        folds=args.folds, seed=args.seed, solver=_solver_overrides(args),
        out_dir=args.out_dir, scale_response=args.scale_response,
        verbose_trace=args.verbose_trace, drop_columns=args.drop_columns)
    if args.verbose_trace:
        cfg.solver["verbose_inner"] = True

    def progress(method, d, fold):
        if not args.quiet:
            print(f"{method} d={d} fold={fold} done", file=sys.stderr, flush=True)

    results = run_experiment(cfg, progress)
    emit_report(results, cfg.out_dir, cfg.verbose_trace)
    sys.stdout.write(format_table(results))
    return EXIT_CELL_FAILURE if results.failed else EXIT_OK


def _cmd_embed(args):
    ds = load_csv(args.data, args.response, args.drop_columns)
    if not 2 <= args.dim < ds.X.shape[0]:
        raise ConfigError(f"--dim must satisfy 2 <= d < {ds.X.shape[0]}")
    over = _solver_overrides(args)
    if args.verbose_trace:
        over["verbose_inner"] = True
    cfg = SolverConfig(**{**over, "dim": args.dim})
    model = fit_embedding_model(ds.X, ds.y, cfg, y_scaling=args.scale_response)
    os.makedirs(args.out_dir, exist_ok=True)
    cols = [f"z{i + 1}" for i in range(args.dim)]
    pd.DataFrame(model.Z_train, columns=cols).to_csv(
        os.path.join(args.out_dir, "Z.csv"), index=False, float_format="%.17g")
    model.trace.write(os.path.join(args.out_dir, "trace.csv"))
    if args.verbose_trace:
        model.trace.write_inner(os.path.join(args.out_dir, "trace_inner.csv"))
    last = model.trace.records[-1]
    print(f"f={last.f:.6f} dcorr2_XZ={last.dcorr2_XZ:.6f} dcorr2_Zy={last.dcorr2_Zy:.6f} "
          f"outer={len(model.trace.records) - 1} stop={model.trace.stop_reason}")
    return EXIT_OK


def _read_matrix(path):
    df = pd.read_csv(path, sep=None, engine="python")
    num = df.apply(pd.to_numeric, errors="coerce").dropna(axis=1, how="all")
    if num.shape[1] == 0:
        raise NoNumericColumnsError(f"{path}: no numeric columns")
    return num


def _cmd_dcorr(args):
    A, B = _read_matrix(args.a), _read_matrix(args.b)
    mask = A.notna().all(axis=1).to_numpy() & B.notna().all(axis=1).to_numpy() \
        if len(A) == len(B) else None
    if mask is None:
        raise ConfigError(f"row counts differ: {len(A)} vs {len(B)}")
    print(repr(sample_dcorr2(A.to_numpy(float)[mask], B.to_numpy(float)[mask])))
    return EXIT_OK


def _cmd_trace(args):
    print(trace_plot_data(args.results, args.out))
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "embed": _cmd_embed, "dcorr": _cmd_dcorr,
               "trace-plot-data": _cmd_trace}[args.command]
    try:
        return handler(args)
    except (ConfigError, NoNumericColumnsError, ResponseColumnMissingError,
            FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DisCoMaxError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CELL_FAILURE


if __name__ == "__main__":
    sys.exit(main())
