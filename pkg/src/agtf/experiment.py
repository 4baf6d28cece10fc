"""End-to-end experiment runs and parameter sweeps."""

import csv
import itertools
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import metrics
from .anchor import anchor_graph_tensor
from .datasets import DataError, load_dataset, synth_dataset, write_labels
from .solver import SolverConfig, run
from .tensor3 import NumericFailure

log = logging.getLogger(__name__)

TRACE_COLUMNS = ["iter", "res_hq", "res_hj", "res_gf", "objective", "mu", "rho", "sigma"]

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class StageError(RuntimeError):
    """Pipeline failure tagged with the stage that raised it and an exit code."""

    def __init__(self, stage, message, code):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.code = code


@dataclass
class ExperimentConfig:
    K: int = 0
    manifest: str = None
    # {"n": 400, "view_dims": [10, 8, 12], "cluster_std": 1.0, "seed": 0}
    synth: dict = None
    anchor_rate: float = 0.4
    neighbor_k: int = 5
    anchor_method: str = "kmeans"
    p: float = 0.5
    lambda1: float = 10.0
    lambda2: float = 10.0
    epsilon: float = 1e-7
    max_iter: int = 300
    eta: float = 1.3
    mu0: float = 1e-5
    rho0: float = 1e-5
    sigma0: float = 1e-5
    penalty_cap: float = 1e13
    rotate_prox: bool = True
    seed: int = 0
    trials: int = 1
    out: str = "results"

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise StageError("config", f"unknown config keys: {sorted(unknown)}", EXIT_USAGE)
        return cls(**d)

    def validate(self):
        if (self.manifest is None) == (self.synth is None):
            raise StageError("config", "give exactly one of manifest or synth", EXIT_USAGE)
        if not 0 < self.anchor_rate <= 1:
            raise StageError("config", f"anchor_rate must lie in (0, 1], got {self.anchor_rate}", EXIT_USAGE)
        if self.neighbor_k < 1 or self.trials < 1:
            raise StageError("config", "neighbor_k and trials must be positive", EXIT_USAGE)
        if self.anchor_method not in ("kmeans", "uniform_random"):
            raise StageError("config", f"unknown anchor_method {self.anchor_method!r}", EXIT_USAGE)
        self.solver_config(self.seed)

    def solver_config(self, seed):
        try:
            return SolverConfig(
                K=self.K,
                lambda1=self.lambda1,
                lambda2=self.lambda2,
                p=self.p,
                mu0=self.mu0,
                rho0=self.rho0,
                sigma0=self.sigma0,
                eta=self.eta,
                penalty_cap=self.penalty_cap,
                epsilon=self.epsilon,
                max_iter=self.max_iter,
                rotate_prox=self.rotate_prox,
                seed=seed,
            )
        except ValueError as exc:
            raise StageError("config", str(exc), EXIT_USAGE) from exc


def _load(config):
    try:
        if config.manifest is not None:
            return load_dataset(config.manifest)
        s = dict(config.synth)
        views, labels, _ = synth_dataset(
            K=s.get("K", config.K),
            n=s["n"],
            view_dims=s["view_dims"],
            cluster_std=s.get("cluster_std", 1.0),
            seed=s.get("seed", config.seed),
        )
        return views, labels
    except (DataError, KeyError, ValueError) as exc:
        raise StageError("load", str(exc), EXIT_DATA) from exc


def cluster_views(views, config, seed):
    """Anchor graph tensor plus solver run for one seed; returns (result, timings, m)."""
    n = views[0].shape[0]
    if config.anchor_rate * n < config.K:
        raise StageError("anchors", "anchor_rate * n must be at least K", EXIT_USAGE)
    t0 = time.perf_counter()
    try:
        S, _ = anchor_graph_tensor(
            views, config.anchor_rate, config.K, config.neighbor_k, seed, config.anchor_method
        )
    except ValueError as exc:
        raise StageError("anchors", str(exc), EXIT_DATA) from exc
    t1 = time.perf_counter()
    try:
        _, result = run(S, config.solver_config(seed))
    except (NumericFailure, np.linalg.LinAlgError, FloatingPointError) as exc:
        raise StageError("solve", str(exc), EXIT_NUMERIC) from exc
    except ValueError as exc:
        raise StageError("solve", str(exc), EXIT_USAGE) from exc
    t2 = time.perf_counter()
    timings = {
        "graph_seconds": t1 - t0,
        "solver_seconds": t2 - t1,
        "seconds_per_iter": (t2 - t1) / max(result.iterations, 1),
    }
    return result, timings, S.shape[1]


def write_trace(path, trace):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for r in trace:
            w.writerow([r.iter] + [repr(float(getattr(r, c))) for c in TRACE_COLUMNS[1:]])


def run_experiment(config):
    """Run the full pipeline and write ``metrics.json``, ``labels.csv``,
    ``anchors_labels.csv`` and ``trace.csv`` under ``config.out``.

    Returns the metrics dictionary. Failures raise ``StageError``.
    """
    config.validate()
    start = time.perf_counter()
    views, truth = _load(config)
    trials = []
    first = None
    for t in range(config.trials):
        seed = config.seed + t
        result, timings, m = cluster_views(views, config, seed)
        record = {"seed": seed, "iterations": result.iterations, "converged": result.converged, **timings}
        if truth is not None:
            record.update(metrics.evaluate(truth, result.sample_labels))
        trials.append(record)
        log.info("trial %d: %s", t, record)
        if first is None:
            first = result
    out = Path(config.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_labels(out / "labels.csv", first.sample_labels)
        write_labels(out / "anchors_labels.csv", first.anchor_labels)
        write_trace(out / "trace.csv", first.trace)
    except OSError as exc:
        raise StageError("write", str(exc), EXIT_USAGE) from exc

    summary = dict(trials[0])
    summary.pop("seed")
    summary.update(
        n=int(views[0].shape[0]),
        m=int(m),
        V=len(views),
        runtime_seconds=time.perf_counter() - start,
        config=asdict(config),
    )
    if config.trials > 1:
        summary["trials"] = trials
        for key in ("acc", "nmi", "purity"):
            if truth is not None:
                vals = [r[key] for r in trials]
                summary[f"{key}_mean"] = float(np.mean(vals))
                summary[f"{key}_std"] = float(np.std(vals))
    try:
        (out / "metrics.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise StageError("write", str(exc), EXIT_USAGE) from exc
    return summary


SWEEP_PARAMS = ("anchor_rate", "p", "lambda")


def sweep_points(param, values, lambda2_values=None):
    """Grid coordinates for a sweep; ``lambda`` sweeps ``values x lambda2_values``."""
    if param == "lambda":
        return [{"lambda1": a, "lambda2": b} for a, b in itertools.product(values, lambda2_values or values)]
    if param in ("anchor_rate", "p"):
        return [{param: v} for v in values]
    raise StageError("config", f"cannot sweep {param!r}; choose from {SWEEP_PARAMS}", EXIT_USAGE)


def _sweep_point(args):
    index, config = args
    row = {"point": index, "anchor_rate": config.anchor_rate, "p": config.p,
           "lambda1": config.lambda1, "lambda2": config.lambda2}
    try:
        m = run_experiment(config)
    except StageError as exc:
        row["status"] = f"error {exc}"
        return row
    row["status"] = "ok"
    for key in ("acc", "nmi", "purity", "iterations", "converged", "runtime_seconds",
                "solver_seconds", "seconds_per_iter", "m"):
        row[key] = m.get(key)
    return row


SWEEP_COLUMNS = ["point", "anchor_rate", "p", "lambda1", "lambda2", "status", "m", "acc", "nmi",
                 "purity", "iterations", "converged", "runtime_seconds", "solver_seconds",
                 "seconds_per_iter"]


def sweep(config, points, jobs=1):
    """One ``run_experiment`` per grid point, aggregated into ``<out>/sweep.csv``.

    Each point writes its own outputs to ``<out>/point_<index>``. Failed
    points are kept in the table with their error in ``status``.
    """
    config.validate()
    base = Path(config.out)
    base.mkdir(parents=True, exist_ok=True)
    tasks = [(i, replace(config, out=str(base / f"point_{i:03d}"), **pt)) for i, pt in enumerate(points)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    with open(base / "sweep.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow({k: r.get(k, "") for k in SWEEP_COLUMNS})
    return rows
