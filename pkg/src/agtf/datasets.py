"""Dataset manifests, view/label file formats and the synthetic generator.

A manifest is a JSON file::

    {"name": "msrc", "n": 210,
     "views": [{"id": 0, "path": "v0.csv", "format": "csv", "rows": 210, "cols": 24},
               {"id": 1, "path": "v1.bin", "format": "f64le", "rows": 210, "cols": 576}],
     "labels": {"path": "labels.csv", "format": "csv"}}

Paths are relative to the manifest. ``csv`` views hold one sample per line;
``f64le`` views are raw row-major little-endian float64.
"""

import json
import re
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Malformed, missing or inconsistent input data."""


def read_view(path, fmt, rows=None, cols=None):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"missing view file {path}")
    if fmt == "csv":
        try:
            X = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
        except ValueError as exc:
            raise DataError(f"{path}: {exc}") from exc
    elif fmt == "f64le":
        if rows is None or cols is None:
            raise DataError(f"{path}: f64le views need rows and cols in the manifest")
        raw = np.fromfile(path, dtype="<f8")
        if raw.size != rows * cols:
            raise DataError(f"{path}: {raw.size} values, expected {rows}x{cols}")
        X = raw.reshape(rows, cols).astype(np.float64)
    else:
        raise DataError(f"{path}: unknown view format {fmt!r}")
    if rows is not None and X.shape[0] != rows or cols is not None and X.shape[1] != cols:
        raise DataError(f"{path}: shape {X.shape} does not match manifest ({rows}, {cols})")
    bad = np.argwhere(~np.isfinite(X))
    if bad.size:
        r, c = bad[0]
        raise DataError(f"{path}: non-finite value at row {r}, column {c}")
    return X


def write_view(path, X, fmt):
    X = np.asarray(X, dtype=np.float64)
    if fmt == "csv":
        np.savetxt(path, X, delimiter=",", fmt="%.17g")
    elif fmt == "f64le":
        np.ascontiguousarray(X, dtype="<f8").tofile(path)
    else:
        raise ValueError(f"unknown view format {fmt!r}")


def read_labels(path):
    path = Path(path)
    if not path.is_file():
        raise DataError(f"missing label file {path}")
    tokens = [t for t in re.split(r"[,\s]+", path.read_text()) if t]
    try:
        labels = np.array([int(t) for t in tokens], dtype=np.int64)
    except ValueError as exc:
        raise DataError(f"{path}: labels must be integers ({exc})") from exc
    if labels.size and labels.min() < 0:
        raise DataError(f"{path}: labels must be 0-based nonnegative integers")
    return labels


def write_labels(path, labels):
    Path(path).write_text("".join(f"{int(y)}\n" for y in labels))


def load_dataset(manifest_path):
    """Return ``(views, labels)``; ``labels`` is None when the manifest has none."""
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise DataError(f"missing manifest {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{manifest_path}: invalid JSON ({exc})") from exc
    root = manifest_path.parent
    n = manifest.get("n")
    entries = manifest.get("views") or []
    if not entries:
        raise DataError(f"{manifest_path}: no views listed")
    views = []
    for entry in entries:
        try:
            X = read_view(root / entry["path"], entry.get("format", "csv"), entry.get("rows"), entry.get("cols"))
        except KeyError as exc:
            raise DataError(f"{manifest_path}: view entry lacks {exc}") from exc
        if n is not None and X.shape[0] != n:
            raise DataError(f"view {entry.get('id')}: {X.shape[0]} rows, manifest says n={n}")
        views.append(X)
    if len({X.shape[0] for X in views}) != 1:
        raise DataError(f"{manifest_path}: views disagree on the number of samples")
    labels = None
    if manifest.get("labels"):
        labels = read_labels(root / manifest["labels"]["path"])
        if labels.size != views[0].shape[0]:
            raise DataError(f"labels: {labels.size} entries for {views[0].shape[0]} samples")
    return views, labels


def write_dataset(out_dir, views, labels=None, name="dataset", fmt="f64le"):
    """Write views (and labels) plus ``manifest.json`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    suffix = "csv" if fmt == "csv" else "bin"
    entries = []
    for v, X in enumerate(views):
        fname = f"view{v}.{suffix}"
        write_view(out / fname, X, fmt)
        entries.append({"id": v, "path": fname, "format": fmt, "rows": X.shape[0], "cols": X.shape[1]})
    manifest = {"name": name, "n": int(views[0].shape[0]), "views": entries}
    if labels is not None:
        write_labels(out / "labels.csv", labels)
        manifest["labels"] = {"path": "labels.csv", "format": "csv"}
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def _centers(rng, K, d, separation):
    if d >= K:
        basis, _ = np.linalg.qr(rng.standard_normal((d, K)))
        return separation / np.sqrt(2.0) * basis.T
    side = separation * K
    for _ in range(10000):
        C = rng.uniform(0.0, side, size=(K, d))
        gaps = np.linalg.norm(C[:, None] - C[None], axis=-1)
        if gaps[np.triu_indices(K, 1)].min() >= separation:
            return C
        side *= 1.01
    raise DataError(f"could not place {K} separated centers in {d} dimensions")


def synth_dataset(K, n, view_dims, cluster_std=1.0, seed=0, out_dir=None, fmt="f64le"):
    """Gaussian blobs sharing one cluster assignment across all views.

    Labels are balanced to within one sample and shuffled. In every view the
    ``K`` centers are at least ``10 * cluster_std`` apart (10 when the
    standard deviation is zero). Returns ``(views, labels, manifest_path)``;
    the path is None unless ``out_dir`` is given.
    """
    if K < 2 or n < 5 * K:
        raise ValueError(f"need K >= 2 and n >= 5K, got K={K}, n={n}")
    if not view_dims or min(view_dims) < 1:
        raise ValueError(f"invalid view dimensions {view_dims}")
    if cluster_std < 0:
        raise ValueError("cluster_std must be nonnegative")
    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.arange(n) % K)
    separation = 10.0 * cluster_std if cluster_std > 0 else 10.0
    views = []
    for d in view_dims:
        C = _centers(rng, K, int(d), separation)
        views.append(C[labels] + cluster_std * rng.standard_normal((n, int(d))))
    path = None
    if out_dir is not None:
        path = write_dataset(out_dir, views, labels, name=f"synth_K{K}_n{n}_seed{seed}", fmt=fmt)
    return views, labels, path
