"""CSV persistence for snapshot sets, POD bases, ROM coefficients and ES histories.

All floats are written with 17 significant digits so files round-trip
bit-exactly.
"""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .fem import SnapshotSet
from .pod import PodBasis

FLOAT_FMT = "%.17g"


def _fmt(v: float) -> str:
    return FLOAT_FMT % v


def _write_rows(path, header: list[str], rows: Iterable[Iterable]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    return path


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def save_fields(path, times, x, w, T, names=("w", "T")) -> Path:
    """Long-format field file: one row per (t, x) with header ``t,x,<w>,<T>``."""
    times = np.asarray(times)
    x = np.asarray(x)

    def rows():
        for j, t in enumerate(times):
            ts = _fmt(t)
            for i, xi in enumerate(x):
                yield (ts, _fmt(xi), _fmt(w[j, i]), _fmt(T[j, i]))

    return _write_rows(path, ["t", "x", *names], rows())


def load_fields(path) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    header, rows = _read_rows(path)
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    times = np.unique(data[:, 0])
    s = times.size
    n = data.shape[0] // s
    x = data[:n, 1]
    return times, x, data[:, 2].reshape(s, n), data[:, 3].reshape(s, n)


def save_snapshots(path, snaps: SnapshotSet) -> Path:
    return save_fields(path, snaps.times, snaps.x, snaps.w, snaps.T)


def load_snapshots(path) -> SnapshotSet:
    times, x, w, T = load_fields(path)
    return SnapshotSet(times=times, w=w, T=T, x=x)


def save_eigenvalues(path, basis: PodBasis) -> Path:
    rows = ((i + 1, _fmt(lam)) for i, lam in enumerate(basis.eigenvalues))
    return _write_rows(path, ["i", "lambda"], rows)


def save_modes(path, basis: PodBasis, x: Optional[np.ndarray] = None) -> Path:
    if x is None:
        x = np.linspace(0.0, 1.0, basis.n_nodes)
    header = ["x"] + [f"phi_{i + 1}" for i in range(basis.r)]
    rows = ([_fmt(xi)] + [_fmt(v) for v in basis.modes[i]] for i, xi in enumerate(x))
    return _write_rows(path, header, rows)


def load_eigenvalues(path) -> np.ndarray:
    _, rows = _read_rows(path)
    return np.array([float(r[1]) for r in rows])


def load_modes(path) -> tuple[np.ndarray, np.ndarray]:
    _, rows = _read_rows(path)
    data = np.array(rows, dtype=float)
    return data[:, 0], data[:, 1:]


def save_coefficients(path, times, q) -> Path:
    q = np.atleast_2d(q)
    header = ["t"] + [f"q_{i + 1}" for i in range(q.shape[1])]
    rows = ([_fmt(t)] + [_fmt(v) for v in qk] for t, qk in zip(times, q))
    return _write_rows(path, header, rows)


def load_coefficients(path) -> tuple[np.ndarray, np.ndarray]:
    _, rows = _read_rows(path)
    data = np.array(rows, dtype=float)
    return data[:, 0], data[:, 1:]


def save_history(path, history) -> Path:
    """ES history as ``k,mu_e,mu_nl,Q``; ``mu_nl`` is blank for one channel."""

    def rows():
        for rec in history:
            mu_nl = _fmt(rec.mu_hat[1]) if len(rec.mu_hat) > 1 else ""
            yield (rec.k, _fmt(rec.mu_hat[0]), mu_nl, _fmt(rec.Q))

    return _write_rows(path, ["k", "mu_e", "mu_nl", "Q"], rows())


def load_history(path) -> dict[str, np.ndarray]:
    _, rows = _read_rows(path)
    k = np.array([int(r[0]) for r in rows])
    mu_e = np.array([float(r[1]) for r in rows])
    mu_nl = np.array([float(r[2]) if r[2] != "" else np.nan for r in rows])
    Q = np.array([float(r[3]) for r in rows])
    return {"k": k, "mu_e": mu_e, "mu_nl": mu_nl, "Q": Q}
