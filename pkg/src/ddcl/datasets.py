"""Seeded synthetic generators and CSV ingestion.

CSV layout: comma separated, UTF-8, optional single header row, labels (if
any) in the last column.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .numerics import make_rng


class DataError(ValueError):
    """Malformed or unusable input data."""


@dataclass
class LabeledDataset:
    features: np.ndarray
    labels: np.ndarray = None
    name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape[0] != self.features.shape[0]:
                raise ValueError(
                    f"{self.labels.shape[0]} labels for {self.features.shape[0]} samples"
                )

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[1]

    @property
    def n_classes(self):
        return 0 if self.labels is None else int(np.unique(self.labels).size)


def _split(n, k):
    """Class sizes as equal as possible (first classes take the remainder)."""
    return [n // k + (1 if i < n % k else 0) for i in range(k)]


def make_moons(n=300, noise_sd=0.1, seed=0):
    if n < 2:
        raise ValueError("make_moons needs n >= 2")
    rng = make_rng(seed)
    n_out, n_in = _split(n, 2)
    t_out = np.linspace(0.0, np.pi, n_out)
    t_in = np.linspace(0.0, np.pi, n_in)
    X = np.vstack([
        np.column_stack([np.cos(t_out), np.sin(t_out)]),
        np.column_stack([1.0 - np.cos(t_in), 0.5 - np.sin(t_in)]),
    ])
    y = np.repeat([0, 1], [n_out, n_in])
    X = X + noise_sd * rng.standard_normal(X.shape)
    return LabeledDataset(X, y, "moons", {"n": n, "noise_sd": noise_sd, "seed": seed})


def make_circles(n=300, noise_sd=0.05, radius_ratio=0.5, seed=0):
    if n < 2:
        raise ValueError("make_circles needs n >= 2")
    if not 0 < radius_ratio < 1:
        raise ValueError("radius_ratio must lie in (0, 1)")
    rng = make_rng(seed)
    n_out, n_in = _split(n, 2)
    t_out = np.linspace(0.0, 2 * np.pi, n_out, endpoint=False)
    t_in = np.linspace(0.0, 2 * np.pi, n_in, endpoint=False)
    X = np.vstack([
        np.column_stack([np.cos(t_out), np.sin(t_out)]),
        radius_ratio * np.column_stack([np.cos(t_in), np.sin(t_in)]),
    ])
    y = np.repeat([0, 1], [n_out, n_in])
    X = X + noise_sd * rng.standard_normal(X.shape)
    return LabeledDataset(X, y, "circles",
                          {"n": n, "noise_sd": noise_sd, "radius_ratio": radius_ratio, "seed": seed})


def make_spiral(n=300, turns=2.0, noise_sd=0.05, seed=0):
    """Two interleaved Archimedean arms; radius grows linearly along each arm."""
    if n < 2:
        raise ValueError("make_spiral needs n >= 2")
    rng = make_rng(seed)
    parts, labels = [], []
    for arm, m in enumerate(_split(n, 2)):
        t = np.linspace(0.05, 1.0, m)
        angle = 2 * np.pi * turns * t + arm * np.pi
        parts.append(np.column_stack([t * np.cos(angle), t * np.sin(angle)]))
        labels.append(np.full(m, arm))
    X = np.vstack(parts) + noise_sd * rng.standard_normal((n, 2))
    return LabeledDataset(X, np.concatenate(labels), "spiral",
                          {"n": n, "turns": turns, "noise_sd": noise_sd, "seed": seed})


def make_blobs(n=400, k=4, centers_box=(-10.0, 10.0), cluster_sd=1.0, d=2, seed=0):
    if n < k:
        raise ValueError(f"make_blobs needs n >= k, got n={n}, k={k}")
    rng = make_rng(seed)
    lo, hi = centers_box
    centers = rng.uniform(lo, hi, size=(k, d))
    y = np.repeat(np.arange(k), _split(n, k))
    X = centers[y] + cluster_sd * rng.standard_normal((n, d))
    return LabeledDataset(X, y, "blobs", {"n": n, "k": k, "centers_box": list(centers_box),
                                          "cluster_sd": cluster_sd, "d": d, "seed": seed,
                                          "centers": centers.tolist()})


def make_madelon_style(n=100, d=10, d_informative=5, separation=4.0, seed=0):
    """Two Gaussian classes whose means differ by ``separation`` (Euclidean) within
    the first ``d_informative`` coordinates; every coordinate carries unit noise."""
    if d_informative > d:
        raise ValueError(f"d_informative={d_informative} exceeds d={d}")
    rng = make_rng(seed)
    y = np.repeat([0, 1], _split(n, 2))
    mu = np.zeros(d)
    mu[:d_informative] = separation / (2.0 * np.sqrt(d_informative))
    X = rng.standard_normal((n, d)) + np.where(y[:, None] == 0, -mu, mu)
    return LabeledDataset(X, y, "madelon",
                          {"n": n, "d": d, "d_informative": d_informative,
                           "separation": separation, "seed": seed})


def standardize(X):
    X = np.asarray(X, float)
    sd = X.std(axis=0)
    sd[sd == 0] = 1.0
    return (X - X.mean(axis=0)) / sd


def _is_number(cell):
    try:
        float(cell)
        return True
    except ValueError:
        return False


def load_csv(path, label_column="last", name=None):
    """Read a rectangular numeric CSV.

    ``label_column`` is ``"last"``, an integer column index, or ``None`` for
    an unlabeled file. A first row containing any non-numeric cell is taken
    as a header.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty CSV")
    header = None
    if not all(_is_number(c) for c in rows[0]):
        header, rows = rows[0], rows[1:]
    if not rows:
        raise DataError(f"{path}: header only, no data rows")
    width = len(rows[0])
    data = np.empty((len(rows), width))
    for i, r in enumerate(rows):
        line = i + 1 + (header is not None)
        if len(r) != width:
            raise DataError(f"{path}: line {line} has {len(r)} columns, expected {width}")
        for j, c in enumerate(r):
            try:
                data[i, j] = float(c)
            except ValueError:
                raise DataError(f"{path}: line {line}, column {j + 1}: non-numeric cell {c!r}") from None
    if not np.all(np.isfinite(data)):
        bad = np.argwhere(~np.isfinite(data))[0]
        raise DataError(f"{path}: non-finite value at line {bad[0] + 1}, column {bad[1] + 1}")
    labels = None
    if label_column is not None:
        col = width - 1 if label_column == "last" else int(label_column)
        labels = data[:, col]
        if not np.all(labels == np.round(labels)):
            raise DataError(f"{path}: label column {col + 1} is not integer-valued")
        labels = labels.astype(np.int64)
        data = np.delete(data, col, axis=1)
    return LabeledDataset(data, labels, name or str(path), {"path": str(path), "header": header})


def save_csv(dataset, path, header=True):
    X = dataset.features
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if header:
            cols = [f"x{j}" for j in range(X.shape[1])]
            if dataset.labels is not None:
                cols.append("label")
            w.writerow(cols)
        for i in range(X.shape[0]):
            row = [repr(float(v)) for v in X[i]]
            if dataset.labels is not None:
                row.append(str(int(dataset.labels[i])))
            w.writerow(row)
