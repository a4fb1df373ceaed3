"""Labeled data generation, CSV ingestion, and per-node partitioning.

Labels are always mapped to {+1, -1}. Per-node training splits are
disjoint draws without replacement from the pool; test splits are drawn
from the remaining pool independently per node, so test sets may overlap
across nodes when the pool is small, but training sets never do.

Features are used at their raw scale by default. ``minmax_scale`` is
available for datasets whose feature magnitudes span orders of magnitude.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadCovariance,
    InsufficientData,
    MissingColumn,
    NonNumericFeature,
    ParseError,
    SingleClassNode,
)
from .topology import Topology

__all__ = [
    "LabeledSet",
    "NodePartition",
    "gen_gaussian",
    "gen_spambase_like",
    "load_csv",
    "minmax_scale",
    "partition",
    "augment",
]


@dataclass(frozen=True)
class LabeledSet:
    """Feature matrix (N x p) with labels in {+1, -1}."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        labs = np.asarray(self.labels, dtype=float)
        if feats.ndim != 2 or labs.ndim != 1 or feats.shape[0] != labs.shape[0]:
            raise ValueError(f"bad shapes {feats.shape} / {labs.shape}")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features contain NaN or Inf")
        if labs.size and not np.all(np.isin(labs, (-1.0, 1.0))):
            raise ValueError("labels must be +1 or -1")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)

    def __len__(self) -> int:
        return self.labels.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass
class NodePartition:
    """Per-node train/test splits plus the stacked training encodings.

    ``augmented[v]`` is the train feature matrix with a trailing all-ones
    column (N_v x (p+1)); ``label_diag[v]`` is the diagonal of the label
    matrix (the labels vector). Both are filled by :func:`augment`.
    """

    train: list[LabeledSet]
    test: list[LabeledSet]
    augmented: list[np.ndarray] = field(default_factory=list)
    label_diag: list[np.ndarray] = field(default_factory=list)

    @property
    def node_count(self) -> int:
        return len(self.train)

    @property
    def dim(self) -> int:
        return self.train[0].dim


def gen_gaussian(n_per_class: int, mean_pos, mean_neg, covariance, seed: int) -> LabeledSet:
    """Two Gaussian classes with a shared covariance; +1 first, then -1."""
    if n_per_class < 1:
        raise InsufficientData("n_per_class must be >= 1")
    mean_pos = np.asarray(mean_pos, dtype=float)
    mean_neg = np.asarray(mean_neg, dtype=float)
    cov = np.asarray(covariance, dtype=float)
    if cov.shape != (mean_pos.size, mean_pos.size) or mean_pos.size != mean_neg.size:
        raise BadCovariance(f"covariance shape {cov.shape} does not match means")
    if not np.allclose(cov, cov.T):
        raise BadCovariance("covariance must be symmetric")
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise BadCovariance("covariance must be positive definite") from None
    rng = np.random.default_rng(seed)
    xp = rng.multivariate_normal(mean_pos, cov, size=n_per_class)
    xn = rng.multivariate_normal(mean_neg, cov, size=n_per_class)
    feats = np.vstack([xp, xn])
    labs = np.concatenate([np.ones(n_per_class), -np.ones(n_per_class)])
    return LabeledSet(feats, labs)


def gen_spambase_like(n_rows: int, seed: int, sep: float = 0.45,
                      label_noise: float = 0.04) -> LabeledSet:
    """Synthetic 57-feature stand-in for a spam-classification table.

    This is NOT the UCI Spambase data; it is a generated surrogate with a
    similar shape: 48 zero-inflated word-frequency columns, 6 character
    frequency columns, and 3 heavy-tailed capital-run columns whose scale
    dwarfs the frequency features. ``sep`` controls class separation and
    ``label_noise`` the fraction of flipped labels; the defaults give a
    pooled linear-SVM risk near 0.1, comparable to the real table.
    """
    rng = np.random.default_rng(seed)
    y = np.where(rng.random(n_rows) < 0.4, 1.0, -1.0)
    X = np.zeros((n_rows, 57))
    pos = y > 0
    for j in range(48):
        if j < 16:      # spam-indicative words
            q_pos, m_pos = 0.25 + 0.3 * sep, 0.25 + (0.25 + 0.03 * j) * sep
            q_neg, m_neg = 0.25, 0.25
        elif j < 32:    # ham-indicative words
            q_pos, m_pos = 0.25, 0.25
            q_neg, m_neg = 0.25 + 0.3 * sep, 0.25 + (0.2 + 0.025 * (j - 16)) * sep
        else:           # uninformative
            q_pos, m_pos, q_neg, m_neg = 0.25, 0.3, 0.25, 0.3
        nz = rng.random(n_rows) < np.where(pos, q_pos, q_neg)
        vals = rng.exponential(np.where(pos, m_pos, m_neg))
        X[:, j] = np.where(nz, vals, 0.0)
    for j in range(48, 54):
        if j % 2 == 0:
            q_pos, m_pos, q_neg, m_neg = 0.3 + 0.3 * sep, 0.1 + 0.15 * sep, 0.3, 0.1
        else:
            q_pos, m_pos, q_neg, m_neg = 0.3, 0.1, 0.3 + 0.2 * sep, 0.1 + 0.08 * sep
        nz = rng.random(n_rows) < np.where(pos, q_pos, q_neg)
        vals = rng.exponential(np.where(pos, m_pos, m_neg))
        X[:, j] = np.where(nz, vals, 0.0)
    X[:, 54] = rng.lognormal(np.where(pos, 0.7 + 0.9 * sep, 0.7), 0.45)
    X[:, 55] = rng.lognormal(np.where(pos, 1.8 + 1.2 * sep, 1.8), 0.5)
    X[:, 56] = rng.lognormal(np.where(pos, 3.0 + 1.2 * sep, 3.0), 0.5)
    flips = rng.random(n_rows) < label_noise
    return LabeledSet(X, np.where(flips, -y, y))


def _cell_to_float(cell: str, row: int, col: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise NonNumericFeature(
            f"row {row}, column {col}: {cell!r} is not numeric") from None


def load_csv(path, label_column, positive_label) -> LabeledSet:
    """Read a numeric CSV into a LabeledSet.

    A non-numeric first row is treated as a header. ``label_column`` is a
    column name (requires a header) or a 0-based index. Cells equal to
    ``positive_label`` (numeric comparison when both sides parse, string
    comparison otherwise) map to +1, everything else to -1. A blank line
    ends the data.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = []
        for row in csv.reader(fh):
            if not row or all(not c.strip() for c in row):
                break  # blank line terminates the data
            rows.append([c.strip() for c in row])
    if not rows:
        raise ParseError(f"{path}: no data rows")

    header = None
    first = rows[0]
    if any(not _is_floatable(c) for c in first):
        header = first
        rows = rows[1:]
        if not rows:
            raise ParseError(f"{path}: header only, no data rows")

    if isinstance(label_column, str):
        if header is None or label_column not in header:
            raise MissingColumn(f"label column {label_column!r} not found")
        label_idx = header.index(label_column)
    else:
        label_idx = int(label_column)
        ncol = len(rows[0])
        if not (-ncol <= label_idx < ncol):
            raise MissingColumn(f"label column index {label_idx} out of range")
        label_idx %= ncol

    width = len(rows[0])
    feats, labs = [], []
    pos_str = str(positive_label).strip()
    pos_num = float(positive_label) if _is_floatable(pos_str) else None
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"row {i}: expected {width} cells, got {len(row)}")
        raw_label = row[label_idx]
        if pos_num is not None and _is_floatable(raw_label):
            is_pos = float(raw_label) == pos_num
        else:
            is_pos = raw_label == pos_str
        labs.append(1.0 if is_pos else -1.0)
        feats.append([_cell_to_float(c, i, j)
                      for j, c in enumerate(row) if j != label_idx])
    return LabeledSet(np.asarray(feats), np.asarray(labs))


def _is_floatable(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def minmax_scale(data: LabeledSet) -> LabeledSet:
    """Rescale each feature column to [0, 1]; constant columns become 0."""
    lo = data.features.min(axis=0)
    span = data.features.max(axis=0) - lo
    span = np.where(span == 0, 1.0, span)
    return LabeledSet((data.features - lo) / span, data.labels)


def partition(data: LabeledSet, topology: Topology, train_per_node,
              test_per_node: int, seed: int) -> NodePartition:
    """Split a pool across the graph's nodes and build augmented matrices.

    ``train_per_node`` is a single count or one count per node. Train
    splits are disjoint; each must contain both classes (the permutation
    is redrawn up to 100 times, then :class:`SingleClassNode` is raised).
    """
    V = topology.node_count
    if np.isscalar(train_per_node):
        counts = [int(train_per_node)] * V
    else:
        counts = [int(c) for c in train_per_node]
        if len(counts) != V:
            raise InsufficientData(
                f"got {len(counts)} per-node train counts for {V} nodes")
    if any(c < 2 for c in counts):
        raise InsufficientData("each node needs at least 2 training samples")
    if test_per_node < 1:
        raise InsufficientData("test_per_node must be >= 1")
    n = len(data)
    need = sum(counts)
    if need > n:
        raise InsufficientData(f"need {need} training samples, pool has {n}")
    if need + test_per_node > n:
        raise InsufficientData(
            f"need {need} train + {test_per_node} test samples, pool has {n}")

    rng = np.random.default_rng(seed)
    perm = None
    for _ in range(100):
        cand = rng.permutation(n)
        ofs, ok = 0, True
        for c in counts:
            labs = data.labels[cand[ofs:ofs + c]]
            ofs += c
            if labs.max() == labs.min():
                ok = False
                break
        if ok:
            perm = cand
            break
    if perm is None:
        raise SingleClassNode("could not give every node both classes in 100 draws")

    train, ofs = [], 0
    for c in counts:
        idx = perm[ofs:ofs + c]
        ofs += c
        train.append(LabeledSet(data.features[idx], data.labels[idx]))
    rest = perm[ofs:]
    test = []
    for _ in range(V):
        idx = rng.choice(rest, size=test_per_node, replace=False)
        test.append(LabeledSet(data.features[idx], data.labels[idx]))
    return augment(NodePartition(train=train, test=test))


def augment(part: NodePartition) -> NodePartition:
    """(Re)build the stacked train encodings; idempotent."""
    part.augmented = [np.hstack([t.features, np.ones((len(t), 1))]) for t in part.train]
    part.label_diag = [t.labels.copy() for t in part.train]
    return part
