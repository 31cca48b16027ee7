"""Stream construction: synthetic drifting concepts, local dataset loading,
and the per-segment label-shift transform for multiclass data.

Streams are plain float64 arrays wrapped in small dataclasses; all
randomness flows through numpy Generators (PCG64) seeded explicitly, so a
given (scenario, seed) always reproduces the same bytes.
"""

import math
from dataclasses import dataclass

import numpy as np


class ParseError(ValueError):
    """Malformed dataset file; carries the offending line number."""


@dataclass(frozen=True)
class Stream:
    """A finite labeled stream: X is (T, d), y is (T,) in {-1, +1}."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if len(self.X) != len(self.y):
            raise ValueError("X and y length mismatch")

    def __len__(self):
        return len(self.y)

    @property
    def dim(self):
        return self.X.shape[1]


@dataclass(frozen=True)
class ReferenceSequence:
    """Per-round comparator vectors u_t, shape (T, d)."""

    U: np.ndarray

    def __len__(self):
        return len(self.U)

    def total_drift(self):
        """Sum of squared consecutive differences over all rounds."""
        if len(self.U) < 2:
            return 0.0
        diffs = np.diff(self.U, axis=0)
        return float(np.sum(diffs * diffs))

    def drift_over(self, rounds):
        """Drift restricted to the given (sorted) round indices."""
        rounds = np.asarray(rounds, dtype=int)
        if len(rounds) < 2:
            return 0.0
        sel = self.U[rounds]
        diffs = np.diff(sel, axis=0)
        return float(np.sum(diffs * diffs))


@dataclass(frozen=True)
class DriftScenario:
    """Synthetic generator settings: Gaussian inputs, piecewise-constant
    Gaussian target redrawn every segment_length rounds."""

    T: int = 10000
    d: int = 50
    segment_length: int = 500
    seed: object = 0

    def __post_init__(self):
        if self.T < 1 or self.d < 1 or self.segment_length < 1:
            raise ValueError("T, d and segment_length must be >= 1")


def generate_synthetic_drift(scenario, rng=None):
    """Generate a drifting stream and its true reference sequence.

    Draw order is fixed for reproducibility: first one target vector per
    segment, then the full input block.  Labels are y = sign(x . u) with
    sign(0) = +1.
    """
    if rng is None:
        rng = np.random.default_rng(scenario.seed)
    T, d, seg = scenario.T, scenario.d, scenario.segment_length
    n_segments = math.ceil(T / seg)
    targets = rng.standard_normal((n_segments, d))
    X = rng.standard_normal((T, d))
    U = np.repeat(targets, seg, axis=0)[:T]
    raw = np.einsum("td,td->t", X, U)
    y = np.where(raw >= 0.0, 1, -1)
    return Stream(X=X, y=y), ReferenceSequence(U=U)


@dataclass(frozen=True)
class ShiftSpec:
    """Per-segment relabeling of multiclass data into a binary stream.

    Each segment gets a positive subset of the class universe; the subset
    must be proper and nonempty so both classes occur.  Explicit
    ``subsets`` override the random draw (mainly for tests).  ``shuffle``
    applies one global permutation before segmentation.
    """

    segment_length: int = 500
    classes: tuple = tuple(range(10))
    seed: object = 0
    shuffle: bool = True
    subsets: tuple | None = None

    def __post_init__(self):
        if self.segment_length < 1:
            raise ValueError("segment_length must be >= 1")
        if len(self.classes) < 2:
            raise ValueError("class universe needs at least two classes")
        if self.subsets is not None:
            for s in self.subsets:
                _check_proper_subset(set(s), set(self.classes))


def _check_proper_subset(subset, universe):
    if not subset or subset == universe:
        raise ValueError(
            f"positive subset must be proper and nonempty, got {sorted(subset)}"
        )
    if not subset <= universe:
        raise ValueError(f"subset {sorted(subset)} outside class universe")


def _draw_proper_subset(classes, rng):
    """Uniform draw over nonempty proper subsets via rejection sampling."""
    n = len(classes)
    while True:
        mask = rng.random(n) < 0.5
        if 0 < mask.sum() < n:
            return {c for c, m in zip(classes, mask) if m}


def apply_label_shifts(X, raw_labels, spec, rng=None):
    """Turn multiclass examples into a binary shifting stream.

    Returns (Stream, subsets) where subsets[i] is the positive class set
    used for segment i.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    X = np.asarray(X, dtype=float)
    raw_labels = np.asarray(raw_labels)
    universe = set(spec.classes)
    present = set(np.unique(raw_labels).tolist())
    if not present <= universe:
        raise ValueError(f"labels {sorted(present - universe)} outside class universe")

    if spec.shuffle:
        order = rng.permutation(len(X))
        X, raw_labels = X[order], raw_labels[order]

    n_segments = math.ceil(len(X) / spec.segment_length)
    subsets = []
    for i in range(n_segments):
        if spec.subsets is not None:
            chosen = set(spec.subsets[i % len(spec.subsets)])
            _check_proper_subset(chosen, universe)
        else:
            chosen = _draw_proper_subset(spec.classes, rng)
        subsets.append(chosen)

    y = np.empty(len(X), dtype=int)
    for i, subset in enumerate(subsets):
        sl = slice(i * spec.segment_length, (i + 1) * spec.segment_length)
        y[sl] = np.where(np.isin(raw_labels[sl], sorted(subset)), 1, -1)
    return Stream(X=X, y=y), subsets


def load_dataset(path, fmt="dense-csv"):
    """Load (X, raw_labels) from a local file.

    dense-csv: one example per line, label first, then the d features.
    sparse-index-value: "label idx:val ..." lines with 1-based indices;
    the dimension is the largest index seen.
    """
    if fmt == "dense-csv":
        return _load_dense_csv(path)
    if fmt == "sparse-index-value":
        return _load_sparse(path)
    raise ValueError(f"unknown dataset format: {fmt}")


def _load_dense_csv(path):
    rows, labels, dim = [], [], None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                values = [float(p) for p in parts]
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            if len(values) < 2:
                raise ParseError(f"{path}:{lineno}: need a label and >=1 feature")
            if dim is None:
                dim = len(values) - 1
            elif len(values) - 1 != dim:
                raise ParseError(
                    f"{path}:{lineno}: expected {dim} features, got {len(values) - 1}"
                )
            labels.append(values[0])
            rows.append(values[1:])
    if not rows:
        raise ParseError(f"{path}: empty dataset")
    return np.asarray(rows, dtype=float), np.asarray(labels)


def _load_sparse(path):
    entries, labels, dim = [], [], 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            try:
                label = float(parts[0])
                pairs = []
                for tok in parts[1:]:
                    idx_s, val_s = tok.split(":", 1)
                    idx = int(idx_s)
                    if idx < 1:
                        raise ValueError(f"index {idx} not 1-based")
                    pairs.append((idx, float(val_s)))
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            labels.append(label)
            entries.append(pairs)
            dim = max(dim, max((i for i, _ in pairs), default=0))
    if not entries:
        raise ParseError(f"{path}: empty dataset")
    X = np.zeros((len(entries), dim))
    for row, pairs in enumerate(entries):
        for idx, val in pairs:
            X[row, idx - 1] = val
    return X, np.asarray(labels)


def save_dense_csv(path, X, labels):
    """Write examples in the dense-csv layout with full float precision."""
    X = np.asarray(X, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for label, row in zip(labels, X):
            fh.write(",".join([repr(float(label))] + [repr(float(v)) for v in row]))
            fh.write("\n")
