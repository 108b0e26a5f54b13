"""Finite-sample machinery: i.i.d. draws, plug-in estimates, entropy estimators."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dist import shannon_bits, as_joint, slice_axis


@dataclass(frozen=True)
class SampleSet:
    """Paired observations with 0-based states."""

    x: np.ndarray
    y: np.ndarray
    n: int
    m: int

    def __post_init__(self):
        if self.x.shape != self.y.shape:
            raise ValueError("x and y must have equal length")
        if self.x.size and (self.x.min() < 0 or self.x.max() >= self.n):
            raise ValueError(f"x states outside declared support of {self.n}")
        if self.y.size and (self.y.min() < 0 or self.y.max() >= self.m):
            raise ValueError(f"y states outside declared support of {self.m}")

    @property
    def N(self) -> int:
        return int(self.x.size)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y"])
            w.writerows(zip((self.x + 1).tolist(), (self.y + 1).tolist()))

    @classmethod
    def from_csv(cls, path, n: int | None = None, m: int | None = None) -> "SampleSet":
        """Read a two-column CSV of 1-based states (header row optional)."""
        rows = []
        with open(Path(path), newline="") as fh:
            for k, row in enumerate(csv.reader(fh)):
                if not row or not "".join(row).strip():
                    continue
                if k == 0 and not row[0].strip().lstrip("-").isdigit():
                    continue
                if len(row) != 2:
                    raise ValueError(f"line {k + 1}: expected 2 columns, got {len(row)}")
                rows.append((int(row[0]), int(row[1])))
        if not rows:
            raise ValueError(f"{path}: no samples")
        arr = np.asarray(rows, dtype=np.int64) - 1
        n = int(arr[:, 0].max()) + 1 if n is None else n
        m = int(arr[:, 1].max()) + 1 if m is None else m
        return cls(arr[:, 0], arr[:, 1], n, m)


def draw_samples(j, N: int, rng: np.random.Generator) -> SampleSet:
    j = as_joint(j)
    if N < 0:
        raise ValueError("N must be >= 0")
    n, m = j.shape
    p = j.ravel() / j.sum()
    flat = rng.choice(p.size, size=N, p=p) if N else np.zeros(0, dtype=np.int64)
    return SampleSet(flat // m, flat % m, n, m)


def draw_counts(j, N: int, rng: np.random.Generator) -> np.ndarray:
    """Count table of N i.i.d. draws; same law as tallying ``draw_samples``."""
    j = as_joint(j)
    p = j.ravel() / j.sum()
    return rng.multinomial(N, p).reshape(j.shape)


def plugin_joint(s: SampleSet) -> tuple[np.ndarray, np.ndarray]:
    if s.N == 0:
        raise ValueError("cannot estimate from zero samples")
    counts = np.zeros((s.n, s.m), dtype=np.int64)
    np.add.at(counts, (s.x, s.y), 1)
    return counts, counts / s.N


def entropy_estimate(counts, method: str = "plugin") -> float:
    """Entropy (bits) estimated from a count vector.

    ``miller_madow`` adds the first-order bias correction (K - 1) / (2 N ln 2),
    K being the number of occupied bins.
    """
    c = np.asarray(counts)
    if np.any(c < 0):
        raise ValueError("counts must be non-negative")
    N = c.sum()
    if N <= 0:
        raise ValueError("counts are all zero")
    h = shannon_bits(c / N)
    if method == "plugin":
        return h
    if method == "miller_madow":
        k = int(np.count_nonzero(c))
        return h + (k - 1) / (2.0 * N * math.log(2.0))
    raise ValueError(f"unknown method {method!r}")


def conditional_linf_error(true_j, est_j, axis: str = "X|Y") -> float:
    """Largest absolute error of the estimated conditionals along ``axis``.

    Slices with zero true weight are skipped; a slice the estimate never saw
    while the truth gives it weight counts as infinite error.
    """
    t = np.asarray(true_j, dtype=float)
    e = np.asarray(est_j, dtype=float)
    if t.shape != e.shape:
        raise ValueError("joints differ in shape")
    if slice_axis(axis) == 1:
        t, e = t.T, e.T
    tw, ew = t.sum(axis=1), e.sum(axis=1)
    live = tw > 0
    if np.any(ew[live] <= 0):
        return math.inf
    if not live.any():
        return 0.0
    diff = t[live] / tw[live, None] - e[live] / ew[live, None]
    return float(np.abs(diff).max())


def sufficient_sample_size(j) -> int:
    """Samples sufficient for 1 / (n^2 ln n) conditional accuracy: 6 n^4 a^-2 ln^3 n."""
    j = as_joint(j)
    n = max(j.shape)
    alpha = min(j.sum(axis=1).min(), j.sum(axis=0).min())
    if alpha <= 0:
        raise ValueError("joint must have strictly positive marginals")
    return math.ceil(6 * n**4 * alpha**-2 * math.log(n) ** 3)
