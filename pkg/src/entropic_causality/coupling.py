"""Couplings of categorical marginals.

A coupling is stored sparsely as ``{index tuple: mass}``; for t marginals of
n states a dense table would have n**t cells.
"""
from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dist import SUM_TOL, as_dist, shannon_bits

RESIDUAL_EPS = 1e-12


@dataclass
class Coupling:
    shape: tuple[int, ...]
    cells: dict[tuple[int, ...], float] = field(default_factory=dict)

    @property
    def masses(self) -> np.ndarray:
        return np.fromiter(self.cells.values(), dtype=float, count=len(self.cells))

    def projection(self, i: int) -> np.ndarray:
        out = np.zeros(self.shape[i])
        for idx, mass in self.cells.items():
            out[idx[i]] += mass
        return out

    def to_json(self) -> str:
        cells = [{"idx": list(idx), "mass": mass} for idx, mass in self.cells.items()]
        return json.dumps({"shape": list(self.shape), "cells": cells})

    @classmethod
    def from_json(cls, text: str) -> "Coupling":
        doc = json.loads(text)
        cells: dict[tuple[int, ...], float] = {}
        for cell in doc["cells"]:
            idx = tuple(int(i) for i in cell["idx"])
            if idx in cells:
                raise ValueError(f"duplicate cell {idx}")
            cells[idx] = float(cell["mass"])
        return cls(tuple(int(s) for s in doc["shape"]), cells)


def _residual_matrix(marginals) -> np.ndarray:
    """Stack marginals into a zero-padded (t, max n) array."""
    width = max(m.size for m in marginals)
    r = np.zeros((len(marginals), width))
    for i, m in enumerate(marginals):
        r[i, : m.size] = m
    return r


def greedy_mec(marginals) -> Coupling:
    """Greedy approximate minimum-entropy coupling.

    Each step takes every marginal's largest residual entry, places the
    smallest of those maxima at the tuple of argmax indices and subtracts it
    from each. Ties go to the lowest index.
    """
    marginals = [as_dist(m) for m in marginals]
    if not marginals:
        raise ValueError("need at least one marginal")
    shape = tuple(m.size for m in marginals)
    r = _residual_matrix(marginals)
    rows = np.arange(r.shape[0])
    cells: dict[tuple[int, ...], float] = {}
    while True:
        idx = r.argmax(axis=1)
        tops = r[rows, idx]
        mass = tops.min()
        if mass <= RESIDUAL_EPS:
            break
        key = tuple(idx.tolist())
        cells[key] = cells.get(key, 0.0) + float(mass)
        left = tops - mass
        left[left < RESIDUAL_EPS] = 0.0
        r[rows, idx] = left
    return Coupling(shape, cells)


def coupling_entropy(c: Coupling) -> float:
    return shannon_bits(c.masses)


@dataclass
class ValidationReport:
    errors: list[np.ndarray]
    tol: float

    @property
    def max_error(self) -> float:
        return max(float(e.max()) for e in self.errors)

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tol

    def __bool__(self) -> bool:
        return self.passed


def validate_coupling(c: Coupling, marginals, tol: float = SUM_TOL) -> ValidationReport:
    """Per-coordinate projection error of ``c`` against each target marginal."""
    marginals = [np.asarray(m, dtype=float) for m in marginals]
    if tuple(m.size for m in marginals) != tuple(c.shape):
        raise ValueError(f"shape mismatch: coupling {c.shape} vs marginals")
    for idx, mass in c.cells.items():
        if mass < 0 or len(idx) != len(c.shape):
            raise ValueError(f"invalid cell {idx}: {mass}")
    errors = [np.abs(c.projection(i) - m) for i, m in enumerate(marginals)]
    return ValidationReport(errors, tol)


def _plogp(x: float) -> float:
    return -x * math.log2(x) if x > 0 else 0.0


def brute_force_mec_small(marginals) -> Coupling:
    """Exact two-marginal MEC by searching the transportation-polytope vertices.

    Entropy is concave, so its minimum over the polytope sits at a vertex.
    Every vertex has a forest support with a leaf cell carrying
    min(p_i, q_j); saturating such a cell and recursing on the reduced
    marginals therefore reaches every vertex, and only vertices. The search
    is memoised on the residual marginals.
    """
    if len(marginals) != 2:
        raise ValueError("brute force oracle handles exactly two marginals")
    p, q = (as_dist(m) for m in marginals)
    if p.size > 4 or q.size > 4:
        raise ValueError("brute force oracle limited to supports of size <= 4")

    @functools.lru_cache(maxsize=None)
    def best(rp: tuple, rq: tuple) -> tuple[float, tuple]:
        rows = [i for i, v in enumerate(rp) if v > RESIDUAL_EPS]
        cols = [j for j, v in enumerate(rq) if v > RESIDUAL_EPS]
        if not rows or not cols:
            return 0.0, ()
        out = (math.inf, ())
        for i in rows:
            for j in cols:
                x = min(rp[i], rq[j])
                np_ = list(rp)
                nq = list(rq)
                np_[i] = 0.0 if rp[i] <= rq[j] else rp[i] - x
                nq[j] = 0.0 if rq[j] <= rp[i] else rq[j] - x
                h, cells = best(tuple(np_), tuple(nq))
                h += _plogp(x)
                if h < out[0] - 1e-15:
                    out = (h, cells + (((i, j), x),))
        return out

    _, cells = best(tuple(p.tolist()), tuple(q.tolist()))
    merged: dict[tuple[int, ...], float] = {}
    for idx, x in cells:
        merged[idx] = merged.get(idx, 0.0) + x
    return Coupling((p.size, q.size), merged)


def transfer_coupling(p: Coupling, noisy_marginals, delta: float | None = None) -> Coupling:
    """Turn a coupling of some marginals into one for nearby noisy marginals.

    Phase I shrinks cells (proportionally) wherever a projection exceeds its
    noisy target; Phase II couples the leftover per-marginal deficits with
    ``greedy_mec`` and adds that coupling on top.
    """
    noisy = [as_dist(m) for m in noisy_marginals]
    if tuple(m.size for m in noisy) != tuple(p.shape):
        raise ValueError("noisy marginals do not match coupling shape")
    if delta is not None:
        for i, m in enumerate(noisy):
            gap = np.abs(p.projection(i) - m).max()
            if gap > delta + SUM_TOL:
                raise ValueError(f"marginal {i} differs by {gap} > delta={delta}")
    cells = dict(p.cells)
    t = len(noisy)
    # Phase I: each update only shrinks cells, so a coordinate fixed once stays fixed
    for i in range(t):
        proj = np.zeros(p.shape[i])
        for idx, mass in cells.items():
            proj[idx[i]] += mass
        for u in np.flatnonzero(proj > noisy[i]):
            scale = noisy[i][u] / proj[u]
            for idx in cells:
                if idx[i] == u:
                    cells[idx] *= scale
    # Phase II
    residuals = []
    for i in range(t):
        proj = np.zeros(p.shape[i])
        for idx, mass in cells.items():
            proj[idx[i]] += mass
        residuals.append(np.clip(noisy[i] - proj, 0.0, None))
    cells = {idx: m for idx, m in cells.items() if m > 0}
    sums = [r.sum() for r in residuals]
    total = float(np.mean(sums))
    if total > RESIDUAL_EPS:
        # every deficit vector carries the same total mass up to rounding
        normed = [r / s if s > 0 else np.full(r.size, 1.0 / r.size) for r, s in zip(residuals, sums)]
        for idx, mass in greedy_mec(normed).cells.items():
            cells[idx] = cells.get(idx, 0.0) + mass * total
    return Coupling(p.shape, cells)
