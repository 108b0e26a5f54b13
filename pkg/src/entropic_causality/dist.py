"""Categorical distributions, entropy functionals and simplex samplers.

Distributions are plain 1-D float arrays and joints are 2-D arrays; the
``as_*`` helpers validate them. All entropies are in bits.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SUM_TOL = 1e-9
MAX_HALVINGS = 64


class InfeasibleThreshold(RuntimeError):
    """Raised when the adaptive sampler cannot reach the entropy threshold."""


def as_dist(p, tol: float = SUM_TOL) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("distribution must be a non-empty 1-D vector")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValueError("distribution has negative or non-finite entries")
    if abs(p.sum() - 1.0) > tol:
        raise ValueError(f"distribution sums to {p.sum()!r}, not 1")
    return p


def as_subdist(s, tol: float = SUM_TOL) -> np.ndarray:
    s = np.asarray(s, dtype=float).reshape(-1)
    if np.any(~np.isfinite(s)) or np.any(s < 0) or np.any(s > 1):
        raise ValueError("sub-distribution entries must lie in [0, 1]")
    if s.sum() > 1 + tol:
        raise ValueError(f"sub-distribution sums to {s.sum()!r} > 1")
    return s


def as_joint(j, tol: float = SUM_TOL) -> np.ndarray:
    j = np.asarray(j, dtype=float)
    if j.ndim != 2 or j.size == 0:
        raise ValueError("joint must be a non-empty 2-D table")
    if not np.all(np.isfinite(j)) or np.any(j < 0):
        raise ValueError("joint has negative or non-finite entries")
    if abs(j.sum() - 1.0) > tol:
        raise ValueError(f"joint sums to {j.sum()!r}, not 1")
    return j


def shannon_bits(p: np.ndarray) -> float:
    """Entropy in bits of a non-negative vector, without validation."""
    nz = p[p > 0]
    return float(-np.dot(nz, np.log2(nz))) + 0.0  # avoid -0.0


def entropy(d) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    p = as_dist(d)
    h = shannon_bits(p)
    # clamp accumulated rounding into the analytic range
    return min(max(h, 0.0), float(np.log2(p.size)))


def extended_entropy(s) -> float:
    """``-sum m log2 m`` over a vector that may sum to less than one."""
    return shannon_bits(as_subdist(s))


@dataclass(frozen=True)
class CondFamily:
    """Slice conditionals of a joint.

    ``conds[k]`` is the conditional given the k-th value of the conditioning
    variable, or ``None`` when that value has zero weight.
    """

    conds: list
    weights: np.ndarray

    def present(self) -> list[int]:
        return [k for k, c in enumerate(self.conds) if c is not None]

    def mixture(self) -> np.ndarray:
        size = next(c.size for c in self.conds if c is not None)
        out = np.zeros(size)
        for w, c in zip(self.weights, self.conds):
            if c is not None:
                out += w * c
        return out


_AXES = {"X|Y": 1, "Y|X": 0}


def slice_axis(axis: str) -> int:
    """Array axis indexing the conditioning variable for ``"X|Y"`` / ``"Y|X"``."""
    try:
        return _AXES[axis]
    except KeyError:
        raise ValueError(f"axis must be one of {sorted(_AXES)}, got {axis!r}") from None


def conditional_profile(j, axis: str = "X|Y") -> tuple[CondFamily, np.ndarray]:
    """Slice conditionals along ``axis`` and the entropy of each non-empty slice.

    ``axis="X|Y"`` gives the family p(X | Y=y) over y, ``"Y|X"`` gives p(Y | X=x).
    """
    j = as_joint(j)
    table = j if slice_axis(axis) == 0 else j.T
    weights = table.sum(axis=1)
    conds: list = []
    ents = []
    for w, row in zip(weights, table):
        if w > 0:
            c = row / w
            conds.append(c)
            ents.append(shannon_bits(c))
        else:
            conds.append(None)
    return CondFamily(conds, weights), np.asarray(ents)


def sample_dirichlet(n: int, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """One draw from the symmetric Dirichlet(alpha) on the n-simplex."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if n == 1:
        return np.ones(1)
    if alpha == 1.0:
        e = rng.standard_exponential(n)
        return e / e.sum()
    return rng.dirichlet(np.full(n, float(alpha)))


def sample_low_entropy(
    n: int,
    theta: float,
    rng: np.random.Generator,
    count: int = 1,
    max_halvings: int = MAX_HALVINGS,
) -> np.ndarray:
    """Draw a distribution on n states with entropy at most ``theta`` bits.

    Adaptive scheme: draw ``10 * count`` Dirichlet(alpha) samples starting at
    alpha = 1, halving alpha until at least ``count`` of them meet the
    threshold. Returns one accepted draw picked uniformly (or ``count`` of
    them as rows when ``count > 1``).
    """
    if not theta > 0:
        raise ValueError("theta must be positive")
    if count < 1:
        raise ValueError("count must be >= 1")
    batch = 10 * count
    alpha = 1.0
    for _ in range(max_halvings + 1):
        draws = np.stack([sample_dirichlet(n, alpha, rng) for _ in range(batch)])
        ents = np.array([shannon_bits(d) for d in draws])
        ok = np.flatnonzero(ents <= theta)
        if ok.size >= count:
            pick = rng.choice(ok, size=count, replace=False)
            return draws[pick[0]] if count == 1 else draws[pick]
        alpha *= 0.5
    raise InfeasibleThreshold(
        f"no draw with entropy <= {theta} bits after {max_halvings} halvings"
    )
