"""Causal-direction criteria for a pair of categorical variables."""
from __future__ import annotations

import dataclasses
import enum
import json
import math
from dataclasses import dataclass

import numpy as np

from .coupling import coupling_entropy, greedy_mec
from .dist import as_joint, shannon_bits
from .estimation import entropy_estimate

TIE_TOL = 1e-12
CRITERIA = ("exogenous", "total", "conditional", "observed")


class Direction(str, enum.Enum):
    XtoY = "XtoY"
    YtoX = "YtoX"
    Undecided = "Undecided"

    def flipped(self) -> "Direction":
        return {Direction.XtoY: Direction.YtoX, Direction.YtoX: Direction.XtoY}.get(self, self)


@dataclass(frozen=True)
class Verdict:
    direction: Direction
    criterion: str
    h_x: float
    h_y: float
    h_exo_fwd: float | None = None
    h_exo_bwd: float | None = None
    max_cond_fwd: float | None = None
    max_cond_bwd: float | None = None
    threshold_used: float | None = None
    note: str = ""

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["direction"] = self.direction.value
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _compare(fwd: float, bwd: float) -> Direction:
    """Smaller forward score means X -> Y."""
    if abs(fwd - bwd) <= TIE_TOL:
        return Direction.Undecided
    return Direction.XtoY if fwd < bwd else Direction.YtoX


def _slices(table: np.ndarray) -> list[np.ndarray]:
    """Row conditionals of ``table`` over rows with positive weight."""
    w = table.sum(axis=1)
    return [row / s for row, s in zip(table, w) if s > 0]


def exogenous_entropies(j) -> tuple[float, float]:
    """Greedy-MEC entropy of {p(Y|x)} (forward) and of {p(X|y)} (backward)."""
    j = as_joint(j)
    fwd = coupling_entropy(greedy_mec(_slices(j)))
    bwd = coupling_entropy(greedy_mec(_slices(j.T)))
    return fwd, bwd


def _marginals(j: np.ndarray) -> tuple[float, float]:
    return shannon_bits(j.sum(axis=1)), shannon_bits(j.sum(axis=0))


def infer_exogenous(j) -> Verdict:
    j = as_joint(j)
    hx, hy = _marginals(j)
    fwd, bwd = exogenous_entropies(j)
    return Verdict(_compare(fwd, bwd), "exogenous", hx, hy, fwd, bwd)


def infer_total(j) -> Verdict:
    j = as_joint(j)
    hx, hy = _marginals(j)
    fwd, bwd = exogenous_entropies(j)
    return Verdict(_compare(hx + fwd, hy + bwd), "total", hx, hy, fwd, bwd)


def infer_observed(j) -> Verdict:
    j = as_joint(j)
    hx, hy = _marginals(j)
    # the cause is declared to be the higher-entropy variable
    return Verdict(_compare(hy, hx), "observed", hx, hy)


def _max_slice_entropy(table: np.ndarray, counts: bool, min_slice: int, method: str) -> float | None:
    best = None
    for row in table:
        w = row.sum()
        if w <= 0 or (counts and w < min_slice):
            continue
        h = entropy_estimate(row, method) if counts else shannon_bits(row / w)
        best = h if best is None else max(best, h)
    return best


def infer_conditional(j_or_counts, min_slice: int = 1, method: str = "miller_madow") -> Verdict:
    """Compare max_y H(X | Y=y) with max_x H(Y | X=x).

    Given an integer count table, only slices holding at least ``min_slice``
    samples are admissible and slice entropies use ``method``; a float table
    is treated as an exact joint.
    """
    arr = np.asarray(j_or_counts)
    counts = np.issubdtype(arr.dtype, np.integer)
    if counts:
        if min_slice < 1:
            raise ValueError("min_slice must be >= 1")
        if arr.sum() <= 0:
            raise ValueError("empty count table")
        j = arr / arr.sum()
    else:
        j = as_joint(arr)
    hx, hy = _marginals(j)
    fwd = _max_slice_entropy(arr, counts, min_slice, method)
    bwd = _max_slice_entropy(arr.T, counts, min_slice, method)
    if fwd is None or bwd is None:
        side = "forward" if fwd is None else "backward"
        return Verdict(Direction.Undecided, "conditional", hx, hy, None, None, fwd, bwd,
                       note=f"no admissible {side} slice")
    # a larger backward conditional entropy points to X -> Y
    return Verdict(_compare(fwd, bwd), "conditional", hx, hy, None, None, fwd, bwd)


def scores(j_or_counts, min_slice: int = 1, method: str = "miller_madow") -> dict[str, Verdict]:
    """All four verdicts, sharing one pair of MEC computations."""
    arr = np.asarray(j_or_counts)
    j = arr / arr.sum() if np.issubdtype(arr.dtype, np.integer) else as_joint(arr)
    hx, hy = _marginals(j)
    fwd, bwd = exogenous_entropies(j)
    cond = infer_conditional(arr, min_slice, method)
    return {
        "exogenous": Verdict(_compare(fwd, bwd), "exogenous", hx, hy, fwd, bwd),
        "total": Verdict(_compare(hx + fwd, hy + bwd), "total", hx, hy, fwd, bwd),
        "conditional": cond,
        "observed": Verdict(_compare(hy, hx), "observed", hx, hy),
    }


def infer(j_or_counts, criterion: str, min_slice: int = 1) -> Verdict:
    arr = np.asarray(j_or_counts)
    if criterion == "conditional":
        return infer_conditional(arr, min_slice)
    j = arr / arr.sum() if np.issubdtype(arr.dtype, np.integer) else arr
    fn = {"exogenous": infer_exogenous, "total": infer_total, "observed": infer_observed}
    if criterion not in fn:
        raise ValueError(f"unknown criterion {criterion!r}; choose from {CRITERIA}")
    return fn[criterion](j)


def thresholded_decision(v: Verdict, t: float, n_states: int) -> Verdict:
    """Abstain unless one direction's exogenous entropy is at most t * log2(n_states)."""
    if t < 0:
        raise ValueError("threshold must be non-negative")
    if v.h_exo_fwd is None or v.h_exo_bwd is None:
        raise ValueError("verdict carries no exogenous entropies")
    limit = t * math.log2(n_states)
    direction = v.direction
    if min(v.h_exo_fwd, v.h_exo_bwd) > limit:
        direction = Direction.Undecided
    return dataclasses.replace(v, direction=direction, threshold_used=t)
