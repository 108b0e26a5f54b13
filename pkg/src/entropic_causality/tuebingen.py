"""Cause-effect pairs benchmark: loading, uniform quantisation, thresholded evaluation.

The dataset directory holds ``pairNNNN.txt`` (whitespace-separated numeric
columns) and ``pairmeta.txt`` with one line per pair::

    pair_id cause_first cause_last effect_first effect_last weight

Column ranges are 1-based and inclusive.
"""
from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .experiments import parallel_map, trial_rng
from .inference import Direction, infer_exogenous, thresholded_decision

log = logging.getLogger(__name__)

META_NAME = "pairmeta.txt"


@dataclass
class PairRecord:
    id: str
    x_col: np.ndarray
    y_col: np.ndarray
    truth: Direction
    weight: float = 1.0

    @property
    def N(self) -> int:
        return int(self.x_col.size)

    @property
    def uniq_x(self) -> int:
        return int(np.unique(self.x_col).size)

    @property
    def uniq_y(self) -> int:
        return int(np.unique(self.y_col).size)


def _read_meta(path: Path) -> dict[str, tuple[int, int, int, int, float]]:
    meta = {}
    for line in path.read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        pid = parts[0].zfill(4)
        c0, c1, e0, e1 = (int(v) for v in parts[1:5])
        meta[pid] = (c0, c1, e0, e1, float(parts[5]) if len(parts) > 5 else 1.0)
    return meta


def load_pairs(directory, skipped: dict | None = None) -> list[PairRecord]:
    """Scalar cause-effect pairs from ``directory``.

    Pairs that are multivariate or fail to parse are left out; their ids and
    reasons go into ``skipped`` when a dict is passed.
    """
    directory = Path(directory)
    files = sorted(directory.glob("pair[0-9][0-9][0-9][0-9].txt"))
    if not files:
        return []
    meta_path = directory / META_NAME
    if not meta_path.exists():
        raise FileNotFoundError(f"{meta_path} missing")
    meta = _read_meta(meta_path)
    skipped = {} if skipped is None else skipped
    pairs = []
    for f in files:
        pid = f.stem[4:]
        if pid not in meta:
            skipped[pid] = "no metadata"
            continue
        c0, c1, e0, e1, w = meta[pid]
        if c0 != c1 or e0 != e1:
            skipped[pid] = "multivariate"
            log.info("pair %s skipped: multivariate", pid)
            continue
        try:
            data = np.loadtxt(f, ndmin=2)
        except ValueError as exc:
            skipped[pid] = f"unparseable: {exc}"
            log.warning("pair %s skipped: %s", pid, exc)
            continue
        if data.shape[1] < max(c0, e0) or data.shape[0] == 0:
            skipped[pid] = "missing columns"
            continue
        cause, effect = data[:, c0 - 1], data[:, e0 - 1]
        # X is always the lower-numbered column
        if c0 < e0:
            pairs.append(PairRecord(pid, cause, effect, Direction.XtoY, w))
        else:
            pairs.append(PairRecord(pid, effect, cause, Direction.YtoX, w))
    return pairs


def choose_states(b: int, N: int, uniq_x: int, uniq_y: int) -> int:
    return max(1, min(b, N // 10, uniq_x, uniq_y))


def quantization_boundaries(lo: float, hi: float, n: int, perturb: bool = False,
                            rng: np.random.Generator | None = None) -> np.ndarray:
    """Interior cut points lo + (hi - lo) i / n, optionally jittered by U(+-(hi - lo) / 8n)."""
    i = np.arange(1, n)
    cuts = lo + (hi - lo) * i / n
    if perturb and n > 1:
        half = (hi - lo) / (8 * n)
        cuts = cuts + rng.uniform(-half, half, size=cuts.size)
    return cuts


def quantize(col, n: int, perturb: bool = False, rng: np.random.Generator | None = None) -> np.ndarray:
    """Map values to states 1..n by equal-width bins over the observed range.

    A value lying exactly on a cut point goes to the upper bin.
    """
    col = np.asarray(col, dtype=float)
    if n < 1 or col.size == 0:
        raise ValueError("need n >= 1 and a non-empty column")
    lo, hi = float(col.min()), float(col.max())
    if lo == hi or n == 1:
        return np.ones(col.size, dtype=np.int64)
    cuts = quantization_boundaries(lo, hi, n, perturb, rng)
    return np.searchsorted(cuts, col, side="right").astype(np.int64) + 1


def _joint(xs: np.ndarray, ys: np.ndarray, n: int) -> np.ndarray:
    counts = np.zeros((n, n))
    np.add.at(counts, (xs - 1, ys - 1), 1.0)
    return counts / counts.sum()


def _majority(dirs: list[Direction]) -> Direction:
    c = Counter(d for d in dirs if d is not Direction.Undecided)
    if c[Direction.XtoY] > c[Direction.YtoX]:
        return Direction.XtoY
    if c[Direction.YtoX] > c[Direction.XtoY]:
        return Direction.YtoX
    return Direction.Undecided


def _pair_task(task) -> dict:
    pair, b, thresholds, votes, seed, index = task
    n = choose_states(b, pair.N, pair.uniq_x, pair.uniq_y)
    rng = trial_rng(seed, index)
    perturb = votes > 1
    verdicts = []
    for _ in range(votes):
        xs = quantize(pair.x_col, n, perturb, rng)
        ys = quantize(pair.y_col, n, perturb, rng)
        verdicts.append(infer_exogenous(_joint(xs, ys, n)))
    per_t = {}
    for t in thresholds:
        dirs = [thresholded_decision(v, t, n).direction for v in verdicts]
        per_t[repr(float(t))] = _majority(dirs).value
    return {
        "id": pair.id,
        "truth": pair.truth.value,
        "weight": pair.weight,
        "n": n,
        "N": pair.N,
        "h_exo_fwd": [v.h_exo_fwd for v in verdicts],
        "h_exo_bwd": [v.h_exo_bwd for v in verdicts],
        "decisions": per_t,
    }


@dataclass
class BenchmarkResult:
    b: int
    votes: int
    rows: list[dict]
    pairs: list[dict] = field(default_factory=list)

    COLUMNS = ("threshold", "pairs_decided", "accuracy", "weighted_accuracy")

    def to_csv_text(self) -> str:
        lines = [",".join(self.COLUMNS)]
        for r in self.rows:
            lines.append(",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c]) for c in self.COLUMNS))
        return "\n".join(lines) + "\n"

    def pair_log_json(self) -> str:
        return json.dumps({"b": self.b, "votes": self.votes, "pairs": self.pairs}, indent=1)


def run_benchmark(pairs: list[PairRecord], b: int = 10, thresholds=(0.7, 0.8, 0.85, 0.9, 1.0, 1.2),
                  votes: int = 1, seed: int = 0, workers: int = 1) -> BenchmarkResult:
    """Thresholded exogenous-entropy decisions on quantised pairs.

    With ``votes > 1`` every vote uses freshly jittered cut points and the
    majority among decided votes wins; a split is undecided.
    """
    if votes < 1:
        raise ValueError("votes must be >= 1")
    if any(t <= 0 for t in thresholds):
        raise ValueError("thresholds must be positive")
    tasks = [(p, b, list(thresholds), votes, seed, k) for k, p in enumerate(pairs)]
    logs = parallel_map(_pair_task, tasks, workers)
    rows = []
    for t in thresholds:
        key = repr(float(t))
        decided = [p for p in logs if p["decisions"][key] != Direction.Undecided.value]
        right = [p for p in decided if p["decisions"][key] == p["truth"]]
        wsum = sum(p["weight"] for p in decided)
        rows.append({
            "threshold": float(t),
            "pairs_decided": len(decided),
            "accuracy": len(right) / len(decided) if decided else math.nan,
            "weighted_accuracy": sum(p["weight"] for p in right) / wsum if wsum else math.nan,
        })
    return BenchmarkResult(b, votes, rows, logs)
