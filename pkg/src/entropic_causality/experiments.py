"""Seeded Monte-Carlo sweeps over synthetic cause-effect models.

Every trial draws its generator from ``SeedSequence([seed, tag, cell, trial])``,
so results do not depend on how trials are spread over worker processes.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .dist import shannon_bits
from .estimation import draw_counts
from .inference import CRITERIA, Direction, scores
from .scm import Scm, confounded_joint, sample_confounded, sample_scm, scm_joint

_TAG_SWEEP, _TAG_HIST, _TAG_FINITE, _TAG_CONFOUND = 1, 2, 3, 4


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *key]))


def parallel_map(fn, tasks: list, workers: int = 1) -> list:
    """Ordered map, in-process for one worker and over processes otherwise."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks, chunksize=chunk))


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


@dataclass
class SweepResult:
    columns: list[str]
    rows: list[dict]
    summary: list[dict] = field(default_factory=list)

    def to_csv_text(self, rows: list[dict] | None = None, columns: list[str] | None = None) -> str:
        rows = self.rows if rows is None else rows
        columns = self.columns if columns is None else columns
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])
        return buf.getvalue()

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv_text())

    def summary_csv_text(self) -> str:
        if not self.summary:
            return ""
        return self.to_csv_text(self.summary, list(self.summary[0]))

    def select(self, **match) -> list[dict]:
        return [r for r in self.rows if all(r[k] == v for k, v in match.items())]


@dataclass
class SweepConfig:
    """Grid for the accuracy and confounding sweeps.

    ``n`` and ``m`` are the state counts of X and Y. In mixture mode odd
    trials are generated from Y -> X instead. ``sample_count`` switches to
    plug-in estimates from that many samples.
    """

    n: int = 40
    m: int = 40
    entropy_thresholds: list[float] = field(default_factory=lambda: [1.0])
    trials: int = 200
    criteria: list[str] = field(default_factory=lambda: list(CRITERIA))
    mixture: bool = False
    sample_count: int | None = None
    min_slice: int = 1
    confounder_thresholds: list[float] | None = None
    e_states: int | None = None
    l_states: int | None = None
    seed: int = 0

    def validate(self) -> "SweepConfig":
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for name in ("entropy_thresholds", "confounder_thresholds"):
            ts = getattr(self, name)
            if ts is None:
                continue
            if not ts or any(t <= 0 for t in ts) or list(ts) != sorted(ts):
                raise ValueError(f"{name} must be positive and sorted")
        bad = set(self.criteria) - set(CRITERIA)
        if bad or not self.criteria:
            raise ValueError(f"unknown criteria {sorted(bad)}")
        if self.sample_count is not None and self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        return self


def _truth(cfg: SweepConfig, trial: int) -> Direction:
    return Direction.YtoX if cfg.mixture and trial % 2 else Direction.XtoY


def _evaluate(j: np.ndarray, truth: Direction, cfg: SweepConfig, rng) -> dict:
    if truth is Direction.YtoX:
        j = j.T
    data = j if cfg.sample_count is None else draw_counts(j / j.sum(), cfg.sample_count, rng)
    vs = scores(data, cfg.min_slice)
    v = vs["exogenous"]
    return {
        "dirs": {c: vs[c].direction for c in cfg.criteria},
        "h_fwd": v.h_exo_fwd,
        "h_bwd": v.h_exo_bwd,
    }


def _sweep_trial(task) -> dict:
    cfg, cell, theta, trial = task
    rng = trial_rng(cfg.seed, _TAG_SWEEP, cell, trial)
    truth = _truth(cfg, trial)
    cause, effect = (cfg.n, cfg.m) if truth is Direction.XtoY else (cfg.m, cfg.n)
    model = sample_scm(cause, rng, theta, n_out=effect, m=cfg.e_states or cfg.n * cfg.m)
    return {"truth": truth, **_evaluate(scm_joint(model), truth, cfg, rng)}


def _confound_trial(task) -> dict:
    cfg, cell, theta_e, theta_l, trial = task
    rng = trial_rng(cfg.seed, _TAG_CONFOUND, cell, trial)
    truth = _truth(cfg, trial)
    cause, effect = (cfg.n, cfg.m) if truth is Direction.XtoY else (cfg.m, cfg.n)
    model = sample_confounded(cause, effect, cfg.l_states or cfg.n, theta_e, theta_l, rng,
                              n_e=cfg.e_states or cfg.n * cfg.m)
    return {"truth": truth, **_evaluate(confounded_joint(model), truth, cfg, rng)}


SWEEP_COLUMNS = [
    "theta", "criterion", "trials", "decided", "accuracy", "correct_frac",
    "error_frac", "undecided_frac", "mean_h_exo_fwd", "mean_h_exo_bwd",
]


def _tally(outcomes: list[dict], criterion: str) -> dict:
    correct = sum(o["dirs"][criterion] is o["truth"] for o in outcomes)
    undecided = sum(o["dirs"][criterion] is Direction.Undecided for o in outcomes)
    total = len(outcomes)
    decided = total - undecided
    return {
        "trials": total,
        "decided": decided,
        "accuracy": correct / decided if decided else math.nan,
        "correct_frac": correct / total,
        "error_frac": (decided - correct) / total,
        "undecided_frac": undecided / total,
        "mean_h_exo_fwd": float(np.mean([o["h_fwd"] for o in outcomes])),
        "mean_h_exo_bwd": float(np.mean([o["h_bwd"] for o in outcomes])),
    }


def run_accuracy_sweep(cfg: SweepConfig, workers: int = 1) -> SweepResult:
    """Accuracy of each criterion per exogenous-entropy threshold."""
    cfg.validate()
    tasks = [(cfg, c, th, t) for c, th in enumerate(cfg.entropy_thresholds) for t in range(cfg.trials)]
    out = parallel_map(_sweep_trial, tasks, workers)
    rows = []
    for c, th in enumerate(cfg.entropy_thresholds):
        chunk = out[c * cfg.trials:(c + 1) * cfg.trials]
        for crit in cfg.criteria:
            rows.append({"theta": float(th), "criterion": crit, **_tally(chunk, crit)})
    return SweepResult(SWEEP_COLUMNS, rows)


def run_confounding_sweep(cfg: SweepConfig, workers: int = 1) -> SweepResult:
    """Accuracy per latent-confounder entropy threshold; ``entropy_thresholds[0]`` bounds H(E)."""
    cfg.validate()
    if not cfg.confounder_thresholds:
        raise ValueError("confounder_thresholds required")
    theta_e = cfg.entropy_thresholds[0]
    tasks = [(cfg, c, theta_e, tl, t) for c, tl in enumerate(cfg.confounder_thresholds)
             for t in range(cfg.trials)]
    out = parallel_map(_confound_trial, tasks, workers)
    rows = []
    for c, tl in enumerate(cfg.confounder_thresholds):
        chunk = out[c * cfg.trials:(c + 1) * cfg.trials]
        for crit in cfg.criteria:
            rows.append({"theta": float(theta_e), "h_l": float(tl), "criterion": crit, **_tally(chunk, crit)})
    return SweepResult(["theta", "h_l"] + SWEEP_COLUMNS[1:], rows)


def _hist_trial(task) -> tuple[float, float]:
    n, alpha_frac, seed, trial = task
    rng = trial_rng(seed, _TAG_HIST, n, trial)
    model = sample_scm(n, rng, alpha_frac * math.log2(n))
    v = scores(scm_joint(model))["exogenous"]
    return shannon_bits(model.pe), v.h_exo_bwd


def backward_entropy_samples(n: int, alpha_frac: float, trials: int, seed: int = 0,
                             workers: int = 1) -> list[tuple[float, float]]:
    """(H(E), reverse greedy-MEC entropy) per trial with H(E) <= alpha_frac * log2 n."""
    if not 0 < alpha_frac < 1:
        raise ValueError("alpha_frac must lie in (0, 1)")
    if trials < 0:
        raise ValueError("trials must be >= 0")
    return parallel_map(_hist_trial, [(n, alpha_frac, seed, t) for t in range(trials)], workers)


def histogram_csv_text(points: list[tuple[float, float]]) -> str:
    lines = ["trial,h_e,h_exo_bwd"] + [f"{k},{he!r},{hb!r}" for k, (he, hb) in enumerate(points)]
    return "\n".join(lines) + "\n"


def run_backward_entropy_histogram(n: int, alpha_frac: float, trials: int, seed: int = 0,
                                   workers: int = 1) -> list[float]:
    return [h for _, h in backward_entropy_samples(n, alpha_frac, trials, seed, workers)]


@dataclass
class FiniteSampleConfig:
    """Grid over support size n and sample count N at fixed exogenous entropy.

    ``px="uniform"`` fixes p(X) to the uniform law; ``"dirichlet"`` draws it
    from Dir(1). ``min_slice=None`` uses n, the admissibility filter for the
    conditional criterion.
    """

    n_values: list[int] = field(default_factory=lambda: [20, 50, 80, 110])
    sample_counts: list[int] = field(
        default_factory=lambda: [int(round(10 ** (e / 4))) for e in range(8, 25)]
    )
    theta: float = math.log2(40)
    trials: int = 100
    px: str = "uniform"
    min_slice: int | None = None
    target: float = 0.95
    criteria: list[str] = field(default_factory=lambda: ["exogenous", "conditional"])
    seed: int = 0

    def validate(self) -> "FiniteSampleConfig":
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.n_values or min(self.n_values) < 2:
            raise ValueError("n_values must be >= 2")
        if not self.sample_counts or list(self.sample_counts) != sorted(self.sample_counts):
            raise ValueError("sample_counts must be sorted")
        if min(self.sample_counts) < 1:
            raise ValueError("sample_counts must be >= 1")
        if self.px not in ("uniform", "dirichlet"):
            raise ValueError("px must be 'uniform' or 'dirichlet'")
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        bad = set(self.criteria) - set(CRITERIA)
        if bad:
            raise ValueError(f"unknown criteria {sorted(bad)}")
        return self


def _finite_trial(task) -> list[dict]:
    cfg, n, trial = task
    rng = trial_rng(cfg.seed, _TAG_FINITE, n, trial)
    model = sample_scm(n, rng, cfg.theta)
    if cfg.px == "uniform":
        model = Scm(model.fmap, np.full(n, 1.0 / n), model.pe)
    j = scm_joint(model)
    min_slice = n if cfg.min_slice is None else cfg.min_slice
    out = []
    for k, N in enumerate(cfg.sample_counts):
        counts = draw_counts(j, N, trial_rng(cfg.seed, _TAG_FINITE, n, trial, k))
        vs = scores(counts, min_slice)
        out.append({c: vs[c].direction for c in cfg.criteria})
    return out


FINITE_COLUMNS = ["n", "N", "criterion", "trials", "decided", "accuracy", "correct_frac", "undecided_frac"]


def required_samples(points: list[tuple[int, float]], target: float) -> tuple[float, float]:
    """Least grid N with detection rate >= target, and a log-linear interpolation of it.

    Both are NaN when the target is never reached.
    """
    for k, (N, rate) in enumerate(points):
        if rate >= target:
            if k == 0:
                return float(N), float(N)
            n0, r0 = points[k - 1]
            frac = (target - r0) / (rate - r0)
            return float(N), float(math.exp(math.log(n0) + frac * (math.log(N) - math.log(n0))))
    return math.nan, math.nan


def run_finite_sample_sweep(cfg: FiniteSampleConfig, workers: int = 1) -> SweepResult:
    """Detection probability over (n, N); summary rows give N*(n) per criterion.

    ``correct_frac`` counts undecided trials as misses and is the detection
    probability used for N*.
    """
    cfg.validate()
    tasks = [(cfg, n, t) for n in cfg.n_values for t in range(cfg.trials)]
    out = parallel_map(_finite_trial, tasks, workers)
    rows, summary = [], []
    for a, n in enumerate(cfg.n_values):
        per_trial = out[a * cfg.trials:(a + 1) * cfg.trials]
        for crit in cfg.criteria:
            curve = []
            for k, N in enumerate(cfg.sample_counts):
                dirs = [t[k][crit] for t in per_trial]
                correct = sum(d is Direction.XtoY for d in dirs)
                undecided = sum(d is Direction.Undecided for d in dirs)
                decided = len(dirs) - undecided
                rows.append({
                    "n": n, "N": N, "criterion": crit, "trials": len(dirs), "decided": decided,
                    "accuracy": correct / decided if decided else math.nan,
                    "correct_frac": correct / len(dirs),
                    "undecided_frac": undecided / len(dirs),
                })
                curve.append((N, correct / len(dirs)))
            grid_n, interp_n = required_samples(curve, cfg.target)
            summary.append({
                "n": n, "criterion": crit, "target": cfg.target,
                "n_star": grid_n, "n_star_interp": interp_n,
                "max_rate": max(r for _, r in curve),
            })
    return SweepResult(FINITE_COLUMNS, rows, summary)


def config_dict(cfg) -> dict:
    return asdict(cfg)
