"""Command-line entry point.

Exit codes: 0 success, 2 usage or configuration error, 3 missing dataset.
Config files are JSON; a flag given on the command line beats the config
file, which beats the built-in default. A ``manifest.json`` written by a
previous run is accepted as ``--config`` and reproduces that run.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .coupling import coupling_entropy, greedy_mec
from .estimation import SampleSet, plugin_joint
from .experiments import (
    FiniteSampleConfig,
    SweepConfig,
    backward_entropy_samples,
    histogram_csv_text,
    run_accuracy_sweep,
    run_confounding_sweep,
    run_finite_sample_sweep,
)
from .inference import CRITERIA, infer, thresholded_decision
from .tuebingen import load_pairs, run_benchmark

EXIT_USAGE = 2
EXIT_NO_DATA = 3

DOWNLOAD_HINT = (
    "dataset not found; fetch the cause-effect pairs with\n"
    "    python scripts/download_tuebingen.py --dest <dir>\n"
    "and pass --data <dir>"
)


class UsageError(Exception):
    pass


class MissingData(Exception):
    pass


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError("config must be a JSON object")
    return doc.get("config", doc)


def _merge(args: argparse.Namespace, keys, config: dict, defaults: dict) -> dict:
    out = dict(defaults)
    out.update({k: v for k, v in config.items() if k in defaults})
    unknown = set(config) - set(defaults) - {"seed", "workers", "out"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            out[k] = v
    return out


def _write_manifest(out: Path, command: str, config: dict, workers: int, started: float, files) -> None:
    manifest = {
        "command": command,
        "config": config,
        "seed": config.get("seed"),
        "workers": workers,
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "wall_time_s": round(time.time() - started, 3),
        "outputs": list(files),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _outdir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _workers(args, config: dict) -> int:
    w = args.workers if args.workers is not None else config.get("workers")
    return int(w) if w else (os.cpu_count() or 1)


def cmd_mec(args) -> int:
    try:
        marginals = json.loads(Path(args.input).read_text())
        coupling = greedy_mec([np.asarray(m, dtype=float) for m in marginals])
    except (OSError, json.JSONDecodeError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot couple {args.input}: {exc}") from exc
    text = coupling.to_json()
    if args.out:
        out = _outdir(args)
        (out / "coupling.json").write_text(text + "\n")
    else:
        print(text)
    print(f"entropy {coupling_entropy(coupling):.6f}")
    return 0


def cmd_infer(args) -> int:
    try:
        samples = SampleSet.from_csv(args.samples, args.nx, args.ny)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    counts, _ = plugin_joint(samples)
    v = infer(counts, args.criterion, args.min_slice)
    if args.threshold is not None:
        if v.h_exo_fwd is None:
            raise UsageError("--threshold needs the exogenous or total criterion")
        v = thresholded_decision(v, args.threshold, min(counts.shape))
    print(v.to_json())
    return 0


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    return [int(float(t)) for t in text.split(",") if t.strip()]


def _config_fields(cls) -> dict:
    return {f.name: getattr(cls(), f.name) for f in dataclasses.fields(cls)}


def _build(cls, merged: dict):
    try:
        return cls(**merged).validate()
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid config: {exc}") from exc


SWEEP_KEYS = ["n", "m", "entropy_thresholds", "trials", "criteria", "mixture",
              "sample_count", "min_slice", "confounder_thresholds", "e_states", "l_states", "seed"]


def cmd_sweep(args, confound: bool = False) -> int:
    config = _load_config(args.config)
    defaults = _config_fields(SweepConfig)
    if confound:
        defaults.update(entropy_thresholds=[2.0], confounder_thresholds=[0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
    merged = _merge(args, SWEEP_KEYS, config, defaults)
    cfg = _build(SweepConfig, merged)
    workers = _workers(args, config)
    out = _outdir(args)
    started = time.time()
    result = (run_confounding_sweep if confound else run_accuracy_sweep)(cfg, workers)
    name = "confound.csv" if confound else "sweep.csv"
    (out / name).write_text(result.to_csv_text())
    _write_manifest(out, "confound" if confound else "sweep", dataclasses.asdict(cfg), workers, started, [name])
    print(result.to_csv_text(), end="")
    return 0


def cmd_histogram(args) -> int:
    config = _load_config(args.config)
    merged = _merge(args, ["n", "alpha", "trials", "seed"], config,
                    {"n": 64, "alpha": 0.8, "trials": 1000, "seed": 0})
    if not 0 < merged["alpha"] < 1 or merged["trials"] < 0 or merged["n"] < 2:
        raise UsageError("need 0 < alpha < 1, trials >= 0, n >= 2")
    workers = _workers(args, config)
    out = _outdir(args)
    started = time.time()
    pts = backward_entropy_samples(merged["n"], merged["alpha"], merged["trials"], merged["seed"], workers)
    (out / "histogram.csv").write_text(histogram_csv_text(pts))
    _write_manifest(out, "histogram", merged, workers, started, ["histogram.csv"])
    line = merged["alpha"] * math.log2(merged["n"])
    above = sum(hb > line for _, hb in pts)
    print(f"{len(pts)} values; {above} exceed {line:.4f} bits")
    return 0


FINITE_KEYS = ["n_values", "sample_counts", "theta", "trials", "px", "min_slice", "target", "criteria", "seed"]


def cmd_finite(args) -> int:
    config = _load_config(args.config)
    merged = _merge(args, FINITE_KEYS, config, _config_fields(FiniteSampleConfig))
    cfg = _build(FiniteSampleConfig, merged)
    workers = _workers(args, config)
    out = _outdir(args)
    started = time.time()
    result = run_finite_sample_sweep(cfg, workers)
    (out / "finite.csv").write_text(result.to_csv_text())
    (out / "n_star.csv").write_text(result.summary_csv_text())
    _write_manifest(out, "finite", dataclasses.asdict(cfg), workers, started, ["finite.csv", "n_star.csv"])
    print(result.summary_csv_text(), end="")
    return 0


def cmd_tuebingen(args) -> int:
    config = _load_config(args.config)
    merged = _merge(args, ["data", "b", "thresholds", "votes", "seed"], config,
                    {"data": None, "b": 10, "thresholds": [0.7, 0.8, 0.85, 0.9, 1.0, 1.2],
                     "votes": 1, "seed": 0})
    if merged["votes"] < 1 or not merged["thresholds"] or min(merged["thresholds"]) <= 0:
        raise UsageError("need votes >= 1 and positive thresholds")
    data = merged["data"]
    if not data or not Path(data).is_dir():
        raise MissingData(DOWNLOAD_HINT)
    skipped: dict = {}
    try:
        pairs = load_pairs(data, skipped)
    except FileNotFoundError as exc:
        raise MissingData(f"{exc}\n{DOWNLOAD_HINT}") from exc
    if not pairs:
        raise MissingData(DOWNLOAD_HINT)
    workers = _workers(args, config)
    out = _outdir(args)
    started = time.time()
    res = run_benchmark(pairs, merged["b"], merged["thresholds"], merged["votes"], merged["seed"], workers)
    (out / "table.csv").write_text(res.to_csv_text())
    log = json.loads(res.pair_log_json())
    log["skipped"] = skipped
    (out / "pairs.json").write_text(json.dumps(log, indent=1) + "\n")
    _write_manifest(out, "tuebingen", merged, workers, started, ["table.csv", "pairs.json"])
    print(res.to_csv_text(), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--out")
    common.add_argument("--config")

    p = argparse.ArgumentParser(prog="entropic-causality", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("mec", parents=[common], help="greedy minimum-entropy coupling of JSON marginals")
    s.add_argument("input")
    s.set_defaults(func=cmd_mec)

    s = sub.add_parser("infer", parents=[common], help="infer direction from a CSV of (x, y) samples")
    s.add_argument("samples")
    s.add_argument("--criterion", choices=CRITERIA, default="exogenous")
    s.add_argument("--min-slice", type=int, default=1)
    s.add_argument("--threshold", type=float)
    s.add_argument("--nx", type=int)
    s.add_argument("--ny", type=int)
    s.set_defaults(func=cmd_infer)

    for name, help_ in (("sweep", "accuracy vs exogenous entropy"), ("confound", "accuracy vs confounder entropy")):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("--n", type=int)
        s.add_argument("--m", type=int)
        s.add_argument("--thresholds", dest="entropy_thresholds", type=_floats)
        s.add_argument("--trials", type=int)
        s.add_argument("--criteria", type=lambda t: t.split(","))
        s.add_argument("--mixture", action="store_const", const=True)
        s.add_argument("--samples", dest="sample_count", type=int)
        s.add_argument("--min-slice", type=int)
        s.add_argument("--confounder-thresholds", type=_floats)
        s.add_argument("--e-states", type=int)
        s.add_argument("--l-states", type=int)
        s.set_defaults(func=lambda a, c=(name == "confound"): cmd_sweep(a, c))

    s = sub.add_parser("histogram", parents=[common], help="reverse exogenous entropies at H(E) <= alpha log n")
    s.add_argument("--n", type=int)
    s.add_argument("--alpha", type=float)
    s.add_argument("--trials", type=int)
    s.set_defaults(func=cmd_histogram)

    s = sub.add_parser("finite", parents=[common], help="detection probability over (n, N)")
    s.add_argument("--n-values", type=_ints)
    s.add_argument("--sample-counts", type=_ints)
    s.add_argument("--theta", type=float)
    s.add_argument("--trials", type=int)
    s.add_argument("--px", choices=["uniform", "dirichlet"])
    s.add_argument("--min-slice", type=int)
    s.add_argument("--target", type=float)
    s.add_argument("--criteria", type=lambda t: t.split(","))
    s.set_defaults(func=cmd_finite)

    s = sub.add_parser("tuebingen", parents=[common], help="thresholded benchmark on cause-effect pairs")
    s.add_argument("--data")
    s.add_argument("--b", type=int)
    s.add_argument("--thresholds", type=_floats)
    s.add_argument("--votes", type=int)
    s.set_defaults(func=cmd_tuebingen)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MissingData as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_DATA


if __name__ == "__main__":
    sys.exit(main())
