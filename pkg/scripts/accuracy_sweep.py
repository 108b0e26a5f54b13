"""Accuracy of every criterion as H(E) grows from 0 to log2(n), n = m = 40.

    python scripts/accuracy_sweep.py --out results/accuracy [--trials 200] [--workers 4]
"""
import math
import sys

from entropic_causality.cli import main

if __name__ == "__main__":
    n = 40
    thetas = ",".join(repr(k / 20 * math.log2(n)) for k in range(1, 21))
    sys.exit(main(["sweep", "--n", str(n), "--m", str(n), "--thresholds", thetas, "--trials", "200",
                   "--out", "results/accuracy", *sys.argv[1:]]))
