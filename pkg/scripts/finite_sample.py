"""Detection probability over (n, N) at H(E) close to log2(40), and N*(n) for 95% detection.

    python scripts/finite_sample.py [--trials 100] [--px dirichlet] [--workers 4]
"""
import sys

from entropic_causality.cli import main

if __name__ == "__main__":
    sys.exit(main(["finite", "--n-values", "20,30,40,50,60,80,110", "--out", "results/finite", *sys.argv[1:]]))
