"""Reverse-direction exogenous entropies when H(E) <= alpha log2(n).

Runs alpha in {0.2, 0.5, 0.8} for n in {16, 64, 128}; one directory per case.

    python scripts/entropy_histogram.py [--trials 1000] [--workers 4]
"""
import sys

from entropic_causality.cli import main

if __name__ == "__main__":
    for alpha in (0.2, 0.5, 0.8):
        for n in (16, 64, 128):
            code = main(["histogram", "--n", str(n), "--alpha", str(alpha), "--trials", "1000",
                         "--out", f"results/histogram/alpha{alpha}_n{n}", *sys.argv[1:]])
            if code:
                sys.exit(code)
