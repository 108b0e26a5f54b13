"""Thresholded benchmark on the cause-effect pairs for b = 5 and b = 10 states.

    python scripts/download_tuebingen.py --dest data/tuebingen
    python scripts/tuebingen_benchmark.py --data data/tuebingen [--votes 5]
"""
import sys

from entropic_causality.cli import main

if __name__ == "__main__":
    for b in (5, 10):
        code = main(["tuebingen", "--b", str(b), "--out", f"results/tuebingen/b{b}", *sys.argv[1:]])
        if code:
            sys.exit(code)
