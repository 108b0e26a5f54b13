"""Exogenous-criterion accuracy with H(E) <= 2 and a latent confounder of growing entropy.

Also writes the unconfounded reference curve at H(E) <= 2 + H(L).

    python scripts/confounding.py [--trials 200] [--workers 4]
"""
import sys

from entropic_causality.cli import main

if __name__ == "__main__":
    ts = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
    common = ["--n", "40", "--m", "40", "--trials", "200", "--criteria", "exogenous", *sys.argv[1:]]
    code = main(["confound", "--thresholds", "2.0", "--confounder-thresholds", ",".join(map(str, ts)),
                 "--out", "results/confounding", *common])
    if code == 0:
        code = main(["sweep", "--thresholds", ",".join(str(2 + t) for t in ts),
                     "--out", "results/confounding/reference", *common])
    sys.exit(code)
