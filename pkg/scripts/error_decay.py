"""Quadrature and reduction error decay over the basis bound.

Runs the two coupling-error studies back to back on their shared default
grid (2D torsional potential, degree 8, beta=5, K in {25,50,75}) and drops
one CSV per study into results/.  Extra arguments pass through to both.
"""

import sys
from pathlib import Path

from hprop.cli import main

RESULTS = Path(__file__).resolve().parent.parent / "results"


def run() -> int:
    RESULTS.mkdir(exist_ok=True)
    for sub in ("quaderr", "rederr"):
        code = main([sub, "--out", str(RESULTS / f"{sub}.csv"),
                     *sys.argv[1:]])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(run())
