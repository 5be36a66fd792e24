"""Fast-matvec perturbation of single Krylov exponential steps.

Sweeps basis bound and step size on the torsional-minus-harmonic potential
(the confining quadratic part rides along in the oscillator diagonal).
The error column should scale linearly in h at every bound.
"""

import sys
from pathlib import Path

from hprop.cli import main

RESULTS = Path(__file__).resolve().parent.parent / "results"


def run() -> int:
    RESULTS.mkdir(exist_ok=True)
    return main(["perturb", "--out", str(RESULTS / "perturb.csv"),
                 *sys.argv[1:]])


if __name__ == "__main__":
    sys.exit(run())
