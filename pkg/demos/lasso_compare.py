"""Compare the five solvers on the default sparse regression problem.

Prints final suboptimality, first full identification and the number of
non-accelerated iterations, then writes the CSV/SVG bundle through the CLI.

    python demos/lasso_compare.py [seed] [out_dir]
"""

import sys

import numpy as np

from proxident.cli import main as cli
from proxident.experiments import make_scenario, run_scenario


def main(seed=42, out="proxident-out"):
    sc = make_scenario("lasso", seed)
    b = run_scenario(sc)
    print(f"lasso seed {seed}: F* = {b.reference.f_star:.12g}, |sig*| = {len(b.reference.signature)}")
    for algo, tr in b.traces.items():
        first, holes = b.metrics[algo]
        resets = int(np.count_nonzero(~tr.accelerated))
        print(
            f"  {algo:7s} subopt {tr.f_values[-1] - b.f_floor:9.3e}  first id {first}  "
            f"holes {holes}  non-accelerated {resets}"
        )
    return cli(["compare", "--scenario", "lasso", "--seed", str(seed), "--svg", "--out", out])


if __name__ == "__main__":
    args = sys.argv[1:]
    sys.exit(main(int(args[0]) if args else 42, *args[1:2]))
