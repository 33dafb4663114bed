"""Structure events on the three planar problems.

For each fixture and algorithm, print when the iterates first sit on the
candidate manifold, how often they leave it again, and whether they end on
it. Runs in well under a second.
"""

import numpy as np

from proxident.experiments import fixtures_2d, run_scenario


def events(flags):
    flags = np.asarray(flags, dtype=bool)
    first = int(np.argmax(flags)) + 1 if flags.any() else None
    losses = int(np.count_nonzero(flags[:-1] & ~flags[1:]))
    return first, losses, bool(flags[-1])


def main():
    for sc in fixtures_2d():
        b = run_scenario(sc)
        print(f"{sc.name}: minimizer {np.round(b.reference.point, 6)}, signature {sorted(b.reference.signature)}")
        for algo, tr in b.traces.items():
            on = [bool(r.signature) for r in tr.records]
            first, losses, last = events(on)
            print(f"  {algo:7s} first on manifold at iteration {first}, left it {losses} times, ends on it: {last}")


if __name__ == "__main__":
    main()
