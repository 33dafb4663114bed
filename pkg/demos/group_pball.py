"""Grouped distance-to-ball problem whose solution is not qualified.

The solution lies on all ten group spheres, but no method keeps all of
them; this prints how many each method holds at the end and at best.
"""

from proxident.experiments import make_scenario, run_scenario


def main(seed=0):
    b = run_scenario(make_scenario("group-pball", seed))
    n = len(b.reference.signature)
    print(f"group-pball seed {seed}: solution on {n} spheres")
    for algo, s in b.series.items():
        print(f"  {algo:7s} steps {int(s.prox_steps[-1]):6d}  final {int(s.correct[-1])}/{n}  best {int(s.correct.max())}/{n}")


if __name__ == "__main__":
    main()
