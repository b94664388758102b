#!/usr/bin/env python3
"""Paired comparison of BRIM with and without random spin-flip perturbation.

Each seed runs once per period; pairs share the initial state.

    python3 scripts/perturbation_ab.py --events 10 --fraction 0.05 --out ab.csv
"""
import argparse
import math
import sys

from brim.experiments import load_instance, medium_instance, perturbed
from brim.harness import Solver, ab_summary, ab_to_csv, perturbation_ab_test


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instance", default=None,
                    help="Gset id; default is the built-in 200-node +-1 graph")
    ap.add_argument("--t-end", type=float, default=50.0)
    ap.add_argument("--events", type=int, default=10, help="perturbation events per run")
    ap.add_argument("--fraction", type=float, default=0.05, help="share of nodes flipped per event")
    ap.add_argument("--pairs", type=int, default=20)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    if args.instance:
        g = load_instance(args.instance)
        if g is None:
            ap.error(f"{args.instance}: Gset file not found")
    else:
        g = medium_instance()
    base = Solver.from_flat("brim").with_budget(args.t_end)
    arm = perturbed(base, g.n, args.events, args.fraction)
    period = arm.settings["perturb.period"]
    pairs = perturbation_ab_test(g, base, [math.inf, period], k=args.pairs,
                                 nodes_per_event=arm.settings["perturb.nodes_per_event"],
                                 workers=args.workers)
    s = ab_summary(pairs, math.inf, period)
    print(f"not worse {s['not_worse']}/{s['pairs']}, strictly better {s['strictly_better']}, "
          f"worse {s['worse']}", file=sys.stderr)
    csv = ab_to_csv(pairs)
    if args.out == "-":
        sys.stdout.write(csv)
    else:
        with open(args.out, "w") as fh:
            fh.write(csv)


if __name__ == "__main__":
    main()
