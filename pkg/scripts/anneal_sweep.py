#!/usr/bin/env python3
"""Median and best BRIM energy against anneal time on one instance.

    python3 scripts/anneal_sweep.py --low 0.5 --high 500 --count 7 --out sweep.csv
"""
import argparse
import sys

from brim.experiments import load_instance, medium_instance
from brim.harness import Solver, SweepSpec, log_spaced_budgets, sweep_anneal_time, sweep_to_csv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instance", default=None,
                    help="Gset id; default is the built-in 200-node +-1 graph")
    ap.add_argument("--low", type=float, default=0.5)
    ap.add_argument("--high", type=float, default=500.0)
    ap.add_argument("--count", type=int, default=5)
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    if args.instance:
        g = load_instance(args.instance)
        if g is None:
            ap.error(f"{args.instance}: Gset file not found")
        name = args.instance
    else:
        g, name = medium_instance(), "medium200"
    spec = SweepSpec(Solver.from_flat("brim"), name,
                     log_spaced_budgets(args.low, args.high, args.count), runs=args.runs)
    csv = sweep_to_csv(sweep_anneal_time(spec, g, args.workers))
    if args.out == "-":
        sys.stdout.write(csv)
    else:
        with open(args.out, "w") as fh:
            fh.write(csv)


if __name__ == "__main__":
    main()
