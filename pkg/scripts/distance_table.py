#!/usr/bin/env python3
"""Best-of-k distance from the best known cut for BRIM and the baselines.

Uses the Gset files when they are on the search path ($BRIM_GSET_DIR or
data/gset), otherwise surrogates scored against a long SA reference.

    python3 scripts/distance_table.py --instances G1 G11 G22 --runs 50 --out table.csv
"""
import argparse
import logging
import sys

from brim.experiments import benchmark_instances
from brim.harness import Solver, distance_table, table_to_csv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", nargs="+", default=["G1", "G11", "G22"])
    ap.add_argument("--solvers", nargs="+", default=["brim", "sa", "asa", "oim"],
                    choices=["brim", "sa", "asa", "oim"])
    ap.add_argument("--runs", type=int, default=50)
    ap.add_argument("--t-end", type=float, default=50.0, help="model-time budget for brim and oim")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    instances, registry = benchmark_instances(args.instances)
    solvers = []
    for name in args.solvers:
        s = Solver.from_flat(name)
        solvers.append(s.with_budget(args.t_end) if name in ("brim", "oim") else s)
    csv = table_to_csv(distance_table(solvers, instances, args.runs, registry,
                                      workers=args.workers))
    if args.out == "-":
        sys.stdout.write(csv)
    else:
        with open(args.out, "w") as fh:
            fh.write(csv)


if __name__ == "__main__":
    main()
