"""Command-line front end.

Settings precedence, lowest first: built-in defaults, the ``--config`` file,
then ``--set key=value`` and dedicated flags such as ``--budget``. Output goes
to ``--out`` or standard output. Exit status is 0 on success, 1 on a usage or
input error and 2 when a solver run faults.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import SOLVERS, parse_flat
from .errors import ConfigError, ContractViolation, GsetParseError, SimulationFault
from .graph import (
    WeightModel,
    brute_force_maxcut,
    gen_random_graph,
    gen_toroidal_grid,
    load_gset,
    serialize_gset,
)
from .harness import (
    BestKnownRegistry,
    RunFailure,
    Solver,
    SweepSpec,
    ab_summary,
    ab_to_csv,
    distance_table,
    log_spaced_budgets,
    perturbation_ab_test,
    reports_to_csv,
    run_batch,
    sweep_anneal_time,
    sweep_to_csv,
    table_to_csv,
)

EXIT_OK, EXIT_USAGE, EXIT_FAULT = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _key_value(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), value.strip()


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--seed", type=int, default=None,
                        help="base seed; run r uses seed + r (default: config 'seed' or 0)")

    solving = _Parser(add_help=False)
    solving.add_argument("--instance", required=True, help="graph file in Gset format")
    solving.add_argument("--solver", choices=SOLVERS, default="brim")
    solving.add_argument("--config", help="flat key = value config file")
    solving.add_argument("--set", dest="overrides", action="append", type=_key_value,
                         default=[], metavar="KEY=VALUE", help="override one config key")
    solving.add_argument("--runs", type=int, default=None, help="runs per batch")
    solving.add_argument("--workers", type=int, default=1, help="size of the process pool")
    solving.add_argument("--registry", help="best-known registry file (default: bundled)")

    p = _Parser(prog="brim", description="Ising machine simulator and Max-Cut benchmark tools.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", parents=[common, solving], help="best-of-k runs, RunReport CSV")
    s.add_argument("--budget", type=float, help="model time (brim, oim), sweeps (sa) or cycles (asa)")
    s.add_argument("--wall-time", action="store_true",
                   help="fill the wall_ms column (makes output host dependent)")

    s = sub.add_parser("sweep", parents=[common, solving], help="energy versus budget, sweep CSV")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--budgets", type=_float_list, help="comma-separated increasing budgets")
    g.add_argument("--budget-range", nargs=3, metavar=("LOW", "HIGH", "COUNT"),
                   help="log-spaced budgets")

    s = sub.add_parser("ab-perturb", parents=[common, solving],
                       help="paired runs with and without perturbation")
    s.add_argument("--periods", type=_float_list, default=[float("inf"), 5.0],
                   help="comma-separated perturbation periods, first is the reference "
                        "(default: inf,5)")
    s.add_argument("--nodes-per-event", type=int, default=None)
    s.add_argument("--budget", type=float, help="model time per run")

    s = sub.add_parser("table", parents=[common], help="distance from best known, per instance")
    s.add_argument("--instance", action="append", required=True,
                   help="Gset file; repeat for several (id is the file stem)")
    s.add_argument("--solver", action="append", choices=SOLVERS,
                   help="repeat for several (default: brim)")
    s.add_argument("--config", action="append", default=[], metavar="SOLVER=PATH",
                   type=_key_value, help="config file for one solver")
    s.add_argument("--runs", type=int, default=50)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--registry", help="best-known registry file (default: bundled)")

    s = sub.add_parser("oracle", parents=[common], help="exact max-cut by enumeration (n <= 30)")
    s.add_argument("--instance", required=True, help="graph file in Gset format")

    s = sub.add_parser("generate", parents=[common], help="write a random instance in Gset format")
    s.add_argument("--kind", choices=("random", "toroidal"), default="random")
    s.add_argument("--n", type=int, default=20, help="vertex count (random)")
    s.add_argument("--density", type=float, default=0.5, help="edge probability (random)")
    s.add_argument("--rows", type=int, default=10, help="grid rows (toroidal)")
    s.add_argument("--cols", type=int, default=10, help="grid columns (toroidal)")
    s.add_argument("--weights", default="pm1",
                   help="pm1, one, int:LOW:HIGH or real:LOW:HIGH (default: pm1)")
    return p


def _instance_id(path: str) -> str:
    return Path(path).stem


def _load_graph(path: str):
    try:
        return load_gset(path)
    except OSError as exc:
        raise UsageError(f"cannot read instance {path}: {exc.strerror or exc}")


def _read_config(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    try:
        return parse_flat(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}")


def _solver_from_args(args, solver_name=None, config_path=None, overrides=()) -> tuple[Solver, int]:
    flat = _read_config(config_path)
    flat.update(dict(overrides))
    solver = Solver.from_flat(solver_name, flat)
    seed = args.seed if args.seed is not None else solver.settings["seed"]
    if getattr(args, "budget", None) is not None:
        solver = solver.with_budget(args.budget)
    return solver, seed


def _registry(path: str | None) -> BestKnownRegistry:
    try:
        return BestKnownRegistry.load(path)
    except OSError as exc:
        raise UsageError(f"cannot read registry {path}: {exc.strerror or exc}")


def _cmd_solve(args) -> str:
    g = _load_graph(args.instance)
    solver, seed = _solver_from_args(args, args.solver, args.config, args.overrides)
    reports, _ = run_batch(solver, g, args.runs or 1, seed, _instance_id(args.instance),
                           _registry(args.registry), workers=args.workers)
    return reports_to_csv(reports, wall_time=args.wall_time)


def _cmd_sweep(args) -> str:
    g = _load_graph(args.instance)
    solver, seed = _solver_from_args(args, args.solver, args.config, args.overrides)
    if args.budgets is not None:
        budgets = tuple(args.budgets)
    else:
        low, high, count = args.budget_range
        budgets = log_spaced_budgets(float(low), float(high), int(count))
    try:
        spec = SweepSpec(solver, _instance_id(args.instance), budgets, args.runs or 20, seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    return sweep_to_csv(sweep_anneal_time(spec, g, workers=args.workers))


def _cmd_ab(args) -> str:
    if args.solver != "brim":
        raise UsageError("ab-perturb needs --solver brim")
    if len(args.periods) < 2:
        raise UsageError("ab-perturb needs at least two periods")
    g = _load_graph(args.instance)
    solver, seed = _solver_from_args(args, "brim", args.config, args.overrides)
    pairs = perturbation_ab_test(g, solver, args.periods, args.runs or 20, seed,
                                 args.nodes_per_event, args.workers)
    ref = float(args.periods[0])
    for period in args.periods[1:]:
        summary = ab_summary(pairs, ref, float(period))
        logging.getLogger("brim.cli").info("period %s vs %s: %s", period, ref, summary)
    return ab_to_csv(pairs)


def _cmd_table(args) -> str:
    configs = dict(args.config)
    unknown = set(configs) - set(SOLVERS)
    if unknown:
        raise UsageError(f"--config names unknown solver(s): {', '.join(sorted(unknown))}")
    names = args.solver or ["brim"]
    solvers = [_solver_from_args(args, name, configs.get(name))[0] for name in names]
    instances = {_instance_id(p): _load_graph(p) for p in args.instance}
    rows = distance_table(solvers, instances, args.runs, _registry(args.registry),
                          seed_base=args.seed or 0, workers=args.workers)
    return table_to_csv(rows)


def _cmd_oracle(args) -> str:
    g = _load_graph(args.instance)
    cut, spins = brute_force_maxcut(g)
    value = str(int(cut)) if float(cut).is_integer() else repr(float(cut))
    return (f"instance,n,max_cut,spins\n{_instance_id(args.instance)},{g.n},{value},"
            f"{' '.join(str(int(x)) for x in spins)}\n")


def _cmd_generate(args) -> str:
    try:
        wm = WeightModel.parse(args.weights)
    except (ValueError, IndexError):
        raise UsageError(f"bad weight model {args.weights!r}")
    seed = args.seed if args.seed is not None else 0
    if args.kind == "random":
        g = gen_random_graph(args.n, args.density, wm, seed)
    else:
        g = gen_toroidal_grid(args.rows, args.cols, wm, seed)
    return serialize_gset(g)


COMMANDS = {
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "ab-perturb": _cmd_ab,
    "table": _cmd_table,
    "oracle": _cmd_oracle,
    "generate": _cmd_generate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        text = COMMANDS[args.command](args)
    except (RunFailure, SimulationFault) as exc:
        print(f"brim: solver fault: {exc}", file=sys.stderr)
        return EXIT_FAULT
    except (UsageError, ConfigError, ContractViolation, GsetParseError) as exc:
        print(f"brim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
