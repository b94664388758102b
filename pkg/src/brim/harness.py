"""Seeded multi-run experiments, best-known registry and CSV reports."""
from __future__ import annotations

import csv
import io
import logging
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import baselines
from .config import build_brim_config, resolve
from .dynamics import bifurcation_leak, integrate, readout, stable_dt
from .errors import ConfigError
from .graph import CouplingMatrix, Graph, cut_value, ising_energy, maxcut_to_ising

log = logging.getLogger(__name__)

REPORT_COLUMNS = ("solver", "instance", "seed", "budget", "wall_ms", "cut", "energy", "distance")
SWEEP_COLUMNS = ("budget", "best_energy", "median_energy", "runs")


class RunFailure(RuntimeError):
    def __init__(self, solver: str, instance: str, seed: int, cause: BaseException):
        super().__init__(f"{solver} on {instance} (seed {seed}) failed: {cause}")
        self.solver = solver
        self.instance = instance
        self.seed = seed
        self.cause = cause
        self.__cause__ = cause

    def __reduce__(self):
        return type(self), (self.solver, self.instance, self.seed, self.cause)


# ---------------------------------------------------------------------- registry


def canonical_id(instance_id: str) -> str:
    """``G01`` and ``g1`` both become ``G1``; other names pass through."""
    m = re.fullmatch(r"[gG]0*(\d+)", instance_id)
    return f"G{m.group(1)}" if m else instance_id


@dataclass(frozen=True)
class BestKnownRegistry:
    entries: dict = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> BestKnownRegistry:
        entries = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ConfigError(f"registry line {lineno}: expected 'instance_id best_value source_tag'")
            entries[canonical_id(parts[0])] = (float(parts[1]), parts[2])
        return cls(entries)

    @classmethod
    def load(cls, path=None) -> BestKnownRegistry:
        if path is None:
            text = resources.files("brim.data").joinpath("best_known.txt").read_text()
        else:
            with open(path) as fh:
                text = fh.read()
        return cls.parse(text)

    def to_text(self) -> str:
        return "".join(f"{k} {_num(v)} {src}\n" for k, (v, src) in self.entries.items())

    def __contains__(self, instance_id: str) -> bool:
        return canonical_id(instance_id) in self.entries

    def best(self, instance_id: str) -> float:
        return self.entries[canonical_id(instance_id)][0]

    def source(self, instance_id: str) -> str:
        return self.entries[canonical_id(instance_id)][1]

    def updated(self, instance_id: str, value: float, source: str) -> BestKnownRegistry:
        key = canonical_id(instance_id)
        log.info("registry update: %s %s -> %s (%s)", key, self.entries.get(key, (None,))[0],
                 value, source)
        return BestKnownRegistry({**self.entries, key: (float(value), source)})


def _num(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


# ----------------------------------------------------------------------- solvers


@dataclass(frozen=True)
class Solver:
    """A named solver with resolved settings from the flat config format."""

    name: str
    settings: dict = field(default_factory=dict)

    @classmethod
    def from_flat(cls, name: str, flat: dict[str, str] | None = None) -> Solver:
        return cls(name, resolve(name, flat))

    @property
    def budget_key(self) -> str:
        return {"brim": "t_end", "oim": "t_end", "sa": "sweeps", "asa": "cycles"}[self.name]

    @property
    def budget(self):
        return self.settings[self.budget_key]

    def with_budget(self, budget) -> Solver:
        value = int(budget) if self.name in ("sa", "asa") else float(budget)
        return Solver(self.name, {**self.settings, self.budget_key: value})

    def with_settings(self, **kw) -> Solver:
        return Solver(self.name, {**self.settings, **kw})

    def prepared(self, J: CouplingMatrix) -> Solver:
        """Resolve instance-dependent ``auto`` settings once, before fanning out."""
        if self.name != "brim":
            return self
        s = dict(self.settings)
        Jn = J.normalized() if s["normalize"] else J
        if s["leak"] == "auto":
            s["leak"] = bifurcation_leak(Jn, s["lambda"], s["bifurcation_gain"])
        if s["integrator.dt"] == "auto":
            s["integrator.dt"] = stable_dt(Jn, s["lambda"], s["leak"], s["tau"])
        return Solver(self.name, s)

    def run(self, g: Graph, seed: int, J: CouplingMatrix | None = None) -> dict:
        """One seeded run; returns spins plus solver-specific extras."""
        J = J if J is not None else maxcut_to_ising(g)
        s = self.settings
        if self.name == "brim":
            cfg = build_brim_config({**s, "seed": seed, "perturb.seed": None}, J)
            final, trace = integrate(cfg)
            return {"spins": readout(final), "best_seen_energy": trace.best_energy,
                    "trace": trace}
        if self.name == "oim":
            spins, trace = baselines.oim_solve(J, s["t_end"], s["dt"], seed=seed,
                                               normalize=s["normalize"],
                                               trace_stride=s["trace_stride"])
            return {"spins": spins, "best_seen_energy": float(trace.energy.min()),
                    "trace": trace}
        if self.name == "sa":
            sched = baselines.SaSchedule(s["sweeps"], s["T0"], s["T_end"], s["decay"])
            spins, _, _ = baselines.sa_solve(g, sched, seed)
            return {"spins": spins}
        spins, _ = baselines.asa_solve(g, s["cycles"], s["p0"], seed)
        return {"spins": spins}


# ------------------------------------------------------------------------ reports


@dataclass
class RunReport:
    solver: str
    instance: str
    seed: int
    budget: float
    wall_ms: float | None
    cut: float
    energy: float
    distance: float | None
    spins: np.ndarray
    best_seen_energy: float | None = None
    trace: object = None

    def row(self, wall_time: bool = False) -> list[str]:
        return [self.solver, self.instance, str(self.seed), _num(self.budget),
                f"{self.wall_ms:.3f}" if wall_time and self.wall_ms is not None else "",
                _num(self.cut), _num(self.energy), _num(self.distance)]


def reports_to_csv(reports, wall_time: bool = False) -> str:
    """RunReport CSV; wall_ms is left blank unless requested so reruns are byte-identical."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in reports:
        w.writerow(r.row(wall_time))
    return buf.getvalue()


def _one_run(args):
    solver, instance_id, g, J, seed, best_known, keep_trace = args
    t0 = time.perf_counter()
    try:
        out = solver.run(g, seed, J)
    except Exception as exc:
        raise RunFailure(solver.name, instance_id, seed, exc) from exc
    wall_ms = 1e3 * (time.perf_counter() - t0)
    spins = out["spins"]
    cut = cut_value(g, spins)
    distance = None if best_known is None else best_known - cut
    return RunReport(
        solver=solver.name, instance=instance_id, seed=seed, budget=solver.budget,
        wall_ms=wall_ms, cut=cut, energy=ising_energy(J, spins), distance=distance,
        spins=spins, best_seen_energy=out.get("best_seen_energy"),
        trace=out.get("trace") if keep_trace else None,
    )


def run_batch(solver: Solver, g: Graph, k: int = 50, seed_base: int = 0,
              instance_id: str = "instance", registry: BestKnownRegistry | None = None,
              workers: int = 1, keep_traces: bool = False):
    """``k`` independent runs with seeds ``seed_base .. seed_base + k - 1``.

    Returns ``(reports, best)``; reports are ordered by seed and ``best`` is the
    highest cut (lowest seed on ties).
    """
    if k < 1:
        raise ValueError("need k >= 1")
    J = maxcut_to_ising(g)
    solver = solver.prepared(J)
    best_known = registry.best(instance_id) if registry and instance_id in registry else None
    jobs = [(solver, instance_id, g, J, seed_base + r, best_known, keep_traces) for r in range(k)]
    if workers > 1 and k > 1:
        with ProcessPoolExecutor(max_workers=min(workers, k)) as pool:
            reports = list(pool.map(_one_run, jobs))
    else:
        reports = [_one_run(job) for job in jobs]
    reports.sort(key=lambda r: r.seed)
    best = max(reports, key=lambda r: (r.cut, -r.seed))
    for r in reports:
        if r.distance is not None and r.distance < 0:
            log.warning("registry-update event: %s found cut %s above best known %s on %s",
                        r.solver, _num(r.cut), _num(best_known), instance_id)
    return reports, best


# ------------------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class SweepSpec:
    solver: Solver
    instance: str
    budgets: tuple
    runs: int = 20
    seed_base: int = 0

    def __post_init__(self):
        b = list(self.budgets)
        if not b or any(x >= y for x, y in zip(b, b[1:])):
            raise ValueError("budgets must be non-empty and strictly increasing")


@dataclass(frozen=True)
class SweepPoint:
    budget: float
    best_energy: float
    median_energy: float
    runs: int


def sweep_anneal_time(spec: SweepSpec, g: Graph, workers: int = 1) -> list[SweepPoint]:
    points = []
    for budget in spec.budgets:
        reports, _ = run_batch(spec.solver.with_budget(budget), g, spec.runs, spec.seed_base,
                               spec.instance, workers=workers)
        energies = np.array([r.energy for r in reports])
        points.append(SweepPoint(float(budget), float(energies.min()),
                                 float(np.median(energies)), len(reports)))
    return points


def sweep_to_csv(points) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    lines += [f"{_num(p.budget)},{_num(p.best_energy)},{_num(p.median_energy)},{p.runs}"
              for p in points]
    return "\n".join(lines) + "\n"


def log_spaced_budgets(low: float, high: float, count: int) -> tuple:
    return tuple(float(x) for x in np.geomspace(low, high, count))


# ---------------------------------------------------------------- distance table


@dataclass(frozen=True)
class TableRow:
    instance: str
    best_known: float
    source: str
    distances: dict
    flagged: tuple = ()


def distance_table(solvers, instances: dict, k: int, registry: BestKnownRegistry,
                   seed_base: int = 0, workers: int = 1) -> list[TableRow]:
    """Best-of-k distance from the best known cut, per instance and solver.

    ``solvers`` is a list of :class:`Solver` objects or callables
    ``graph -> cut`` (used as-is, e.g. an exact oracle).
    """
    missing = [name for name in instances if name not in registry]
    if missing:
        raise ConfigError(f"no best-known value registered for: {', '.join(missing)}")
    rows = []
    for name, g in instances.items():
        best_known = registry.best(name)
        distances, flagged = {}, []
        for solver in solvers:
            if isinstance(solver, Solver):
                label = solver.name
                _, best = run_batch(solver, g, k, seed_base, name, registry, workers)
                cut = best.cut
            else:
                label = getattr(solver, "name", getattr(solver, "__name__", "custom"))
                cut = solver(g)
            distances[label] = best_known - cut
            if best_known - cut < 0:
                flagged.append(label)
                log.warning("registry-update event: %s reached %s on %s (best known %s)",
                            label, _num(cut), name, _num(best_known))
        rows.append(TableRow(name, best_known, registry.source(name), distances, tuple(flagged)))
    return rows


def table_to_csv(rows) -> str:
    labels = list(rows[0].distances) if rows else []
    lines = [",".join(["instance", "best", "ref"] + labels + ["registry_update"])]
    for r in rows:
        cells = [r.instance, _num(r.best_known), r.source.replace(",", ";")]
        cells += [_num(r.distances[label]) for label in labels]
        cells.append(";".join(r.flagged))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------- perturbation A/B test


@dataclass(frozen=True)
class PairResult:
    seed: int
    best_seen: dict
    final: dict


def perturbation_ab_test(g: Graph, base: Solver, periods, k: int = 20, seed_base: int = 0,
                         nodes_per_event: int | None = None, workers: int = 1):
    """Paired BRIM runs that differ only in perturbation period.

    Both arms of a pair use the same seed, hence the same initial state and
    the same perturbation stream. Returns one :class:`PairResult` per seed.
    """
    if base.name != "brim":
        raise ConfigError("perturbation A/B test needs the brim solver")
    arms = {}
    for period in periods:
        solver = base.with_settings(**{"perturb.period": float(period)})
        if nodes_per_event is not None:
            solver = solver.with_settings(**{"perturb.nodes_per_event": nodes_per_event})
        arms[float(period)], _ = run_batch(solver, g, k, seed_base, workers=workers)
    pairs = []
    for r in range(k):
        best_seen = {p: reports[r].best_seen_energy for p, reports in arms.items()}
        final = {p: reports[r].energy for p, reports in arms.items()}
        pairs.append(PairResult(seed_base + r, best_seen, final))
    return pairs


def ab_summary(pairs, reference: float, treatment: float) -> dict:
    diffs = np.array([p.best_seen[treatment] - p.best_seen[reference] for p in pairs])
    return {"pairs": len(pairs), "not_worse": int((diffs <= 0).sum()),
            "strictly_better": int((diffs < 0).sum()), "worse": int((diffs > 0).sum())}


def ab_to_csv(pairs) -> str:
    periods = list(pairs[0].best_seen) if pairs else []
    head = ["seed"] + [f"best_seen@{_fmt_period(p)}" for p in periods]
    head += [f"final@{_fmt_period(p)}" for p in periods]
    lines = [",".join(head)]
    for pr in pairs:
        cells = [str(pr.seed)] + [_num(pr.best_seen[p]) for p in periods]
        cells += [_num(pr.final[p]) for p in periods]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _fmt_period(p: float) -> str:
    return "inf" if math.isinf(p) else _num(p)
