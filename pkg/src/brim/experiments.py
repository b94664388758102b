"""Instance corpora and solver presets shared by the acceptance suite and scripts."""
from __future__ import annotations

import os
from pathlib import Path

from .errors import ConfigError
from .graph import Graph, gen_random_graph, gen_toroidal_grid, load_gset
from .harness import BestKnownRegistry, Solver, canonical_id, run_batch

TINY_WEIGHT_MODELS = ("pm1", "int:-3:3", "real:-1:1")

# Same size, density and weight law as the Gset graphs they stand in for, but
# drawn with our own generator, so their optima are unknown and differ.
SURROGATES = {
    "G1": lambda: gen_random_graph(800, 0.06, "one", seed=1),
    "G11": lambda: gen_toroidal_grid(20, 40, "pm1", seed=11),
    "G22": lambda: gen_random_graph(2000, 0.01, "one", seed=22),
}


def tiny_corpus(count: int = 20, seed_base: int = 2000) -> dict[str, Graph]:
    """Graphs with 16 to 24 vertices, density 0.5, cycling through three weight laws."""
    return {
        f"tiny{i:02d}": gen_random_graph(16 + i % 9, 0.5, TINY_WEIGHT_MODELS[i % 3],
                                         seed=seed_base + i)
        for i in range(count)
    }


def medium_instance() -> Graph:
    """The 200-vertex +-1 graph used for the anneal-time and perturbation studies."""
    return gen_random_graph(200, 0.1, "pm1", seed=200)


def gset_search_path() -> list[Path]:
    paths = []
    if os.environ.get("BRIM_GSET_DIR"):
        paths.append(Path(os.environ["BRIM_GSET_DIR"]))
    paths.append(Path(__file__).resolve().parents[2] / "data" / "gset")
    return paths


def find_gset(instance_id: str) -> Path | None:
    """Locate a Gset file such as ``G1``, ``G1.txt`` or ``g01.gset`` on the search path."""
    want = canonical_id(instance_id)
    for folder in gset_search_path():
        if not folder.is_dir():
            continue
        for path in sorted(folder.iterdir()):
            if path.is_file() and canonical_id(path.name.split(".")[0]) == want:
                return path
    return None


def load_instance(instance_id: str) -> Graph | None:
    path = find_gset(instance_id)
    return load_gset(path) if path else None


def small_instance_brim(**overrides) -> Solver:
    """BRIM tuned for best-of-k on small graphs.

    With the origin already unstable at zero coupling, each seed keeps its own
    random start, so the k runs land in different basins.
    """
    flat = {"bifurcation_gain": "0", **{k: str(v) for k, v in overrides.items()}}
    return Solver.from_flat("brim", flat)


def perturbed(solver: Solver, n: int, events: int = 10, fraction: float = 0.05) -> Solver:
    """Enable perturbation: ``events`` per run, each negating ``fraction`` of the nodes."""
    return solver.with_settings(**{
        "perturb.period": solver.budget / events,
        "perturb.nodes_per_event": max(1, round(fraction * n)),
    })


def benchmark_instances(ids, registry: BestKnownRegistry | None = None,
                        reference_runs: int = 10, reference_sweeps: int = 20000):
    """Load Gset graphs by id, falling back to surrogates when a file is missing.

    A surrogate is named ``<id>-like`` and registered with the best of
    ``reference_runs`` long SA runs as its reference cut. Returns the instance
    dict and the (possibly extended) registry.
    """
    registry = registry or BestKnownRegistry.load()
    sa = Solver.from_flat("sa", {"sweeps": str(reference_sweeps)})
    out = {}
    for gid in ids:
        g = load_instance(gid)
        if g is not None:
            out[canonical_id(gid)] = g
            continue
        if canonical_id(gid) not in SURROGATES:
            raise ConfigError(f"{gid}: Gset file not found and no surrogate defined")
        name = f"{canonical_id(gid)}-like"
        g = SURROGATES[canonical_id(gid)]()
        _, ref = run_batch(sa, g, reference_runs, 0, name)
        registry = registry.updated(name, ref.cut, f"sa{reference_sweeps}x{reference_runs}")
        out[name] = g
    return out, registry
