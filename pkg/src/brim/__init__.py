"""Behavioral simulator of a bistable resistively-coupled Ising machine for Max-Cut."""
from .baselines import SaSchedule, asa_solve, oim_solve, sa_solve
from .dynamics import (
    AnnealSchedule,
    BrimConfig,
    IntegratorSpec,
    NodeParams,
    NodeState,
    PerturbPolicy,
    ZivParams,
    default_config,
    integrate,
    readout,
)
from .errors import (
    BruteForceCapError,
    ConfigError,
    ContractViolation,
    GsetParseError,
    SimulationFault,
)
from .graph import (
    CouplingMatrix,
    Graph,
    brute_force_maxcut,
    cut_value,
    gen_random_graph,
    gen_toroidal_grid,
    ising_energy,
    load_gset,
    maxcut_to_ising,
    parse_gset,
    serialize_gset,
)
from .harness import BestKnownRegistry, RunReport, Solver, SweepSpec, run_batch

__version__ = "0.1.0"
