"""Flat ``key = value`` configuration files.

Lines starting with ``#`` are comments. Every key is validated against the
table for the selected solver; unknown keys raise :class:`ConfigError`.
Values spelled ``auto`` are resolved against the problem instance when the
run is built.
"""
from __future__ import annotations

import math

import numpy as np

from .dynamics import (
    AnnealSchedule,
    BrimConfig,
    IntegratorSpec,
    NodeParams,
    PerturbPolicy,
    ZivParams,
    bifurcation_leak,
    stable_dt,
)
from .errors import ConfigError
from .graph import CouplingMatrix

SOLVERS = ("brim", "sa", "asa", "oim")


def parse_flat(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def format_flat(values: dict[str, object]) -> str:
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in values.items())


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf"
        return repr(v)
    if isinstance(v, np.ndarray):
        return ",".join(repr(float(x)) for x in v)
    if v is None:
        return "none"
    return str(v)


def _bool(s: str) -> bool:
    if s.lower() in ("1", "true", "yes", "on"):
        return True
    if s.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _float_or_auto(s: str):
    return "auto" if s == "auto" else float(s)


def _int_or_none(s: str):
    return None if s.lower() == "none" else int(s)


def _float_or_none(s: str):
    return None if s.lower() == "none" else float(s)


def _vector(s: str):
    return None if s.lower() == "none" else np.array([float(x) for x in s.split(",")])


# key -> (parser, default). Defaults describe the tuned Max-Cut solver, not the
# bare dynamics: leak and step size are instance dependent.
BRIM_KEYS = {
    "t_end": (float, 50.0),
    "mode": (str, "normalized"),
    "lambda": (float, 1.0),
    "tau": (float, 1.0),
    "leak": (_float_or_auto, "auto"),
    "bifurcation_gain": (float, 0.3),
    "node.C": (float, 0.5),
    "node.R": (float, math.inf),
    "node.R_C": (float, 1.0),
    "ziv.v_stable": (float, 1.0),
    "ziv.g_peak": (float, 1.0),
    "ziv.shape": (str, "cubic"),
    "schedule.c_min": (float, 0.0),
    "schedule.c_max": (float, 1.0),
    "schedule.tau_a": (_float_or_auto, "auto"),
    "schedule.shape": (str, "exponential_rise"),
    "perturb.period": (float, math.inf),
    "perturb.nodes_per_event": (int, 1),
    "perturb.seed": (_int_or_none, None),
    "integrator.method": (str, "rk4"),
    "integrator.dt": (_float_or_auto, "auto"),
    "integrator.rel_tol": (float, 1e-6),
    "integrator.abs_tol": (float, 1e-9),
    "integrator.dt_min": (float, 1e-10),
    "init.amplitude": (float, 0.1),
    "init.vector": (_vector, None),
    "seed": (int, 0),
    "normalize": (_bool, True),
    "weight_bits": (_int_or_none, None),
    "trace_stride": (int, 10),
}

SA_KEYS = {
    "sweeps": (int, 1000),
    "T0": (_float_or_none, None),
    "T_end": (_float_or_none, None),
    "decay": (str, "geometric"),
    "seed": (int, 0),
}

ASA_KEYS = {
    "cycles": (int, 1000),
    "p0": (float, 0.2),
    "seed": (int, 0),
}

OIM_KEYS = {
    "t_end": (float, 50.0),
    "dt": (float, 0.05),
    "normalize": (_bool, True),
    "seed": (int, 0),
    "trace_stride": (int, 10),
}

KEYS = {"brim": BRIM_KEYS, "sa": SA_KEYS, "asa": ASA_KEYS, "oim": OIM_KEYS}


def resolve(solver: str, flat: dict[str, str] | None = None) -> dict[str, object]:
    """Typed settings for ``solver``: defaults overlaid with ``flat``.

    A ``solver`` or ``instance`` key is accepted and checked/ignored here.
    """
    if solver not in KEYS:
        raise ConfigError(f"unknown solver {solver!r}; choose from {', '.join(SOLVERS)}")
    table = KEYS[solver]
    out = {k: default for k, (_, default) in table.items()}
    for key, raw in (flat or {}).items():
        if key == "solver":
            if raw != solver:
                raise ConfigError(f"config is for solver {raw!r}, not {solver!r}")
            continue
        if key == "instance":
            continue
        if key not in table:
            raise ConfigError(f"unknown key {key!r} for solver {solver!r}")
        try:
            out[key] = table[key][0](raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from None
    return out


def build_brim_config(settings: dict[str, object], J: CouplingMatrix) -> BrimConfig:
    """Turn resolved BRIM settings into a :class:`BrimConfig` for coupling ``J``."""
    s = settings
    t_end = s["t_end"]
    lam = s["lambda"]
    Jn = J.normalized() if s["normalize"] else J
    leak = s["leak"]
    if leak == "auto":
        leak = bifurcation_leak(Jn, lam, s["bifurcation_gain"])
    tau_a = s["schedule.tau_a"]
    if tau_a == "auto":
        tau_a = t_end / 5.0
    dt = s["integrator.dt"]
    if dt == "auto":
        dt = stable_dt(Jn, lam, leak, s["tau"])
    seed = s["seed"]
    perturb_seed = s["perturb.seed"] if s["perturb.seed"] is not None else seed
    shape = s["schedule.shape"]
    if shape == "constant":
        schedule = AnnealSchedule.constant(s["schedule.c_max"])
    else:
        schedule = AnnealSchedule(s["schedule.c_min"], s["schedule.c_max"], tau_a, shape)
    return BrimConfig(
        J=J,
        t_end=t_end,
        mode=s["mode"],
        lam=lam,
        tau=s["tau"],
        params=NodeParams(s["node.C"], s["node.R"], s["node.R_C"],
                          ZivParams(s["ziv.v_stable"], s["ziv.g_peak"], s["ziv.shape"])),
        schedule=schedule,
        perturb=PerturbPolicy(s["perturb.period"], s["perturb.nodes_per_event"], perturb_seed),
        integrator=IntegratorSpec(s["integrator.method"], dt, s["integrator.rel_tol"],
                                  s["integrator.abs_tol"], s["integrator.dt_min"]),
        leak=leak,
        init_amplitude=s["init.amplitude"],
        init_vector=s["init.vector"],
        rng_seed=seed,
        normalize=s["normalize"],
        weight_bits=s["weight_bits"],
        trace_stride=s["trace_stride"],
    )


def brim_config_to_flat(cfg: BrimConfig) -> dict[str, object]:
    """Every field of ``cfg`` except the coupling matrix, fully resolved."""
    p = cfg.params
    return {
        "solver": "brim",
        "t_end": cfg.t_end,
        "mode": cfg.mode,
        "lambda": cfg.lam,
        "tau": cfg.tau,
        "leak": cfg.leak,
        "node.C": p.C,
        "node.R": p.R,
        "node.R_C": p.R_C,
        "ziv.v_stable": p.ziv.v_stable,
        "ziv.g_peak": p.ziv.g_peak,
        "ziv.shape": p.ziv.shape,
        "schedule.c_min": cfg.schedule.c_min,
        "schedule.c_max": cfg.schedule.c_max,
        "schedule.tau_a": cfg.schedule.tau_a,
        "schedule.shape": cfg.schedule.shape,
        "perturb.period": cfg.perturb.period,
        "perturb.nodes_per_event": cfg.perturb.nodes_per_event,
        "perturb.seed": cfg.perturb.rng_seed,
        "integrator.method": cfg.integrator.method,
        "integrator.dt": cfg.integrator.dt,
        "integrator.rel_tol": cfg.integrator.rel_tol,
        "integrator.abs_tol": cfg.integrator.abs_tol,
        "integrator.dt_min": cfg.integrator.dt_min,
        "init.amplitude": cfg.init_amplitude,
        "init.vector": cfg.init_vector,
        "seed": cfg.rng_seed,
        "normalize": cfg.normalize,
        "weight_bits": cfg.weight_bits,
        "trace_stride": cfg.trace_stride,
    }


def brim_config_to_text(cfg: BrimConfig) -> str:
    return format_flat(brim_config_to_flat(cfg))


def brim_config_from_text(text: str, J: CouplingMatrix) -> BrimConfig:
    return build_brim_config(resolve("brim", parse_flat(text)), J)
