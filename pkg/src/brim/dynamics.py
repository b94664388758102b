"""Behavioral model of the bistable resistively coupled Ising machine.

Two right-hand sides are provided. The *physical* one keeps the circuit
quantities (node capacitance, leak and coupling resistors, ZIV diode). The
*normalized* one is what the solver runs by default::

    tau * dv_i/dt = c(t) * sum_j J_ij v_j - leak * G_i * v_i - lam * z(v_i)

with ``z`` the unit ZIV curve (``v**3 - v`` for the cubic shape) and
``G_i = sum_j |J_ij|`` the conductance a node sees through its coupling
resistors. With ``leak = 0`` every isolated node has stable rails at +-1 and a
saddle at 0. The Lyapunov function is

    H(v) = -c * sum_{i<j} J_ij v_i v_j + sum_i (leak * G_i * v_i**2 / 2 + lam * P(v_i)),

with ``P' = z``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .errors import ContractViolation, SimulationFault
from .graph import CouplingMatrix, Graph, maxcut_to_ising, quantize_weights
from .integrators import AdaptiveController, dopri_step, rk4_step

ZIV_SHAPES = ("cubic", "piecewise_linear")


@dataclass(frozen=True)
class ZivParams:
    v_stable: float = 1.0
    g_peak: float = 1.0
    shape: str = "cubic"

    def __post_init__(self):
        if not (self.v_stable > 0 and self.g_peak > 0):
            raise ContractViolation("ZIV needs v_stable > 0 and g_peak > 0")
        if self.shape not in ZIV_SHAPES:
            raise ContractViolation(f"unknown ZIV shape {self.shape!r}")


def ziv_current(v, p: ZivParams):
    """Odd Z-shaped I-V curve with zeros at 0 and +-v_stable.

    Cubic: ``g_peak * (v**3 / v_stable**2 - v)``. Piecewise linear: slope
    ``-2 g_peak / v_stable`` up to ``v_stable / 2``, then slope
    ``+2 g_peak / v_stable`` through the outer zero.
    """
    v = np.asarray(v, dtype=np.float64)
    vs = p.v_stable
    if p.shape == "cubic":
        return p.g_peak * (v * v * v / (vs * vs) - v)
    x = np.abs(v)
    inner = -2.0 * x / vs
    outer = 2.0 * (x - vs) / vs
    return p.g_peak * np.sign(v) * np.where(x <= 0.5 * vs, inner, outer)


def ziv_potential(v, p: ZivParams):
    """Antiderivative of :func:`ziv_current` with value 0 at v = 0."""
    v = np.asarray(v, dtype=np.float64)
    vs = p.v_stable
    if p.shape == "cubic":
        return p.g_peak * (v**4 / (4 * vs * vs) - v * v / 2)
    x = np.abs(v)
    h = 0.5 * vs
    inner = -x * x / vs
    outer = -h * h / vs + ((x - vs) ** 2 - (h - vs) ** 2) / vs
    return p.g_peak * np.where(x <= h, inner, outer)


UNIT_CUBIC = ZivParams()


@dataclass(frozen=True)
class NodeParams:
    C: float = 0.5
    R: float = math.inf
    R_C: float = 1.0
    ziv: ZivParams = field(default_factory=ZivParams)

    def __post_init__(self):
        if not (self.C > 0 and self.R > 0 and self.R_C > 0):
            raise ContractViolation("node needs C, R, R_C > 0")


def matched_ziv(lam: float, conductance: float, tau: float = 1.0) -> ZivParams:
    """Cubic ZIV making a physical node (with 2C = tau, unit R_C) reproduce the
    normalized node with bistability ``lam``.

    ``conductance`` is the node's total leak conductance ``1/R + sum_j |W_ij|``;
    the diode absorbs it, so the match is exact only for nodes sharing it.
    """
    g_peak = (lam + conductance) / 2.0
    return ZivParams(v_stable=math.sqrt(8.0 * g_peak / lam), g_peak=g_peak, shape="cubic")


@dataclass(frozen=True, eq=False)
class NodeState:
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        a = np.array(self.v, dtype=np.float64)
        a.setflags(write=False)
        object.__setattr__(self, "v", a)

    @property
    def n(self) -> int:
        return len(self.v)


@dataclass(frozen=True)
class AnnealSchedule:
    c_min: float = 0.0
    c_max: float = 1.0
    tau_a: float = 10.0
    shape: str = "exponential_rise"

    def __post_init__(self):
        if self.shape == "constant":
            if not 0.0 <= self.c_max <= 1.0:
                raise ContractViolation("constant gain must lie in [0, 1]")
            return
        if self.shape != "exponential_rise":
            raise ContractViolation(f"unknown schedule shape {self.shape!r}")
        if not (0.0 <= self.c_min < self.c_max <= 1.0):
            raise ContractViolation("schedule needs 0 <= c_min < c_max <= 1")
        if not self.tau_a > 0:
            raise ContractViolation("tau_a must be positive")

    @classmethod
    def constant(cls, c: float) -> AnnealSchedule:
        return cls(c_min=c, c_max=c, tau_a=1.0, shape="constant")


def anneal_gain(t: float, s: AnnealSchedule) -> float:
    if t < 0:
        raise ContractViolation("anneal time must be >= 0")
    if s.shape == "constant":
        return s.c_max
    return s.c_min + (s.c_max - s.c_min) * -math.expm1(-t / s.tau_a)


@dataclass(frozen=True)
class PerturbPolicy:
    period: float = math.inf
    nodes_per_event: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if not self.period > 0:
            raise ContractViolation("perturbation period must be > 0 (inf disables)")
        if self.nodes_per_event < 1:
            raise ContractViolation("nodes_per_event must be >= 1")

    @property
    def enabled(self) -> bool:
        return math.isfinite(self.period)


@dataclass(frozen=True)
class IntegratorSpec:
    method: str = "rk4"
    dt: float = 0.05
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    dt_min: float = 1e-10

    def __post_init__(self):
        if self.method not in ("rk4", "rk45"):
            raise ContractViolation(f"unknown integrator {self.method!r}")
        if self.method == "rk4" and not self.dt > 0:
            raise ContractViolation("fixed-step dt must be > 0")
        if self.method == "rk45" and not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ContractViolation("adaptive tolerances must be > 0")


@dataclass(frozen=True, eq=False)
class BrimConfig:
    J: CouplingMatrix
    t_end: float = 50.0
    mode: str = "normalized"
    lam: float = 1.0
    tau: float = 1.0
    params: NodeParams = field(default_factory=NodeParams)
    schedule: AnnealSchedule = field(default_factory=AnnealSchedule)
    perturb: PerturbPolicy = field(default_factory=PerturbPolicy)
    integrator: IntegratorSpec = field(default_factory=IntegratorSpec)
    leak: float = 0.0
    init_amplitude: float = 0.1
    init_vector: np.ndarray | None = None
    rng_seed: int = 0
    normalize: bool = True
    weight_bits: int | None = None
    trace_stride: int = 10

    def __post_init__(self):
        if not self.t_end > 0:
            raise ContractViolation("t_end must be > 0")
        if self.mode not in ("normalized", "physical"):
            raise ContractViolation(f"unknown mode {self.mode!r}")
        if not (self.lam > 0 and self.tau > 0):
            raise ContractViolation("lam and tau must be > 0")
        if self.leak < 0:
            raise ContractViolation("leak must be >= 0")
        if self.trace_stride < 1:
            raise ContractViolation("trace_stride must be >= 1")
        if self.init_vector is not None and len(self.init_vector) != self.J.n:
            raise ContractViolation("init vector length does not match J")

    def with_seed(self, seed: int) -> BrimConfig:
        return replace(self, rng_seed=seed, perturb=replace(self.perturb, rng_seed=seed))

    @property
    def v_stable(self) -> float:
        return self.params.ziv.v_stable if self.mode == "physical" else 1.0


# ---------------------------------------------------------------- right-hand sides


def _coupling_of(g) -> CouplingMatrix:
    return g if isinstance(g, CouplingMatrix) else maxcut_to_ising(g)


def node_derivative_physical(state: NodeState, g: Graph | CouplingMatrix, params: NodeParams,
                             c: float) -> np.ndarray:
    """dv/dt = (c * I_X - I_R - I_ZIV) / 2C with R_ij = R_C / |W_ij|."""
    J = _coupling_of(g)
    return _physical_rhs(J.csr, coupling_conductance(J), params)(state.t, state.v, c)


def _physical_rhs(Jcsr, abs_rowsum, params: NodeParams):
    leak = 1.0 / params.R + abs_rowsum / params.R_C
    inv_rc = 1.0 / params.R_C
    inv_2c = 1.0 / (2.0 * params.C)
    ziv = params.ziv

    def rhs(t, v, c):
        i_x = c * inv_rc * (Jcsr @ v)
        return inv_2c * (i_x - leak * v - ziv_current(2.0 * v, ziv))

    return rhs


def coupling_conductance(J: CouplingMatrix) -> np.ndarray:
    """Row sums of |J|."""
    return np.asarray(abs(J.csr).sum(axis=1)).ravel()


def node_derivative_normalized(state: NodeState, J: CouplingMatrix, c: float, lam: float,
                               tau: float = 1.0, shape: str = "cubic",
                               leak: float = 0.0) -> np.ndarray:
    if not (lam > 0 and tau > 0):
        raise ContractViolation("lam and tau must be > 0")
    return _normalized_rhs(J.csr, lam, tau, shape, leak * coupling_conductance(J))(
        state.t, state.v, c)


def _normalized_rhs(Jcsr, lam: float, tau: float, shape: str = "cubic", leak=None):
    inv_tau = 1.0 / tau
    unit = ZivParams(shape=shape)
    if leak is None or not np.any(leak):
        leak = 0.0

    if shape == "cubic":
        def rhs(t, v, c):
            return inv_tau * (c * (Jcsr @ v) - leak * v - lam * (v * v * v - v))
    else:
        def rhs(t, v, c):
            return inv_tau * (c * (Jcsr @ v) - leak * v - lam * ziv_current(v, unit))
    return rhs


def lyapunov_value(state: NodeState, J: CouplingMatrix, lam: float, c: float,
                   shape: str = "cubic", leak: float = 0.0) -> float:
    v = state.v
    upper = sp.triu(J.csr, k=1, format="csr")
    H = -c * float(v @ (upper @ v))
    if leak:
        H += 0.5 * leak * float((coupling_conductance(J) * v * v).sum())
    return H + lam * float(ziv_potential(v, ZivParams(shape=shape)).sum())


def top_eigenvalue(J: CouplingMatrix) -> float:
    """Largest eigenvalue of a symmetric J (deterministic Lanczos start vector)."""
    if J.n <= 200:
        return float(np.linalg.eigvalsh(J.values)[-1])
    v0 = np.cos(np.arange(J.n) * 0.7071) + 1.5
    return float(eigsh(J.csr, k=1, which="LA", v0=v0, tol=1e-6)[0][0])


def bifurcation_leak(J: CouplingMatrix, lam: float = 1.0, gain: float = 0.3) -> float:
    """Leak ratio at which the origin loses stability near coupling gain ``gain``.

    Uses the mean coupling conductance, so the crossing is approximate on
    irregular graphs.
    """
    G = coupling_conductance(J)
    if not G.any():
        return 0.0
    return max(0.0, (lam + gain * top_eigenvalue(J)) / float(G.mean()))


# ----------------------------------------------------------------- state updates


def perturb(state: NodeState, indices) -> NodeState:
    idx = np.asarray(indices, dtype=np.int64).ravel()
    if len(np.unique(idx)) != len(idx):
        raise ContractViolation("duplicate node in perturbation set")
    if len(idx) and (idx.min() < 0 or idx.max() >= state.n):
        raise ContractViolation("perturbation index out of range")
    v = state.v.copy()
    v[idx] = -v[idx]
    return NodeState(v, state.t)


def readout(state: NodeState | np.ndarray) -> np.ndarray:
    v = state.v if isinstance(state, NodeState) else np.asarray(state)
    return np.where(v < 0, -1, 1).astype(np.int8)


# ------------------------------------------------------------------- integration


@dataclass
class Trajectory:
    t: np.ndarray
    v: np.ndarray
    gain: np.ndarray
    energy: np.ndarray
    best_energy: float
    best_spins: np.ndarray
    events: list = field(default_factory=list)
    steps: int = 0

    def to_csv(self) -> str:
        n = self.v.shape[1]
        header = ",".join(["t"] + [f"v{i}" for i in range(n)] + ["gain", "energy"])
        lines = [header]
        for k in range(len(self.t)):
            row = [repr(float(self.t[k]))] + [repr(float(x)) for x in self.v[k]]
            row += [repr(float(self.gain[k])), repr(float(self.energy[k]))]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def initial_state(cfg: BrimConfig) -> np.ndarray:
    if cfg.init_vector is not None:
        return np.array(cfg.init_vector, dtype=np.float64)
    rng = np.random.default_rng([cfg.rng_seed, 0])
    amp = cfg.init_amplitude * cfg.v_stable
    return rng.uniform(-amp, amp, size=cfg.J.n)


def programmed_coupling(cfg: BrimConfig) -> CouplingMatrix:
    """The J actually loaded into the machine: quantized, then normalized."""
    J = cfg.J
    if cfg.weight_bits is not None:
        J = quantize_weights(J, cfg.weight_bits)
    return J.normalized() if cfg.normalize else J


def _check_finite(v: np.ndarray, t: float):
    if not np.all(np.isfinite(v)):
        bad = int(np.flatnonzero(~np.isfinite(v))[0])
        raise SimulationFault("non-finite node voltage", t=t, index=bad)


def integrate(cfg: BrimConfig) -> tuple[NodeState, Trajectory]:
    """Advance the machine from t = 0 to ``cfg.t_end``.

    Perturbation events fire at multiples of the policy period; the step that
    would cross an event is shortened to land on it. The readout energy is
    evaluated after every step so the returned best-seen state does not depend
    on the trace stride.
    """
    J = programmed_coupling(cfg)
    Jcsr = J.csr
    if cfg.mode == "normalized":
        base = _normalized_rhs(Jcsr, cfg.lam, cfg.tau, cfg.params.ziv.shape,
                               cfg.leak * coupling_conductance(J))
    else:
        base = _physical_rhs(Jcsr, coupling_conductance(J), cfg.params)
    sched = cfg.schedule
    v_clip = 2.0 * cfg.v_stable

    def f(t, v):
        # projected flow: couple through rail-limited voltages and hold a node
        # that sits on the rail while being pushed outward
        vc = np.clip(v, -v_clip, v_clip)
        d = base(t, vc, anneal_gain(t, sched))
        held = (np.abs(v) >= v_clip) & (d * v > 0)
        return np.where(held, 0.0, d) if held.any() else d

    upper = sp.triu(cfg.J.csr, k=1, format="csr")

    def energy_of(s):
        return -float(s @ (upper @ s))

    perturb_rng = np.random.default_rng([cfg.perturb.rng_seed, 1])
    period = cfg.perturb.period
    k_event = 1
    next_event = period * k_event if cfg.perturb.enabled else math.inf
    n_flip = min(cfg.perturb.nodes_per_event, cfg.J.n)

    t = 0.0
    v = initial_state(cfg)
    _check_finite(v, t)
    s = readout(v).astype(np.float64)
    e = energy_of(s)
    best_e, best_s = e, s.copy()
    ts, vs, gains, energies = [t], [v.copy()], [anneal_gain(t, sched)], [e]
    events = []
    steps = 0

    adaptive = cfg.integrator.method == "rk45"
    if adaptive:
        ctrl = AdaptiveController(cfg.integrator.rel_tol, cfg.integrator.abs_tol)
        h = min(cfg.integrator.dt, cfg.t_end)
    dt = cfg.integrator.dt

    while t < cfg.t_end:
        stop = min(next_event, cfg.t_end)
        if adaptive:
            while True:
                h_try = min(h, stop - t)
                if h_try < cfg.integrator.dt_min:
                    raise SimulationFault(
                        "adaptive step fell below dt_min; try the fixed-step rk4 integrator", t=t)
                v_new, err = dopri_step(f, t, v, h_try)
                norm = ctrl.error_norm(v, v_new, err)
                if np.isfinite(norm) and norm <= 1.0:
                    break
                h = ctrl.next_step(h_try, norm) if np.isfinite(norm) else 0.2 * h_try
            t_new = stop if stop - t <= h_try else t + h_try
            h = ctrl.next_step(h_try, norm)
        else:
            if stop - t <= dt:
                h_try, t_new = stop - t, stop
            else:
                h_try, t_new = dt, t + dt
            v_new = rk4_step(f, t, v, h_try)
        _check_finite(v_new, t_new)
        v = np.clip(v_new, -v_clip, v_clip)
        t = t_new
        steps += 1
        if t == next_event and t < cfg.t_end:
            idx = np.sort(perturb_rng.choice(cfg.J.n, size=n_flip, replace=False))
            v[idx] = -v[idx]
            events.append((t, idx))
            k_event += 1
            next_event = period * k_event
        s = readout(v).astype(np.float64)
        e = energy_of(s)
        if e < best_e:
            best_e, best_s = e, s.copy()
        if steps % cfg.trace_stride == 0 or t >= cfg.t_end:
            ts.append(t)
            vs.append(v.copy())
            gains.append(anneal_gain(t, sched))
            energies.append(e)

    trace = Trajectory(
        t=np.array(ts), v=np.array(vs), gain=np.array(gains), energy=np.array(energies),
        best_energy=best_e, best_spins=best_s.astype(np.int8), events=events, steps=steps,
    )
    return NodeState(v, t), trace


def stable_dt(J: CouplingMatrix, lam: float = 1.0, leak: float = 0.0, tau: float = 1.0,
              cap: float = 0.05) -> float:
    """Fixed RK4 step safely inside the stability region of the normalized model.

    Bounds the Jacobian spectral radius by the max row sum of |J| (after the
    max|J| = 1 normalization), the leak, and the ZIV slope at the clamp rail.
    """
    G = coupling_conductance(J.normalized())
    radius = (float(G.max(initial=0.0)) * (1.0 + leak) + 11.0 * lam) / tau
    return min(cap, 1.0 / radius) if radius > 0 else cap


def default_config(J: CouplingMatrix, t_end: float = 50.0, **overrides) -> BrimConfig:
    """Exponential gain ramp reaching ~99% of full gain at t_end, with a stable fixed step."""
    schedule = overrides.pop("schedule", AnnealSchedule(0.0, 1.0, t_end / 5.0))
    if "integrator" not in overrides:
        overrides["integrator"] = IntegratorSpec(
            dt=stable_dt(J, overrides.get("lam", 1.0), overrides.get("leak", 0.0),
                         overrides.get("tau", 1.0)))
    return BrimConfig(J=J, t_end=t_end, schedule=schedule, **overrides)
