"""Reference solvers: simulated annealing, the idealized digital annealer and a
Kuramoto-model oscillator Ising machine."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
import scipy.sparse as sp

from .errors import ContractViolation, SimulationFault
from .graph import CouplingMatrix, Graph, as_spins, cut_value
from .integrators import rk4_step


def _adjacency(g: Graph) -> sp.csr_array:
    return sp.coo_array(
        (np.concatenate([g.weights, g.weights]),
         (np.concatenate([g.rows, g.cols]), np.concatenate([g.cols, g.rows]))),
        shape=(g.n, g.n),
    ).tocsr()


def _csr_arrays(a: sp.csr_array):
    return a.indptr.astype(np.int64), a.indices.astype(np.int64), a.data.astype(np.float64)


def _random_spins(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.where(rng.random(n) < 0.5, -1, 1).astype(np.int8)


# ------------------------------------------------------------ simulated annealing


@dataclass(frozen=True)
class SaSchedule:
    sweeps: int = 1000
    T0: float | None = None
    T_end: float | None = None
    decay: str = "geometric"

    def __post_init__(self):
        if self.sweeps < 1:
            raise ContractViolation("need at least one sweep")
        if self.decay not in ("geometric", "linear"):
            raise ContractViolation(f"unknown decay {self.decay!r}")
        if self.T0 is not None and not self.T0 > 0:
            raise ContractViolation("T0 must be > 0")
        if self.T0 is not None and self.T_end is not None and not 0 < self.T_end < self.T0:
            raise ContractViolation("T_end must lie in (0, T0)")

    def resolved(self, g: Graph) -> SaSchedule:
        """Fill unset temperatures: T0 = max|W| * mean degree, T_end = 1e-3 * T0."""
        T0 = self.T0
        if T0 is None:
            mean_deg = 2.0 * g.m / g.n
            T0 = max(float(np.abs(g.weights).max(initial=0.0)) * mean_deg, 1e-6)
        T_end = self.T_end if self.T_end is not None else 1e-3 * T0
        return SaSchedule(self.sweeps, T0, T_end, self.decay)

    def temperatures(self) -> np.ndarray:
        k = np.arange(self.sweeps) / max(self.sweeps - 1, 1)
        if self.decay == "geometric":
            return self.T0 * (self.T_end / self.T0) ** k
        return self.T0 + (self.T_end - self.T0) * k


@numba.njit(cache=True)
def _metropolis_sweep(s, field, indptr, indices, data, T, u, cut, best_cut, best_s):
    # field_i = sum_j W_ij s_j; flipping i changes the cut by s_i * field_i
    n = len(s)
    for i in range(n):
        delta = s[i] * field[i]
        if delta >= 0.0 or u[i] < math.exp(delta / T):
            old = s[i]
            s[i] = -old
            for k in range(indptr[i], indptr[i + 1]):
                field[indices[k]] -= 2.0 * data[k] * old
            cut += delta
            if cut > best_cut:
                best_cut = cut
                best_s[:] = s
    return cut, best_cut


def metropolis_accept(delta_cut: float, T: float, u: float) -> bool:
    """Acceptance rule used by :func:`sa_solve` (a uniform draw ``u`` in [0, 1))."""
    return delta_cut >= 0 or u < math.exp(delta_cut / T)


def sa_solve(g: Graph, sched: SaSchedule | None = None, seed: int = 0):
    """Single-flip Metropolis annealing; sweeps visit the vertices in order.

    Returns ``(best_spins, best_cut, trace)`` where ``trace`` holds the current
    cut after every sweep.
    """
    sched = (sched or SaSchedule()).resolved(g)
    rng = np.random.default_rng(seed)
    s = _random_spins(rng, g.n)
    adj = _adjacency(g)
    indptr, indices, data = _csr_arrays(adj)
    field = adj @ s.astype(np.float64)
    cut = cut_value(g, s)
    best_cut, best_s = cut, s.copy()
    trace = np.empty(sched.sweeps)
    for k, T in enumerate(sched.temperatures()):
        u = rng.random(g.n)
        cut, best_cut = _metropolis_sweep(s, field, indptr, indices, data, T, u, cut,
                                          best_cut, best_s)
        trace[k] = cut
    return best_s, cut_value(g, best_s), trace


# ---------------------------------------------------- idealized digital annealer


@numba.njit(cache=True)
def _greedy_pass(s, field, indptr, indices, data):
    n = len(s)
    for i in range(n):
        if s[i] * field[i] > 0.0:
            old = s[i]
            s[i] = -old
            for k in range(indptr[i], indptr[i + 1]):
                field[indices[k]] -= 2.0 * data[k] * old


@numba.njit(cache=True)
def _random_flips(s, field, indptr, indices, data, u, p):
    n = len(s)
    for i in range(n):
        if u[i] < p:
            old = s[i]
            s[i] = -old
            for k in range(indptr[i], indptr[i + 1]):
                field[indices[k]] -= 2.0 * data[k] * old


def asa_flip_probability(k: int, cycles: int, p0: float) -> float:
    """Linear decay from ``p0`` on the first cycle to 0 on the last."""
    if cycles == 1:
        return 0.0
    return p0 * (cycles - 1 - k) / (cycles - 1)


def asa_solve(g: Graph, cycles: int = 1000, p0: float = 0.2, seed: int = 0):
    """All-to-all idealization of the digital annealer.

    Each cycle updates every node once, in index order, to its energy-lowering
    spin, then flips each node with a linearly decaying probability. The best
    state seen after any greedy pass is returned as ``(spins, cut)``.
    """
    if cycles < 1:
        raise ContractViolation("cycles must be >= 1")
    rng = np.random.default_rng(seed)
    s = _random_spins(rng, g.n)
    adj = _adjacency(g)
    indptr, indices, data = _csr_arrays(adj)
    field = adj @ s.astype(np.float64)
    best_cut, best_s = -math.inf, s.copy()
    for k in range(cycles):
        _greedy_pass(s, field, indptr, indices, data)
        cut = cut_value(g, s)
        if cut > best_cut:
            best_cut, best_s = cut, s.copy()
        p = asa_flip_probability(k, cycles, p0)
        if p > 0:
            _random_flips(s, field, indptr, indices, data, rng.random(g.n), p)
    return best_s, best_cut


# ----------------------------------------------------------- Kuramoto oscillators


@dataclass(frozen=True, eq=False)
class PhaseState:
    phi: np.ndarray
    t: float = 0.0


def _kuramoto_rhs(Jcsr):
    def rhs(t, phi):
        s, c = np.sin(phi), np.cos(phi)
        return c * (Jcsr @ s) - s * (Jcsr @ c)
    return rhs


def kuramoto_derivative(state: PhaseState, J: CouplingMatrix) -> np.ndarray:
    """dphi_i/dt = sum_j J_ij sin(phi_j - phi_i)."""
    return _kuramoto_rhs(J.csr)(state.t, np.asarray(state.phi, dtype=np.float64))


def kuramoto_lyapunov(state: PhaseState, J: CouplingMatrix) -> float:
    """H = -sum_{i<j} J_ij cos(phi_j - phi_i)."""
    upper = sp.triu(J.csr, k=1, format="coo")
    phi = np.asarray(state.phi, dtype=np.float64)
    return float(-(upper.data * np.cos(phi[upper.col] - phi[upper.row])).sum())


def phase_readout(phi: np.ndarray) -> np.ndarray:
    """Round to the nearest multiple of pi: even -> +1, odd -> -1."""
    k = np.round(np.asarray(phi) / math.pi).astype(np.int64)
    return np.where(k % 2 == 0, 1, -1).astype(np.int8)


@dataclass
class PhaseTrace:
    t: np.ndarray
    phi: np.ndarray
    lyapunov: np.ndarray
    energy: np.ndarray


def oim_solve(J: CouplingMatrix, t_end: float = 50.0, dt: float = 0.05, init=None,
              seed: int = 0, normalize: bool = True, trace_stride: int = 10):
    """Integrate the Kuramoto network with fixed-step RK4 and quantize phases at the end.

    ``init`` is an explicit phase vector; by default phases are uniform in [0, 2*pi).
    """
    if not (t_end > 0 and dt > 0):
        raise ContractViolation("t_end and dt must be > 0")
    Jrun = J.normalized() if normalize else J
    rhs = _kuramoto_rhs(Jrun.csr)
    if init is None:
        phi = np.random.default_rng([seed, 0]).uniform(0.0, 2 * math.pi, size=J.n)
    else:
        phi = np.array(init, dtype=np.float64)
    if not np.all(np.isfinite(phi)):
        raise SimulationFault("non-finite oscillator phase", t=0.0,
                              index=int(np.flatnonzero(~np.isfinite(phi))[0]))
    upper = sp.triu(J.csr, k=1, format="csr")

    def record(t, phi):
        s = phase_readout(phi).astype(np.float64)
        ts.append(t)
        phis.append(phi.copy())
        lyap.append(kuramoto_lyapunov(PhaseState(phi), Jrun))
        energy.append(-float(s @ (upper @ s)))

    ts, phis, lyap, energy = [], [], [], []
    t, steps = 0.0, 0
    record(t, phi)
    while t < t_end:
        h = t_end - t if t_end - t <= dt else dt
        phi = rk4_step(rhs, t, phi, h)
        t = t_end if h == t_end - t else t + h
        steps += 1
        if not np.all(np.isfinite(phi)):
            bad = int(np.flatnonzero(~np.isfinite(phi))[0])
            raise SimulationFault("non-finite oscillator phase", t=t, index=bad)
        if steps % trace_stride == 0 or t >= t_end:
            record(t, phi)
    trace = PhaseTrace(np.array(ts), np.array(phis), np.array(lyap), np.array(energy))
    return phase_readout(phi), trace
