import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from brim.baselines import (
    PhaseState,
    SaSchedule,
    asa_flip_probability,
    asa_solve,
    kuramoto_derivative,
    kuramoto_lyapunov,
    metropolis_accept,
    oim_solve,
    phase_readout,
    sa_solve,
)
from brim.errors import ContractViolation, SimulationFault
from brim.graph import (
    CouplingMatrix,
    Graph,
    brute_force_maxcut,
    cut_value,
    gen_random_graph,
    ising_energy,
    maxcut_to_ising,
)

EDGE = Graph.from_edges(2, [(0, 1, 1.0)])


def pair(j):
    return CouplingMatrix(np.array([[0.0, j], [j, 0.0]]))


def random_symmetric(rng, n):
    upper = np.triu(rng.uniform(-1, 1, (n, n)), 1)
    return CouplingMatrix(upper + upper.T)


# ----------------------------------------------------------------------- SA


def test_sa_single_edge():
    for seed in range(5):
        s, cut, _ = sa_solve(EDGE, SaSchedule(sweeps=50), seed)
        assert cut == 1 and s[0] != s[1]


def test_sa_schedule_defaults_and_decay():
    g = gen_random_graph(30, 0.2, "int:-4:4", seed=0)
    sched = SaSchedule(sweeps=100).resolved(g)
    assert sched.T0 == pytest.approx(4 * 2 * g.m / g.n)
    assert sched.T_end == pytest.approx(1e-3 * sched.T0)
    T = sched.temperatures()
    assert T[0] == pytest.approx(sched.T0) and T[-1] == pytest.approx(sched.T_end)
    assert np.all(np.diff(T) < 0)
    lin = SaSchedule(10, 2.0, 1.0, "linear").temperatures()
    assert np.allclose(np.diff(lin), -1.0 / 9)
    with pytest.raises(ContractViolation):
        SaSchedule(10, 1.0, 2.0)


def test_metropolis_limits():
    rng = np.random.default_rng(0)
    u = rng.random(100_000)
    uphill = -rng.uniform(0.1, 5.0, 100_000)  # negative change in cut
    assert not any(metropolis_accept(d, 1e-12, x) for d, x in zip(uphill, u))
    rate = np.mean([metropolis_accept(d, 1e9, x) for d, x in zip(uphill, u)])
    assert rate > 0.99
    assert metropolis_accept(0.0, 1e-12, 0.999)


@pytest.mark.parametrize("seed", range(3))
def test_sa_tiny_graphs_reach_optimum(seed):
    g = gen_random_graph(18, 0.4, "int:-3:3", seed=200 + seed)
    opt, _ = brute_force_maxcut(g)
    best = max(sa_solve(g, SaSchedule(sweeps=10_000), s)[1] for s in range(50))
    assert best == opt


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 30), st.floats(0.1, 1.0), st.integers(0, 10**6))
def test_sa_asa_report_consistent_cut(n, density, seed):
    g = gen_random_graph(n, density, "real:-2:2", seed=seed)
    s, cut, trace = sa_solve(g, SaSchedule(sweeps=20), seed)
    assert cut == cut_value(g, s)
    assert len(trace) == 20 and trace.max() <= cut + 1e-9
    s2, cut2 = asa_solve(g, 10, 0.2, seed)
    assert cut2 == cut_value(g, s2)


def test_sa_deterministic():
    g = gen_random_graph(40, 0.3, "pm1", seed=1)
    a = sa_solve(g, SaSchedule(sweeps=200), 5)
    b = sa_solve(g, SaSchedule(sweeps=200), 5)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[2], b[2])


# ---------------------------------------------------------------------- ASA


def test_asa_single_edge_one_greedy_cycle():
    for seed in range(5):
        s, cut = asa_solve(EDGE, cycles=1, p0=0.0, seed=seed)
        assert cut == 1


def test_asa_zero_weights():
    g = Graph.from_edges(5, [(0, 1, 0.0), (2, 3, 0.0)])
    _, cut = asa_solve(g, 10, 0.2, 0)
    assert cut == 0


def test_asa_flip_probability_linear():
    p = [asa_flip_probability(k, 5, 0.2) for k in range(5)]
    assert p == pytest.approx([0.2, 0.15, 0.1, 0.05, 0.0])
    assert asa_flip_probability(0, 1, 0.2) == 0.0
    with pytest.raises(ContractViolation):
        asa_solve(EDGE, cycles=0)


def test_asa_greedy_fixed_point():
    """With p0 = 0 the result is a local optimum: no single flip improves it."""
    g = gen_random_graph(40, 0.3, "int:-3:3", seed=8)
    s, cut = asa_solve(g, cycles=20, p0=0.0, seed=1)
    for i in range(g.n):
        t = s.copy()
        t[i] = -t[i]
        assert cut_value(g, t) <= cut


@pytest.mark.parametrize("seed", range(3))
def test_asa_tiny_graphs_reach_optimum(seed):
    g = gen_random_graph(20, 0.5, "pm1", seed=300 + seed)
    opt, _ = brute_force_maxcut(g)
    assert max(asa_solve(g, 1000, 0.2, s)[1] for s in range(50)) == opt


# ---------------------------------------------------------------- Kuramoto


def test_kuramoto_derivative_examples():
    J = pair(1.0)
    assert np.allclose(kuramoto_derivative(PhaseState(np.array([0.0, math.pi])), J), 0, atol=1e-15)
    d = kuramoto_derivative(PhaseState(np.array([0.0, math.pi / 2])), J)
    assert d[0] == pytest.approx(1.0) and d[1] == pytest.approx(-1.0)
    zero = CouplingMatrix(np.zeros((4, 4)))
    assert not kuramoto_derivative(PhaseState(np.arange(4.0)), zero).any()


def test_kuramoto_lyapunov_examples():
    J = pair(1.0)
    assert kuramoto_lyapunov(PhaseState(np.array([0.3, 0.3])), J) == pytest.approx(-1)
    assert kuramoto_lyapunov(PhaseState(np.array([0.3, 0.3 + math.pi])), J) == pytest.approx(1)


@given(st.integers(2, 12), st.integers(0, 10**6))
def test_kuramoto_quantized_matches_ising(n, seed):
    rng = np.random.default_rng(seed)
    J = random_symmetric(rng, n)
    k = rng.integers(-3, 4, n)
    phi = k * math.pi
    spins = phase_readout(phi)
    assert np.array_equal(spins, np.where(k % 2 == 0, 1, -1))
    assert kuramoto_lyapunov(PhaseState(phi), J) == pytest.approx(ising_energy(J, spins), abs=1e-9)
    assert abs(kuramoto_lyapunov(PhaseState(rng.uniform(0, 7, n)), J)) <= np.abs(J.values).sum() / 2


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 20), st.integers(0, 2**32 - 1))
def test_kuramoto_gradient_identity(n, seed):
    rng = np.random.default_rng(seed)
    J = random_symmetric(rng, n)
    phi = rng.uniform(-math.pi, 3 * math.pi, n)
    h = 1e-5
    grad = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        grad[i] = (kuramoto_lyapunov(PhaseState(phi + e), J)
                   - kuramoto_lyapunov(PhaseState(phi - e), J)) / (2 * h)
    d = kuramoto_derivative(PhaseState(phi), J)
    assert np.all(np.abs(grad + d) <= np.maximum(1e-6, 1e-4 * np.abs(d)))


@given(st.integers(2, 15), st.integers(0, 10**6))
def test_phase_translation_invariance(n, seed):
    rng = np.random.default_rng(seed)
    J = random_symmetric(rng, n)
    phi = rng.uniform(0, 2 * math.pi, n)
    a, b = PhaseState(phi), PhaseState(phi + 0.37)
    assert np.allclose(kuramoto_derivative(a, J), kuramoto_derivative(b, J), rtol=0, atol=1e-12)
    assert kuramoto_lyapunov(a, J) == pytest.approx(kuramoto_lyapunov(b, J), abs=1e-12)


def test_phase_readout_rounding():
    phi = np.array([0.1, math.pi - 0.1, math.pi + 1.4, -math.pi, 2 * math.pi + 0.2, -0.2])
    assert list(phase_readout(phi)) == [1, -1, -1, -1, 1, 1]


@pytest.mark.parametrize("j, expect", [(1.0, 1), (-1.0, -1)])
def test_oim_two_oscillators_lock(j, expect):
    for seed in range(10):
        spins, trace = oim_solve(pair(j), t_end=30.0, seed=seed)
        assert spins[0] * spins[1] == expect
        d = (trace.phi[-1, 1] - trace.phi[-1, 0]) % (2 * math.pi)
        target = 0.0 if j > 0 else math.pi
        assert min(abs(d - target), 2 * math.pi - abs(d - target)) < 1e-3


def test_oim_lyapunov_descent():
    rng = np.random.default_rng(3)
    J = random_symmetric(rng, 30)
    _, trace = oim_solve(J, t_end=20.0, dt=0.02, seed=1, trace_stride=1)
    H = trace.lyapunov
    assert np.all(np.diff(H) <= 1e-8 * (1 + np.abs(H[:-1])))


def test_oim_matches_solve_ivp():
    rng = np.random.default_rng(4)
    J = random_symmetric(rng, 10)
    phi0 = rng.uniform(0, 2 * math.pi, 10)
    _, trace = oim_solve(J, t_end=5.0, dt=0.005, init=phi0, normalize=False)
    Jv = J.values

    def rhs(t, phi):
        return (Jv * np.sin(phi[None, :] - phi[:, None])).sum(axis=1)

    ref = solve_ivp(rhs, (0, 5.0), phi0, method="DOP853", rtol=1e-11, atol=1e-12)
    assert np.allclose(trace.phi[-1], ref.y[:, -1], atol=1e-8)


def test_oim_energy_trace_and_faults():
    g = gen_random_graph(25, 0.3, "int:-2:2", seed=2)
    J = maxcut_to_ising(g)
    spins, trace = oim_solve(J, t_end=10.0, seed=3)
    assert trace.t[0] == 0 and trace.t[-1] == 10.0
    assert trace.energy[-1] == ising_energy(J, spins)
    with pytest.raises(SimulationFault):
        oim_solve(J, t_end=1.0, init=np.full(25, np.nan))
    with pytest.raises(ContractViolation):
        oim_solve(J, t_end=0.0)
