"""Max-Cut instances, their Ising form, exact evaluation and small-graph oracles.

Spins are plain numpy arrays over {+1, -1}. A graph stores each undirected edge
once as ``(i, j, w)`` with ``i < j``.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, TextIO

import numba
import numpy as np
import scipy.sparse as sp

from .errors import BruteForceCapError, ContractViolation, GsetParseError

BRUTE_FORCE_CAP = 30


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ContractViolation("graph needs at least one vertex")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, float]]) -> Graph:
        """Build a canonical graph; duplicate pairs are summed, self-loops rejected."""
        merged: dict[tuple[int, int], float] = {}
        for i, j, w in edges:
            i, j = int(i), int(j)
            if i == j:
                raise ContractViolation(f"self-loop on vertex {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ContractViolation(f"edge ({i}, {j}) outside 0..{n - 1}")
            key = (i, j) if i < j else (j, i)
            merged[key] = merged.get(key, 0.0) + float(w)
        keys = sorted(merged)
        rows = np.array([k[0] for k in keys], dtype=np.int64)
        cols = np.array([k[1] for k in keys], dtype=np.int64)
        weights = np.array([merged[k] for k in keys], dtype=np.float64)
        return cls(n, _frozen(rows), _frozen(cols), _frozen(weights))

    @property
    def m(self) -> int:
        return len(self.weights)

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return [(int(i), int(j), float(w)) for i, j, w in zip(self.rows, self.cols, self.weights)]

    def total_weight(self) -> float:
        return float(self.weights.sum())

    def is_integral(self) -> bool:
        return bool(np.all(self.weights == np.round(self.weights)))

    def degrees(self) -> np.ndarray:
        return np.bincount(self.rows, minlength=self.n) + np.bincount(self.cols, minlength=self.n)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Dense coupling matrix ``J`` with zero diagonal.

    Matrix-vector products go through a cached CSR copy, which keeps the
    reduction order fixed from call to call.
    """

    values: np.ndarray
    symmetric: bool = True

    def __post_init__(self):
        a = np.array(self.values, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ContractViolation("coupling matrix must be square")
        if np.any(np.diag(a) != 0):
            raise ContractViolation("coupling matrix must have a zero diagonal")
        if self.symmetric and not np.array_equal(a, a.T):
            raise ContractViolation("matrix flagged symmetric but J != J^T")
        object.__setattr__(self, "values", _frozen(a))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @cached_property
    def csr(self) -> sp.csr_array:
        return sp.csr_array(self.values)

    @cached_property
    def max_abs(self) -> float:
        return float(np.abs(self.values).max()) if self.values.size else 0.0

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.csr @ v

    def scaled(self, factor: float) -> CouplingMatrix:
        return CouplingMatrix(self.values * factor, self.symmetric)

    def normalized(self) -> CouplingMatrix:
        """Rescale so that max |J_ij| = 1 (identity for an all-zero matrix)."""
        return self if self.max_abs in (0.0, 1.0) else self.scaled(1.0 / self.max_abs)


def as_spins(s, n: int | None = None) -> np.ndarray:
    arr = np.asarray(s)
    if arr.ndim != 1:
        raise ContractViolation("spin vector must be one-dimensional")
    if n is not None and len(arr) != n:
        raise ContractViolation(f"spin vector has length {len(arr)}, expected {n}")
    if not np.all((arr == 1) | (arr == -1)):
        raise ContractViolation("spins must be +1 or -1")
    return arr.astype(np.int8)


# --------------------------------------------------------------------------- I/O


def parse_gset(text: str | TextIO) -> Graph:
    """Parse the whitespace separated ``n m`` / ``i j w`` format with 1-based indices."""
    if not isinstance(text, str):
        text = text.read()
    header = None
    n = m = 0
    edges = []
    for lineno, line in enumerate(io.StringIO(text), start=1):
        fields = line.split()
        if not fields:
            continue
        if header is None:
            if len(fields) != 2:
                raise GsetParseError(lineno, "header must be 'n m'")
            try:
                n, m = int(fields[0]), int(fields[1])
            except ValueError:
                raise GsetParseError(lineno, "header values must be integers") from None
            if n < 1 or m < 0:
                raise GsetParseError(lineno, "header needs n >= 1 and m >= 0")
            header = lineno
            continue
        if len(fields) != 3:
            raise GsetParseError(lineno, "edge line must be 'i j w'")
        try:
            i, j = int(fields[0]), int(fields[1])
            w = float(fields[2])
        except ValueError:
            raise GsetParseError(lineno, f"cannot parse edge {line.strip()!r}") from None
        if not math.isfinite(w):
            raise GsetParseError(lineno, "weight must be finite")
        for idx in (i, j):
            if not 1 <= idx <= n:
                raise GsetParseError(lineno, f"vertex {idx} outside [1, {n}]")
        if i == j:
            raise GsetParseError(lineno, f"self-loop on vertex {i}")
        if len(edges) == m:
            raise GsetParseError(lineno, f"more edge lines than the {m} declared")
        edges.append((i - 1, j - 1, w))
    if header is None:
        raise GsetParseError(1, "empty input")
    if len(edges) != m:
        raise GsetParseError(lineno, f"header declares {m} edges, found {len(edges)}")
    return Graph.from_edges(n, edges)


def load_gset(path) -> Graph:
    with open(path) as fh:
        return parse_gset(fh)


def _format_weight(w: float) -> str:
    if float(w).is_integer():
        return str(int(w))
    return repr(float(w))


def serialize_gset(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines += [f"{i + 1} {j + 1} {_format_weight(w)}" for i, j, w in g.edges]
    return "\n".join(lines) + "\n"


def save_gset(g: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_gset(g))


# -------------------------------------------------------------------- objectives


def cut_value(g: Graph, s) -> float:
    s = as_spins(s, g.n)
    crossing = s[g.rows] != s[g.cols]
    return float(g.weights[crossing].sum())


def ising_energy(J: CouplingMatrix, s) -> float:
    """H = -sum_{i<j} J_ij s_i s_j."""
    s = as_spins(s, J.n).astype(np.float64)
    upper = sp.triu(J.csr, k=1, format="coo")
    return float(-(upper.data * s[upper.row] * s[upper.col]).sum())


def _spin_rows(S, n: int) -> np.ndarray:
    S = np.asarray(S)
    if S.ndim != 2 or S.shape[1] != n:
        raise ContractViolation(f"expected a (k, {n}) array of spin vectors")
    if not np.all((S == 1) | (S == -1)):
        raise ContractViolation("spins must be +1 or -1")
    return S.astype(np.int8)


def cut_values(g: Graph, S) -> np.ndarray:
    """Cut value of every row of ``S``."""
    S = _spin_rows(S, g.n)
    return (S[:, g.rows] != S[:, g.cols]).astype(np.float64) @ g.weights


def ising_energies(J: CouplingMatrix, S) -> np.ndarray:
    """Ising energy of every row of ``S``."""
    S = _spin_rows(S, J.n).astype(np.float64)
    upper = sp.triu(J.csr, k=1, format="coo")
    return -((S[:, upper.row] * S[:, upper.col]) @ upper.data)


def maxcut_to_ising(g: Graph) -> CouplingMatrix:
    J = np.zeros((g.n, g.n))
    J[g.rows, g.cols] = -g.weights
    J[g.cols, g.rows] = -g.weights
    return CouplingMatrix(J, symmetric=True)


def quantize_weights(J: CouplingMatrix, bits: int) -> CouplingMatrix:
    """Round magnitudes onto the 2**bits - 1 uniform DAC levels in (0, max|J|].

    Integer-valued matrices whose range already fits the code space are
    passed through: their integer codes drive the DAC directly.
    """
    if not 1 <= bits <= 16:
        raise ContractViolation("bits must be in 1..16")
    levels = 2**bits - 1
    top = J.max_abs
    a = J.values
    if top == 0.0 or (top <= levels and np.all(a == np.round(a))):
        return J
    mag = np.abs(a)
    code = np.clip(np.round(mag * (levels / top)), 1, levels)
    q = np.where(mag > 0, np.sign(a) * (top * (code / levels)), 0.0)
    if J.symmetric:
        # float rounding above is elementwise, so symmetry is already exact
        assert np.array_equal(q, q.T)
    return CouplingMatrix(q, J.symmetric)


# ------------------------------------------------------------------ exact oracle


@numba.njit(cache=True)
def _gray_search(n, adj_ptr, adj_idx, adj_w, tol):
    # vertex 0 pinned to +1; others start at -1; bit p of the Gray code <-> vertex n-1-p
    s = -np.ones(n, dtype=np.int8)
    s[0] = 1
    cut = 0.0
    for k in range(adj_ptr[0], adj_ptr[1]):
        cut += adj_w[k]
    best = cut
    best_code = 0
    code = 0
    k_bits = n - 1
    total = 1 << k_bits
    for t in range(1, total):
        p = 0
        while not (t >> p) & 1:
            p += 1
        v = n - 1 - p
        # flipping v changes each incident edge's crossing status
        delta = 0.0
        for k in range(adj_ptr[v], adj_ptr[v + 1]):
            u = adj_idx[k]
            if s[u] == s[v]:
                delta += adj_w[k]
            else:
                delta -= adj_w[k]
        s[v] = -s[v]
        cut += delta
        code ^= 1 << p
        if cut > best + tol:
            best = cut
            best_code = code
        elif cut >= best - tol and code < best_code:
            best_code = code
    return best_code


def brute_force_maxcut(g: Graph, cap: int = BRUTE_FORCE_CAP) -> tuple[float, np.ndarray]:
    """Exact Max-Cut by enumerating the 2**(n-1) partitions with vertex 0 fixed to +1.

    Among maximizers the lexicographically smallest spin vector is returned.
    """
    if g.n > cap:
        raise BruteForceCapError(
            f"n={g.n} exceeds the brute-force cap of {cap}; pass cap={g.n} to run anyway"
        )
    if g.n == 1:
        return 0.0, np.ones(1, dtype=np.int8)
    adj = sp.coo_array(
        (np.concatenate([g.weights, g.weights]),
         (np.concatenate([g.rows, g.cols]), np.concatenate([g.cols, g.rows]))),
        shape=(g.n, g.n),
    ).tocsr()
    tol = 1e-9 * (1.0 + float(np.abs(g.weights).sum()))
    code = _gray_search(g.n, adj.indptr.astype(np.int64), adj.indices.astype(np.int64),
                        adj.data.astype(np.float64), tol)
    s = -np.ones(g.n, dtype=np.int8)
    s[0] = 1
    for p in range(g.n - 1):
        if (code >> p) & 1:
            s[g.n - 1 - p] = 1
    return cut_value(g, s), s


# -------------------------------------------------------------------- generators


@dataclass(frozen=True)
class WeightModel:
    """Edge weight distribution: ``pm1``, ``int`` in [low, high] without 0, or ``real`` in [low, high)."""

    kind: str = "pm1"
    low: float = -1.0
    high: float = 1.0

    def __post_init__(self):
        if self.kind not in ("pm1", "one", "int", "real"):
            raise ContractViolation(f"unknown weight model {self.kind!r}")
        if self.kind in ("int", "real") and not self.low < self.high:
            raise ContractViolation("weight range needs low < high")

    @classmethod
    def parse(cls, text: str) -> WeightModel:
        """``pm1``, ``one``, ``int:-3:3`` or ``real:-3.14:3.14``."""
        kind, *bounds = text.split(":")
        if bounds:
            return cls(kind, float(bounds[0]), float(bounds[1]))
        return cls(kind)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "one":
            return np.ones(size)
        if self.kind == "pm1":
            return rng.choice(np.array([-1.0, 1.0]), size=size)
        if self.kind == "int":
            choices = np.arange(math.ceil(self.low), math.floor(self.high) + 1, dtype=np.float64)
            choices = choices[choices != 0]
            return rng.choice(choices, size=size)
        return rng.uniform(self.low, self.high, size=size)


def gen_random_graph(n: int, density: float, weight_model: WeightModel | str = "pm1",
                     seed: int = 0) -> Graph:
    """Erdos-Renyi style instance: every pair kept independently with probability ``density``."""
    if n < 2:
        raise ContractViolation("need n >= 2")
    if not 0.0 < density <= 1.0:
        raise ContractViolation(f"density {density} not in (0, 1]")
    if isinstance(weight_model, str):
        weight_model = WeightModel.parse(weight_model)
    rng = np.random.default_rng(seed)
    rows, cols = [], []
    for i in range(n - 1):
        keep = np.flatnonzero(rng.random(n - 1 - i) < density)
        rows.append(np.full(len(keep), i, dtype=np.int64))
        cols.append(keep + i + 1)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    w = weight_model.draw(rng, len(rows)).astype(np.float64)
    return Graph(n, _frozen(rows), _frozen(cols), _frozen(w))


def gen_toroidal_grid(n_rows: int, n_cols: int, weight_model: WeightModel | str = "pm1",
                      seed: int = 0) -> Graph:
    """2-D toroidal grid, the structure behind the G11-G13 family."""
    if isinstance(weight_model, str):
        weight_model = WeightModel.parse(weight_model)
    rng = np.random.default_rng(seed)
    idx = np.arange(n_rows * n_cols).reshape(n_rows, n_cols)
    pairs = np.concatenate([
        np.stack([idx.ravel(), np.roll(idx, -1, axis=1).ravel()], axis=1),
        np.stack([idx.ravel(), np.roll(idx, -1, axis=0).ravel()], axis=1),
    ])
    w = weight_model.draw(rng, len(pairs))
    return Graph.from_edges(n_rows * n_cols, ((a, b, x) for (a, b), x in zip(pairs, w)))


def six_node_example() -> Graph:
    """Six-vertex mixed-sign example with max-cut 18.2 at {N1,N2,N3,N5} | {N4,N6}.

    The weights are a reconstruction: only the optimum and the winning
    partition are known, and this instance reproduces both (uniquely).
    """
    edges = [
        (0, 3, 3.5), (1, 3, 2.8), (2, 3, 2.0), (0, 5, 2.2), (2, 5, 4.1), (4, 5, 3.6),
        (0, 1, -1.5), (1, 2, 1.2), (2, 4, -0.8), (3, 5, -2.4), (1, 4, 0.9),
    ]
    return Graph.from_edges(6, edges)
