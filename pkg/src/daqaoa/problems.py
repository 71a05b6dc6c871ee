"""MAX-CUT and MAX-2-SAT instances and their diagonal Ising Hamiltonians.

Conventions used throughout the package:

* qubits are 1-indexed;
* bit ``z_q`` maps to spin ``(-1)**z_q``;
* basis index is ``sum(z_q * 2**(n - q))`` so qubit 1 is the most significant bit.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

MAX_ENUMERATION_QUBITS = 24


class ProblemError(ValueError):
    """Invalid problem instance or input file."""


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        if self.n < 2:
            raise ProblemError(f"graph needs n >= 2, got {self.n}")
        clean = set()
        for e in self.edges:
            j, k = (int(e[0]), int(e[1]))
            if j == k:
                raise ProblemError(f"self-loop on vertex {j}")
            j, k = min(j, k), max(j, k)
            if j < 1 or k > self.n:
                raise ProblemError(f"edge {(j, k)} out of range for n={self.n}")
            clean.add((j, k))
        object.__setattr__(self, "edges", frozenset(clean))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n + 1, dtype=int)
        for j, k in self.edges:
            deg[j] += 1
            deg[k] += 1
        return deg[1:]

    @property
    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.edges else 0

    def cut_size(self, bits: Sequence[int]) -> int:
        return sum(1 for j, k in self.edges if bits[j - 1] != bits[k - 1])


@dataclass(frozen=True)
class SatClause:
    """2-SAT clause on ``(j, k)``; violated exactly when ``(z_j, z_k) == (a0, a1)``."""

    j: int
    k: int
    a0: int = 0
    a1: int = 0

    def __post_init__(self):
        if not self.j < self.k:
            raise ProblemError(f"clause needs j < k, got {(self.j, self.k)}")
        if self.a0 not in (0, 1) or self.a1 not in (0, 1):
            raise ProblemError(f"clause type must be binary, got {(self.a0, self.a1)}")

    def satisfied(self, bits: Sequence[int]) -> bool:
        return (bits[self.j - 1], bits[self.k - 1]) != (self.a0, self.a1)


@dataclass
class IsingHamiltonian:
    """``H(z) = offset + sum_j h_j s_j + sum_{j<k} g_jk s_j s_k`` with ``s = (-1)**z``."""

    n: int
    couplings: np.ndarray
    fields: np.ndarray = None
    offset: float = 0.0

    def __post_init__(self):
        g = np.asarray(self.couplings, dtype=float)
        if g.shape != (self.n, self.n):
            raise ProblemError(f"couplings must be {self.n}x{self.n}, got {g.shape}")
        if not np.allclose(g, g.T) or np.any(np.diag(g) != 0):
            raise ProblemError("couplings must be symmetric with zero diagonal")
        self.couplings = g
        self.fields = np.zeros(self.n) if self.fields is None else np.asarray(self.fields, dtype=float)
        if self.fields.shape != (self.n,):
            raise ProblemError("fields must have length n")
        self.offset = float(self.offset)

    @classmethod
    def zero(cls, n: int) -> "IsingHamiltonian":
        return cls(n, np.zeros((n, n)))

    def pair_couplings(self) -> np.ndarray:
        """Couplings g_jk flattened in lexicographic pair order (1,2), (1,3), ..."""
        iu = np.triu_indices(self.n, 1)
        return self.couplings[iu].copy()

    def diagonal(self) -> np.ndarray:
        if self.n > MAX_ENUMERATION_QUBITS:
            raise ProblemError(f"dense diagonal refused for n={self.n}")
        s = spin_table(self.n)
        diag = np.full(2**self.n, self.offset)
        diag += s @ self.fields
        # 0.5 * s^T G s counts each pair once since G is symmetric with zero diagonal
        diag += 0.5 * np.einsum("zi,ij,zj->z", s, self.couplings, s, optimize=True)
        return diag

    def __add__(self, other: "IsingHamiltonian") -> "IsingHamiltonian":
        if other.n != self.n:
            raise ProblemError("cannot add Hamiltonians of different size")
        return IsingHamiltonian(
            self.n, self.couplings + other.couplings, self.fields + other.fields, self.offset + other.offset
        )


def spin_table(n: int) -> np.ndarray:
    """(2**n, n) array of spins (-1)**z_q, rows in basis order."""
    idx = np.arange(2**n)[:, None]
    bits = (idx >> (n - 1 - np.arange(n))[None, :]) & 1
    return 1.0 - 2.0 * bits


def bits_of(index: int, n: int) -> list[int]:
    return [(index >> (n - q)) & 1 for q in range(1, n + 1)]


def _parse_bits(z, n: int) -> list[int]:
    if isinstance(z, str):
        bits = [int(c) for c in z]
    else:
        bits = [int(b) for b in z]
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise ProblemError(f"expected a {n}-bit string, got {z!r}")
    return bits


def maxcut_hamiltonian(graph: Graph) -> IsingHamiltonian:
    n = graph.n
    g = np.zeros((n, n))
    for j, k in graph.edges:
        g[j - 1, k - 1] = g[k - 1, j - 1] = -0.5
    return IsingHamiltonian(n, g, np.zeros(n), 0.5 * len(graph.edges))


def max2sat_hamiltonian(n: int, clauses: Iterable[SatClause]) -> IsingHamiltonian:
    g = np.zeros((n, n))
    h = np.zeros(n)
    c = 0.0
    for cl in clauses:
        if cl.k > n:
            raise ProblemError(f"clause {cl} out of range for n={n}")
        sj, sk = (-1) ** cl.a0, (-1) ** cl.a1
        c += 0.75
        h[cl.j - 1] -= 0.25 * sj
        h[cl.k - 1] -= 0.25 * sk
        g[cl.j - 1, cl.k - 1] -= 0.25 * sj * sk
        g[cl.k - 1, cl.j - 1] -= 0.25 * sj * sk
    return IsingHamiltonian(n, g, h, c)


def evaluate(H: IsingHamiltonian, z) -> float:
    bits = _parse_bits(z, H.n)
    s = np.array([1 - 2 * b for b in bits], dtype=float)
    return float(H.offset + s @ H.fields + 0.5 * s @ H.couplings @ s)


def max_value(H: IsingHamiltonian, budget: int = MAX_ENUMERATION_QUBITS) -> float:
    if H.n > budget:
        raise ProblemError(f"brute-force maximum refused: n={H.n} exceeds budget {budget}")
    return float(H.diagonal().max())


def random_erdos_renyi(n: int, p_clause: float, seed) -> Graph:
    if not 0.0 <= p_clause <= 1.0:
        raise ProblemError(f"p_clause must lie in [0, 1], got {p_clause}")
    rng = np.random.default_rng(seed)
    pairs = list(combinations(range(1, n + 1), 2))
    keep = rng.random(len(pairs)) < p_clause
    return Graph(n, frozenset(p for p, k in zip(pairs, keep) if k))


def random_max2sat(n: int, p_clause: float, seed) -> list[SatClause]:
    if not 0.0 <= p_clause <= 1.0:
        raise ProblemError(f"p_clause must lie in [0, 1], got {p_clause}")
    rng = np.random.default_rng(seed)
    pairs = list(combinations(range(1, n + 1), 2))
    keep = rng.random(len(pairs)) < p_clause
    types = rng.integers(0, 4, size=len(pairs))
    return [SatClause(j, k, int(t >> 1), int(t & 1)) for (j, k), on, t in zip(pairs, keep, types) if on]


def regular_reference_graph() -> Graph:
    """8-vertex 5-regular graph: complement of the 8-cycle."""
    cycle = {(q, q % 8 + 1) for q in range(1, 9)}
    cycle = {(min(e), max(e)) for e in cycle}
    return Graph(8, frozenset(p for p in combinations(range(1, 9), 2) if p not in cycle))


@dataclass
class Problem:
    n: int
    kind: str
    edges: list[tuple[int, int]] = field(default_factory=list)
    clauses: list[SatClause] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in ("maxcut", "max2sat"):
            raise ProblemError(f"unknown problem type {self.kind!r}")
        if any(c.k > self.n for c in self.clauses):
            raise ProblemError(f"clause index out of range for n={self.n}")
        self.graph  # validates edges

    @property
    def graph(self) -> Graph:
        if self.kind == "maxcut":
            return Graph(self.n, frozenset(map(tuple, self.edges)))
        return Graph(self.n, frozenset((c.j, c.k) for c in self.clauses))

    def hamiltonian(self) -> IsingHamiltonian:
        if self.kind == "maxcut":
            return maxcut_hamiltonian(self.graph)
        return max2sat_hamiltonian(self.n, self.clauses)

    def to_dict(self) -> dict:
        d = {"n": self.n, "type": self.kind}
        if self.kind == "maxcut":
            d["edges"] = [list(e) for e in sorted(self.graph.edges)]
        else:
            d["clauses"] = [[c.j, c.k, c.a0, c.a1] for c in self.clauses]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Problem":
        try:
            n, kind = int(d["n"]), d["type"]
            if kind == "maxcut":
                return cls(n, kind, edges=[(int(j), int(k)) for j, k in d.get("edges", [])])
            if kind == "max2sat":
                return cls(n, kind, clauses=[SatClause(*map(int, c)) for c in d.get("clauses", [])])
        except (KeyError, TypeError, ValueError) as exc:
            raise ProblemError(f"malformed problem: {exc}") from exc
        raise ProblemError(f"unknown problem type {kind!r}")

    @classmethod
    def maxcut(cls, graph: Graph) -> "Problem":
        return cls(graph.n, "maxcut", edges=graph.sorted_edges())


def load_problem(path) -> Problem:
    with open(path) as fh:
        return Problem.from_dict(json.load(fh))


def save_problem(problem: Problem, path) -> None:
    with open(path, "w") as fh:
        json.dump(problem.to_dict(), fh, indent=2)
