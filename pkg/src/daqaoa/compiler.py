"""Compile diagonal ZZ evolutions into digital-analog schedules over a fixed resource.

A steered block on pair ``(l, m)`` runs the resource for time ``d`` between X gates
on ``l`` and ``m``; it contributes ``d * M[kappa, mu] * r_mu`` to the effective
coupling of pair ``mu``.  An idle block contributes ``d * r_mu`` to every pair.

Negative raw times are repaired with exact periodicities of the target only:
``exp(i*pi*Z_j Z_k) = -I`` for every pair, and for a homogeneous resource every
block (idle or steered) is 2*pi-periodic.  All repairs therefore reproduce the
target unitary up to a global phase.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .problems import IsingHamiltonian
from .resources import ResourceCoupling

TWO_PI = 2 * np.pi
PRUNE_TOL = 1e-12
MAX_TIME = 1e9  # beyond this, double precision cannot hold phases to the reconstruction tolerance
RESIDUAL_TOL = 1e-10
METHODS = ("auto", "wrap", "shift", "level")


class CompileError(ValueError):
    pass


class UnsupportedSizeError(CompileError):
    pass


class UnsupportedCombinationError(CompileError):
    pass


# -- pair indexing ---------------------------------------------------------------


def pair_index(l: int, m: int, n: int) -> int:
    if not 1 <= l < m <= n:
        raise CompileError(f"invalid pair {(l, m)} for n={n}")
    return n * (l - 1) - l * (l + 1) // 2 + m


def pair_from_index(kappa: int, n: int) -> tuple[int, int]:
    npairs = n * (n - 1) // 2
    if not 1 <= kappa <= npairs:
        raise CompileError(f"pair index {kappa} out of range for n={n}")
    return pair_list(n)[kappa - 1]


@lru_cache(maxsize=None)
def pair_list(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(combinations(range(1, n + 1), 2))


# -- sign matrix -----------------------------------------------------------------


@lru_cache(maxsize=None)
def _sign_matrix(n: int) -> np.ndarray:
    pairs = np.array(pair_list(n))
    l, m = pairs[:, 0][:, None], pairs[:, 1][:, None]
    j, k = pairs[:, 0][None, :], pairs[:, 1][None, :]
    exponent = (l == j).astype(int) + (l == k) + (m == j) + (m == k)
    M = np.where(exponent % 2 == 0, 1, -1).astype(float)
    M.setflags(write=False)
    return M


def build_sign_matrix(n: int) -> np.ndarray:
    """``M[kappa, mu] = (-1)**(d_lj + d_lk + d_mj + d_mk)`` over lexicographic pairs."""
    if n < 2:
        raise CompileError(f"sign matrix needs n >= 2, got {n}")
    return _sign_matrix(n).copy()


def lambda_eigenvalue(n: int) -> int:
    """Eigenvalue of the sign matrix on the all-ones vector (its row sum)."""
    if n < 2:
        raise CompileError(f"need n >= 2, got {n}")
    return n * (n - 1) // 2 - 4 * (n - 2)


@lru_cache(maxsize=None)
def _lu(n: int):
    if n == 4:
        raise UnsupportedSizeError("n = 4 is unsupported: the sign matrix is singular")
    return lu_factor(_sign_matrix(n))


def _solve(n: int, rhs: np.ndarray) -> np.ndarray:
    return lu_solve(_lu(n), rhs)


def solve_times(g_over_r, n: int) -> np.ndarray:
    """Raw time vector ``t`` with ``M t = g/r``; entries may be negative."""
    v = np.asarray(g_over_r, dtype=float)
    if v.shape != (n * (n - 1) // 2,):
        raise CompileError(f"expected {n * (n - 1) // 2} pair values, got shape {v.shape}")
    t = _solve(n, v)
    resid = np.linalg.norm(_sign_matrix(n) @ t - v)
    if resid > RESIDUAL_TOL * max(1.0, np.linalg.norm(v)):
        raise CompileError(f"linear solve residual {resid:.3e} too large")
    return t


def coupling_quantum(g, max_denominator: int = 64) -> Fraction | None:
    """Largest q = 1/2**j dividing every coupling, or None if the couplings are not dyadic."""
    g = np.asarray(g, dtype=float)
    nz = g[np.abs(g) > 1e-12]
    if nz.size == 0:
        return None
    q = Fraction(1, 2)
    while q.denominator <= max_denominator:
        ratios = nz / float(q)
        if np.allclose(ratios, np.round(ratios), atol=1e-9):
            return q
        q /= 2
    return None


# -- schedules -------------------------------------------------------------------


@dataclass(frozen=True)
class Block:
    kind: str  # "idle" | "steered"
    pair: tuple[int, int] | None
    duration: float


@dataclass
class DASchedule:
    n: int
    gamma: float
    blocks: list[Block]
    resource: ResourceCoupling
    sign_flip: bool = False
    method: str = ""
    z_angles: np.ndarray = None
    reserved_idle: float = 0.0

    def __post_init__(self):
        if self.z_angles is None:
            self.z_angles = np.zeros(self.n)

    @property
    def idle_time(self) -> float:
        return sum(b.duration for b in self.blocks if b.kind == "idle")

    @property
    def steered(self) -> list[Block]:
        return [b for b in self.blocks if b.kind == "steered"]

    @property
    def total_time(self) -> float:
        return float(sum(b.duration for b in self.blocks))

    def to_dict(self) -> dict:
        layers = x_gate_layers(self)
        return {
            "n": self.n,
            "gamma": self.gamma,
            "sign_flip": bool(self.sign_flip),
            "method": self.method,
            "reserved_idle": self.reserved_idle,
            "blocks": [
                {"kind": b.kind, "pair": list(b.pair) if b.pair else None, "duration": b.duration}
                for b in self.blocks
            ],
            "x_layers": [sorted(layer) for layer in layers.layers],
            "z_angles": [float(z) for z in self.z_angles],
            "resource": self.resource.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DASchedule":
        res = ResourceCoupling(np.asarray(d["resource"]["r"], dtype=float))
        blocks = [
            Block(b["kind"], tuple(b["pair"]) if b.get("pair") else None, float(b["duration"])) for b in d["blocks"]
        ]
        return cls(
            int(d["n"]), float(d["gamma"]), blocks, res, bool(d.get("sign_flip", False)), d.get("method", ""),
            np.asarray(d.get("z_angles", np.zeros(int(d["n"]))), dtype=float), float(d.get("reserved_idle", 0.0)),
        )


@dataclass
class _Candidate:
    durations: np.ndarray
    idle: float
    total: float
    method: str
    sign_flip: bool = False


def _finalize(D: np.ndarray, lam: int, min_block: float, homogeneous: bool):
    """Best idle shift for each column of raw times ``D`` (N, B).

    Shifting every block by ``-c`` is compensated by an idle block of ``lam * c``.
    Returns per-column (total, shift c, idle) with ``inf`` total where infeasible.
    """
    B = D.shape[1]
    best = np.full(B, np.inf)
    best_c = np.zeros(B)
    best_idle = np.zeros(B)
    dmin = D.min(axis=0)
    sane = np.abs(D).max(axis=0) <= MAX_TIME
    for c in (np.zeros(B), dmin - min_block):
        d = D - c
        d = np.where(np.abs(d) <= PRUNE_TOL, 0.0, d)
        ok = np.all((d == 0) | (d >= min_block - PRUNE_TOL), axis=0) & np.all(d >= 0, axis=0)
        idle = lam * c
        if homogeneous:
            idle = np.where(idle < -PRUNE_TOL, np.mod(idle, TWO_PI), idle)
            idle = np.where(np.abs(TWO_PI - idle) <= PRUNE_TOL, 0.0, idle)
        ok &= (idle >= -PRUNE_TOL) & sane
        idle = np.where(np.abs(idle) <= PRUNE_TOL, 0.0, idle)
        total = d.sum(axis=0) + idle
        better = ok & (total < best - 1e-12)
        best = np.where(better, total, best)
        best_c = np.where(better, c, best_c)
        best_idle = np.where(better, idle, best_idle)
    return best, best_c, best_idle


def _pick(D, lam, min_block, homogeneous, method, flips=None):
    total, c, idle = _finalize(D, lam, min_block, homogeneous)
    if not np.isfinite(total).any():
        return None
    i = int(np.argmin(total))
    d = D[:, i] - c[i]
    d = np.where(np.abs(d) <= PRUNE_TOL, 0.0, d)
    return _Candidate(d, float(idle[i]), float(total[i]), method, bool(flips[i]) if flips is not None else False)


def _shift_candidate(n, phases, r, lam, min_block, homogeneous, flip_shift=None):
    """Idle-shift repair, optionally using uniform pi offsets on every pair and the sign flip."""
    base = phases / r
    t = _solve(n, base)
    u = _solve(n, np.pi / r)
    if homogeneous:
        # uniform offsets move the idle block by K*pi; the 2*pi wrap covers the rest
        ks = np.arange(0, 2)
    elif lam > 0:
        lo, hi = -np.inf, np.inf
        for tm, um in zip(t, u):
            if um > 1e-14:
                lo = max(lo, (min_block - tm) / (np.pi * um))
            elif um < -1e-14:
                hi = min(hi, (min_block - tm) / (np.pi * um))
            elif tm < min_block - PRUNE_TOL:
                lo, hi = np.inf, -np.inf
        if not lo <= hi:
            ks = np.arange(0)
        else:
            klo = int(np.ceil(lo - 1e-9))
            khi = int(np.floor(hi + 1e-9)) if np.isfinite(hi) else klo + 200
            ks = np.arange(klo, min(khi, klo + 200) + 1)
    else:
        ks = np.arange(-200, 201)
    columns, flips = [], []
    for flip in ((False, True) if flip_shift is not None else (False,)):
        t0 = t if not flip else _solve(n, (phases + np.pi * flip_shift) / r)
        for K in ks:
            columns.append(t0 + K * u)
            flips.append(flip)
    if not columns:
        return None
    return _pick(np.stack(columns, axis=1), lam, min_block, homogeneous, "shift", flips)


def _level_candidate(n, phases, r, lam, min_block, homogeneous):
    """Per-pair pi offsets that bring every ``phase/r`` close to a common level, scanned over levels."""

    def evaluate(levels):
        k = np.rint((levels[None, :] * r[:, None] - phases[:, None]) / np.pi)
        return _solve(n, (phases[:, None] + np.pi * k) / r[:, None])

    coarse = np.geomspace(1e-3, MAX_TIME, 300)
    levels = np.concatenate([-coarse[::-1], [0.0], coarse])
    D = evaluate(levels)
    total, _, _ = _finalize(D, lam, min_block, homogeneous)
    if not np.isfinite(total).any():
        return None
    L0 = levels[int(np.argmin(total))]
    width = 0.1 * abs(L0) + np.pi / r.max()
    fine = np.linspace(L0 - width, L0 + width, 401)
    return _pick(np.hstack([D, evaluate(fine)]), lam, min_block, homogeneous, "level")


def repair_negative_times(
    t,
    resource: ResourceCoupling,
    phases,
    gamma: float = 1.0,
    *,
    couplings=None,
    method: str = "auto",
    min_block: float = 0.0,
) -> DASchedule:
    """Turn raw times ``t`` (solving ``M t = phases/r``) into a non-negative schedule.

    ``phases`` are the per-pair target phases, ``couplings`` the problem couplings
    whose dyadic structure enables the sign flip ``gamma -> gamma - pi/q``.
    ``min_block`` forces every emitted steered block to be either pruned or at least
    that long.
    """
    if method not in METHODS:
        raise CompileError(f"unknown repair method {method!r}")
    n = resource.n
    t = np.asarray(t, dtype=float)
    phases = np.asarray(phases, dtype=float)
    r = resource.pair_vector()
    lam = lambda_eigenvalue(n)
    hom = resource.homogeneous

    flip_shift = None
    if couplings is not None:
        q = coupling_quantum(couplings)
        if q is not None:
            flip_shift = -np.rint(np.asarray(couplings) / float(q)).astype(int)

    cands = []
    if method in ("wrap", "auto") and hom:
        d = np.mod(t, TWO_PI)
        d = np.where((d <= PRUNE_TOL) | (TWO_PI - d <= PRUNE_TOL), 0.0, d)
        d = np.where((d > 0) & (d < min_block), d + TWO_PI, d)
        cands.append(_Candidate(d, 0.0, float(d.sum()), "wrap"))
    elif method == "wrap":
        raise UnsupportedCombinationError("per-block 2*pi wrapping needs a homogeneous resource")
    if method in ("shift", "auto"):
        c = _shift_candidate(n, phases, r, lam, min_block, hom, flip_shift)
        if c is not None:
            cands.append(c)
        elif method == "shift":
            raise UnsupportedCombinationError(
                "unsupported target/resource combination: idle-shift repair cannot make every duration non-negative"
            )
    if method == "level" or (method == "auto" and not cands):
        c = _level_candidate(n, phases, r, lam, min_block, hom)
        if c is not None:
            cands.append(c)
    if not cands:
        raise UnsupportedCombinationError("unsupported target/resource combination: no non-negative schedule found")
    best = min(cands, key=lambda c: c.total)
    return _assemble(n, gamma, resource, best)


def _assemble(n, gamma, resource, cand: _Candidate) -> DASchedule:
    blocks = []
    if cand.idle > PRUNE_TOL:
        blocks.append(Block("idle", None, float(cand.idle)))
    for pair, d in zip(pair_list(n), cand.durations):
        if d > PRUNE_TOL:
            blocks.append(Block("steered", pair, float(d)))
    return DASchedule(n, gamma, blocks, resource, cand.sign_flip, cand.method)


def compile_schedule(
    H: IsingHamiltonian,
    gamma: float,
    resource: ResourceCoupling,
    *,
    method: str = "auto",
    min_block: float = 0.0,
    reserved_idle: float = 0.0,
) -> DASchedule:
    """Schedule realising ``exp(i*gamma*sum g_jk Z_j Z_k)`` up to a global phase.

    ``reserved_idle`` is plain resource time the caller runs outside the schedule;
    the schedule realises the remainder of the target.  Single-qubit fields become
    ``z_angles`` (``gamma * h_j``) and are not part of the block list.
    """
    n = H.n
    if resource.n != n:
        raise CompileError(f"resource has n={resource.n}, problem has n={n}")
    if n < 2:
        raise CompileError("need n >= 2")
    if n == 4:
        raise UnsupportedSizeError("n = 4 is unsupported: the sign matrix is singular")
    g = H.pair_couplings()
    r = resource.pair_vector()
    phases = gamma * g - reserved_idle * r
    if np.all(np.abs(phases) <= PRUNE_TOL):
        sched = DASchedule(n, gamma, [], resource, method="empty")
    else:
        t = solve_times(phases / r, n)
        sched = repair_negative_times(t, resource, phases, gamma, couplings=g, method=method, min_block=min_block)
    sched.z_angles = gamma * H.fields
    sched.reserved_idle = float(reserved_idle)
    return sched


# alias matching the operation name; ``compile`` shadows a builtin so keep both
compile = compile_schedule


# -- X gate layers ---------------------------------------------------------------


@dataclass
class GateLayers:
    layers: list[frozenset[int]]
    positions: list[int]  # layer i acts just before block positions[i] (len(blocks) = after the last)

    @property
    def x_count(self) -> int:
        return sum(len(layer) for layer in self.layers)


def x_gate_layers(schedule: DASchedule) -> GateLayers:
    frames = [frozenset()] + [frozenset(b.pair) if b.kind == "steered" else frozenset() for b in schedule.blocks]
    frames.append(frozenset())
    layers, positions = [], []
    for i in range(len(frames) - 1):
        layer = frames[i] ^ frames[i + 1]
        if layer:
            layers.append(layer)
            positions.append(i)
    return GateLayers(layers, positions)


# -- reconstruction oracle ------------------------------------------------------


def _flip_mask(qubits, n: int) -> int:
    return sum(1 << (n - q) for q in qubits)


def resource_diagonal(resource: ResourceCoupling) -> np.ndarray:
    return IsingHamiltonian(resource.n, resource.r).diagonal()


def schedule_phases(schedule: DASchedule) -> np.ndarray:
    """Diagonal phases of the schedule, built from X-flipped resource energies."""
    n = schedule.n
    diag = resource_diagonal(schedule.resource)
    idx = np.arange(2**n)
    phase = schedule.reserved_idle * diag
    for b in schedule.blocks:
        mask = _flip_mask(b.pair, n) if b.kind == "steered" else 0
        phase = phase + b.duration * diag[idx ^ mask]
    field_h = IsingHamiltonian(n, np.zeros((n, n)), schedule.z_angles)
    return phase + field_h.diagonal()


def unitary_fidelity(phases_a: np.ndarray, phases_b: np.ndarray) -> float:
    """``|tr(U_a^dag U_b)|^2 / d^2`` for diagonal unitaries (global phase insensitive)."""
    return float(np.abs(np.mean(np.exp(1j * (phases_b - phases_a)))) ** 2)


def schedule_fidelity(schedule: DASchedule, H: IsingHamiltonian) -> float:
    target = schedule.gamma * H.diagonal()
    return unitary_fidelity(target, schedule_phases(schedule))
