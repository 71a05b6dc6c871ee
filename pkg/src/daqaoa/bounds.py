"""Fidelity lower bounds for banged execution and the dense oracles that check them.

Each window where X drives run with the resource on is compared with its
midpoint split ``exp(itH_R/2) exp(it alpha X_S) exp(itH_R/2)``.  The split error
is bounded by ``t**3 (alpha**2 |[[H_R, X], X]| / 12 + alpha |[[H_R, X], H_R]| / 24)``,
which gives ``delta_mu`` once the homogeneous closed forms are substituted.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .compiler import DASchedule, resource_diagonal, x_gate_layers
from .dynamics import BDATimeline, build_timeline, run_timeline, sequential_reference, state_fidelity, steering_window
from .problems import IsingHamiltonian
from .resources import ResourceCoupling

DENSE_CAP = 8


class BoundError(ValueError):
    pass


def closed_form_first_norm(n: int, s: int) -> float:
    return 4.0 * s * np.sqrt((s - 1) ** 2 + (n - 1) ** 2)


def closed_form_second_norm(n: int, s: int) -> float:
    """Upper estimate from counting ``s(n-1)**2`` Pauli strings of norm 4."""
    return 4.0 * s * (n - 1) ** 2


def delta_mu(n: int, s: int, t: float, alpha: float) -> float:
    """``(alpha s t^3 / 3) ((n-1)^2/2 + alpha sqrt((s-1)^2 + (n-1)^2))``."""
    if s < 0 or t < 0:
        raise BoundError(f"need s >= 0 and t >= 0, got s={s}, t={t}")
    if s == 0 or t == 0:
        return 0.0
    return alpha * s * t**3 / 3.0 * ((n - 1) ** 2 / 2.0 + alpha * np.sqrt((s - 1) ** 2 + (n - 1) ** 2))


def delta_from_norms(t: float, alpha: float, first: float, second: float) -> float:
    return t**3 * (alpha**2 * first / 12.0 + alpha * second / 24.0)


def _x_sum_dense(n: int, S) -> np.ndarray:
    idx = np.arange(2**n)
    X = np.zeros((2**n, 2**n))
    for q in S:
        X[idx, idx ^ (1 << (n - q))] += 1.0
    return X


def _spectral_norm_hermitian(A: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvalsh(A)).max())


def commutator_norms(n: int, S, resource: ResourceCoupling | None = None) -> tuple[float, float]:
    """Exact ``(|[[H_R, X_S], X_S]|, |[[H_R, X_S], H_R]|)`` by dense diagonalisation."""
    if n > DENSE_CAP:
        raise BoundError(f"dense commutator norms capped at n <= {DENSE_CAP}")
    S = sorted(set(S))
    if not S:
        return 0.0, 0.0
    if resource is None:
        resource = ResourceCoupling(np.ones((n, n)) - np.eye(n))
    return _norms(resource.r.tobytes(), n, tuple(S))


@lru_cache(maxsize=512)
def _norms(rbytes: bytes, n: int, S: tuple[int, ...]) -> tuple[float, float]:
    r = np.frombuffer(rbytes).reshape(n, n)
    a = resource_diagonal(ResourceCoupling(r.copy()))
    X = _x_sum_dense(n, S)
    C = (a[:, None] - a[None, :]) * X  # [A, X] for diagonal A
    first = C @ X - X @ C
    second = (a[None, :] - a[:, None]) * C  # [C, A]
    # both double commutators are anti-Hermitian times i, i.e. Hermitian up to sign
    return _spectral_norm_hermitian(first), _spectral_norm_hermitian(second)


@dataclass(frozen=True)
class BlockCensusEntry:
    s: int
    t: float
    kind: str  # steering | driver | idle
    qubits: tuple[int, ...] = ()


@dataclass
class FidelityBoundReport:
    entries: list[BlockCensusEntry]
    deltas: list[float]
    homogeneous: bool = True
    measured_infidelity: float | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def sum_sq(self) -> float:
        return float(sum(d * d for d in self.deltas))

    @property
    def bound(self) -> float:
        return 1.0 - self.sum_sq

    @property
    def valid(self) -> bool:
        return all(d < 1 for d in self.deltas) and self.sum_sq < 1

    def holds(self) -> bool | None:
        if self.measured_infidelity is None:
            return None
        return self.measured_infidelity <= self.sum_sq

    def to_dict(self) -> dict:
        d = {
            "blocks": [{"s": e.s, "t": e.t, "kind": e.kind, "delta": dl} for e, dl in zip(self.entries, self.deltas)],
            "bound": self.bound,
            "sum_delta_sq": self.sum_sq,
            "valid": self.valid,
            "homogeneous": self.homogeneous,
        }
        if self.measured_infidelity is not None:
            d["measured_infidelity"] = self.measured_infidelity
        if self.notes:
            d["notes"] = list(self.notes)
        return d


def census_from_schedule(schedule: DASchedule, alpha: float, beta: float, *, window: float | None = None):
    """One steering entry per X layer, one idle entry per analog block, one driver entry."""
    tau = steering_window(alpha) if window is None else window
    out = [BlockCensusEntry(0, b.duration, "idle") for b in schedule.blocks]
    out += [BlockCensusEntry(len(layer), tau, "steering", tuple(sorted(layer))) for layer in x_gate_layers(schedule).layers]
    out.append(BlockCensusEntry(schedule.n, beta / alpha, "driver", tuple(range(1, schedule.n + 1))))
    return out


def census_from_timeline(tl: BDATimeline) -> list[BlockCensusEntry]:
    out = []
    for seg in tl.segments:
        if seg.active_x:
            kind = "driver" if seg.kind == "driver" else "steering"
            out.append(BlockCensusEntry(len(seg.active_x), seg.duration, kind, tuple(sorted(seg.active_x))))
        else:
            out.append(BlockCensusEntry(0, seg.duration, "idle"))
    return out


def closed_form_census(n: int, alpha: float, beta: float) -> list[BlockCensusEntry]:
    """Textbook census: n-3 four-qubit layers, n(n-1)/2-(n-2) two-qubit layers, one driver."""
    tau = steering_window(alpha)
    out = [BlockCensusEntry(4, tau, "steering")] * (n - 3)
    out += [BlockCensusEntry(2, tau, "steering")] * (n * (n - 1) // 2 - (n - 2))
    out.append(BlockCensusEntry(n, beta / alpha, "driver"))
    return out


def fidelity_lower_bound(
    census: list[BlockCensusEntry],
    n: int,
    alpha: float,
    resource: ResourceCoupling | None = None,
    *,
    numeric: bool = False,
) -> FidelityBoundReport:
    """``1 - sum delta_mu**2`` over the census.

    Homogeneous resources use the closed form unless ``numeric``; inhomogeneous
    ones need exact commutator norms and are limited to the dense cap.
    """
    homogeneous = resource is None or resource.homogeneous
    use_numeric = numeric or not homogeneous
    if use_numeric and n > DENSE_CAP:
        raise BoundError(f"numeric commutator norms need n <= {DENSE_CAP}")
    deltas = []
    for e in census:
        if e.s == 0 or e.t == 0:
            deltas.append(0.0)
        elif use_numeric:
            qubits = e.qubits or tuple(range(1, e.s + 1))
            deltas.append(delta_from_norms(e.t, alpha, *commutator_norms(n, qubits, resource)))
        else:
            deltas.append(delta_mu(n, e.s, e.t, alpha))
    notes = [] if homogeneous else ["inhomogeneous resource: deltas from exact commutator norms"]
    return FidelityBoundReport(list(census), deltas, homogeneous, notes=notes)


def bound_report(
    H: IsingHamiltonian,
    resource: ResourceCoupling,
    alpha: float,
    gammas,
    betas,
    *,
    numeric: bool = False,
    measure: bool = True,
) -> FidelityBoundReport:
    """Bound over the compiled timeline, plus the measured banged-vs-split infidelity."""
    tl = build_timeline(H, resource, alpha, gammas, betas)
    report = fidelity_lower_bound(census_from_timeline(tl), H.n, alpha, resource, numeric=numeric)
    if measure:
        report.measured_infidelity = 1.0 - state_fidelity(run_timeline(tl), sequential_reference(tl))
    return report
