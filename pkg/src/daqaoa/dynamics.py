"""Statevector evolution for ideal, stepwise (sDA) and banged (bDA) QAOA.

Sign convention is ``exp(+i H t)`` everywhere.  States are plain complex numpy
arrays of length ``2**n`` in the basis order of :mod:`daqaoa.problems`.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .compiler import DASchedule, compile_schedule, x_gate_layers, resource_diagonal
from .problems import IsingHamiltonian
from .resources import ResourceCoupling

log = logging.getLogger(__name__)

MAX_QUBITS = 14
NORM_TOL = 1e-12
DENSE_BLOCK = 256  # windows with 2**s up to this size use a cached eigendecomposition


class SimulationError(RuntimeError):
    pass


# -- elementary operations -------------------------------------------------------


def plus_state(n: int) -> np.ndarray:
    if not 1 <= n <= MAX_QUBITS:
        raise SimulationError(f"statevector size cap is n <= {MAX_QUBITS}, got {n}")
    return np.full(2**n, 2 ** (-n / 2), dtype=complex)


def _n_of(state: np.ndarray) -> int:
    n = int(state.size).bit_length() - 1
    if 2**n != state.size:
        raise SimulationError(f"state length {state.size} is not a power of two")
    return n


def apply_diagonal(state: np.ndarray, H, t: float) -> np.ndarray:
    """Multiply amplitude ``z`` by ``exp(i t H(z))``; ``H`` is a Hamiltonian or its diagonal."""
    diag = H.diagonal() if isinstance(H, IsingHamiltonian) else np.asarray(H)
    return state * np.exp(1j * t * diag)


def apply_x_product(state: np.ndarray, qubits, theta: float) -> np.ndarray:
    """Apply ``exp(i theta X_q)`` on every listed qubit."""
    n = _n_of(state)
    c, s = np.cos(theta), 1j * np.sin(theta)
    psi = state.reshape((2,) * n)
    for q in sorted(set(qubits)):
        ax = q - 1
        psi = c * psi + s * np.flip(psi, axis=ax)
    return psi.reshape(-1)


def expectation(state: np.ndarray, H) -> float:
    diag = H.diagonal() if isinstance(H, IsingHamiltonian) else np.asarray(H)
    return float(np.real(np.vdot(state, diag * state)))


def state_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(min(1.0, abs(np.vdot(a, b)) ** 2))


def _check_norm(state: np.ndarray, where: str) -> np.ndarray:
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > NORM_TOL:
        log.warning("norm drift %.3e after %s; renormalising", norm - 1.0, where)
        state = state / norm
    return state


# -- device evolution ------------------------------------------------------------


def _split_axes(n: int, active: tuple[int, ...]) -> list[int]:
    rest = [q - 1 for q in range(1, n + 1) if q not in active]
    return rest + [q - 1 for q in active]


@lru_cache(maxsize=4096)
def _x_sum(s: int) -> np.ndarray:
    """Dense ``sum_q X_q`` on ``s`` qubits."""
    idx = np.arange(2**s)
    X = np.zeros((2**s, 2**s))
    for q in range(s):
        X[idx, idx ^ (1 << q)] += 1.0
    return X


class _BlockPropagator:
    """``exp(i t H)`` for ``H = diag + alpha * sum_{q in S} X_q`` via batched eigh over invariant blocks."""

    def __init__(self, diag: np.ndarray, active: tuple[int, ...], alpha: float):
        self.n = int(diag.size).bit_length() - 1
        self.active = active
        self.axes = _split_axes(self.n, active)
        s = len(active)
        d = diag.reshape((2,) * self.n).transpose(self.axes).reshape(-1, 2**s)
        blocks = np.zeros((d.shape[0], 2**s, 2**s))
        blocks += alpha * _x_sum(s)
        i = np.arange(2**s)
        blocks[:, i, i] += d
        self.w, self.v = np.linalg.eigh(blocks)

    def apply(self, state: np.ndarray, t: float) -> np.ndarray:
        n, s = self.n, len(self.active)
        psi = state.reshape((2,) * n).transpose(self.axes).reshape(-1, 2**s)
        coef = np.einsum("bji,bj->bi", self.v.conj(), psi)
        coef *= np.exp(1j * t * self.w)
        psi = np.einsum("bij,bj->bi", self.v, coef)
        inv = np.argsort(self.axes)
        return psi.reshape((2,) * n).transpose(inv).reshape(-1)


def _sparse_hamiltonian(diag: np.ndarray, active, alpha: float) -> sp.csr_matrix:
    n = int(diag.size).bit_length() - 1
    idx = np.arange(diag.size)
    H = sp.diags(diag.astype(complex)).tocsr()
    for q in active:
        H = H + alpha * sp.csr_matrix((np.ones(diag.size), (idx, idx ^ (1 << (n - q)))), shape=H.shape)
    return H.tocsr()


_PROPAGATORS: dict = {}


def _propagator(diag: np.ndarray, active: tuple[int, ...], alpha: float):
    key = (diag.tobytes(), active, float(alpha))
    prop = _PROPAGATORS.get(key)
    if prop is None:
        if len(_PROPAGATORS) > 2048:
            _PROPAGATORS.clear()
        if 2 ** len(active) <= DENSE_BLOCK:
            prop = _BlockPropagator(diag, active, alpha)
        else:
            prop = _sparse_hamiltonian(diag, active, alpha)
        _PROPAGATORS[key] = prop
    return prop


def evolve_device(
    state: np.ndarray,
    resource: ResourceCoupling | np.ndarray,
    active_x=(),
    active_z=None,
    alpha: float = 1.0,
    duration: float = 0.0,
) -> np.ndarray:
    """``exp(i duration (H_R + alpha sum_S X + alpha sum_q z_q Z_q)) state``.

    ``resource`` may be a coupling or a precomputed resource diagonal; ``active_z``
    maps qubit to rate ``z_q``.
    """
    if duration < 0:
        raise SimulationError(f"negative duration {duration}")
    n = _n_of(state)
    diag = resource_diagonal(resource) if isinstance(resource, ResourceCoupling) else np.asarray(resource, float)
    if diag.size != state.size:
        raise SimulationError("resource and state sizes differ")
    if active_z:
        zs = np.zeros(n)
        for q, rate in dict(active_z).items():
            zs[q - 1] = rate
        diag = diag + alpha * IsingHamiltonian(n, np.zeros((n, n)), zs).diagonal()
    if duration == 0:
        return state.copy()
    active = tuple(sorted(set(active_x)))
    if not active:
        return state * np.exp(1j * duration * diag)
    prop = _propagator(diag, active, alpha)
    if isinstance(prop, _BlockPropagator):
        out = prop.apply(state, duration)
    else:
        try:
            out = expm_multiply(1j * duration * prop, state)
        except Exception as exc:  # pragma: no cover - scipy internals
            raise SimulationError(f"propagator failed for n={n}, |S|={len(active)}, t={duration}: {exc}") from exc
        if not np.all(np.isfinite(out)):
            raise SimulationError(f"propagator produced non-finite amplitudes (n={n}, t={duration})")
    return _check_norm(out, "evolve_device")


# -- QAOA states ----------------------------------------------------------------


def _check_params(gammas, betas) -> tuple[np.ndarray, np.ndarray]:
    g, b = np.atleast_1d(np.asarray(gammas, float)), np.atleast_1d(np.asarray(betas, float))
    if g.shape != b.shape:
        raise SimulationError(f"gamma and beta lengths differ: {g.size} vs {b.size}")
    return g, b


def qaoa_state(H: IsingHamiltonian, gammas, betas) -> np.ndarray:
    """``prod_p exp(i beta_p H_D) exp(i gamma_p H_P) |+>`` with ``H_D = sum X``."""
    g, b = _check_params(gammas, betas)
    diag = H.diagonal()
    psi = plus_state(H.n)
    allq = range(1, H.n + 1)
    for gamma, beta in zip(g, b):
        psi = apply_x_product(psi * np.exp(1j * gamma * diag), allq, beta)
    return psi


def _apply_schedule(psi: np.ndarray, schedule: DASchedule, rdiag: np.ndarray) -> np.ndarray:
    """Stepwise execution: switched resource blocks between instantaneous X layers."""
    layers = x_gate_layers(schedule)
    pending = dict(zip(layers.positions, layers.layers))
    for j, block in enumerate(schedule.blocks):
        if j in pending:
            psi = apply_x_product(psi, pending[j], np.pi / 2)
        psi = psi * np.exp(1j * block.duration * rdiag)
    if len(schedule.blocks) in pending:
        psi = apply_x_product(psi, pending[len(schedule.blocks)], np.pi / 2)
    if schedule.reserved_idle:
        psi = psi * np.exp(1j * schedule.reserved_idle * rdiag)
    if np.any(schedule.z_angles):
        n = schedule.n
        psi = psi * np.exp(1j * IsingHamiltonian(n, np.zeros((n, n)), schedule.z_angles).diagonal())
    return psi


def sdaqc_qaoa_state(H: IsingHamiltonian, resource: ResourceCoupling, gammas, betas, *, method: str = "auto"):
    g, b = _check_params(gammas, betas)
    rdiag = resource_diagonal(resource)
    psi = plus_state(H.n)
    allq = range(1, H.n + 1)
    for gamma, beta in zip(g, b):
        psi = _apply_schedule(psi, compile_schedule(H, gamma, resource, method=method), rdiag)
        psi = apply_x_product(psi, allq, beta)
    return psi


# -- banged timelines ------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    duration: float
    active_x: frozenset = frozenset()
    z_rates: tuple = ()  # (qubit, rate) pairs
    kind: str = "analog"  # analog | idle | steer | zfield | driver


@dataclass
class BDATimeline:
    n: int
    alpha: float
    resource: ResourceCoupling
    segments: list[Segment] = field(default_factory=list)
    layer_starts: list[int] = field(default_factory=list)
    schedules: list[DASchedule] = field(default_factory=list)
    tail_time: float = 0.0  # uncompensated resource time after the last driver midpoint

    @property
    def total_time(self) -> float:
        return float(sum(s.duration for s in self.segments))


def steering_window(alpha: float) -> float:
    """Duration of a full X gate at drive strength alpha: exp(i*pi/2*X) = iX."""
    return np.pi / (2 * alpha)


def _wrap_z(angle: float) -> float:
    # exp(i*pi*Z) = -I, so Z angles only matter modulo pi
    return float(angle - np.pi * np.round(angle / np.pi))


def build_timeline(
    H: IsingHamiltonian,
    resource: ResourceCoupling,
    alpha: float,
    gammas,
    betas,
    *,
    compensate: bool = False,
    method: str = "auto",
) -> BDATimeline:
    """Always-on timeline per layer: idle, steered segments separated by X windows, Z window, driver.

    With ``compensate`` the resource time that windows add to each frame is taken
    out of the analog segments, so the midpoint-split reference of the timeline
    equals ideal QAOA apart from ``tail_time`` of trailing resource evolution.
    """
    if alpha < 1:
        raise SimulationError(f"alpha must be >= 1, got {alpha}")
    g, b = _check_params(gammas, betas)
    n = H.n
    tau_s = steering_window(alpha)
    tl = BDATimeline(n, float(alpha), resource)
    prev_driver = 0.0
    allq = frozenset(range(1, n + 1))
    for gamma, beta in zip(g, b):
        z = np.array([_wrap_z(a) for a in gamma * H.fields])
        tau_z = float(np.abs(z).max()) / alpha if np.any(z) else 0.0
        tau_d = beta / alpha
        sched = None
        if compensate:
            base = prev_driver / 2 + tau_z + tau_d / 2
            for extra in (tau_s, 0.0):
                sched = compile_schedule(H, gamma, resource, method=method, min_block=tau_s, reserved_idle=base + extra)
                if bool(sched.steered) == (extra > 0):
                    break
            else:
                raise SimulationError("could not make window compensation consistent")
        else:
            sched = compile_schedule(H, gamma, resource, method=method)
        tl.schedules.append(sched)
        tl.layer_starts.append(len(tl.segments))
        layers = x_gate_layers(sched)
        pending = dict(zip(layers.positions, layers.layers))
        for j, block in enumerate(sched.blocks):
            if j in pending:
                tl.segments.append(Segment(tau_s, frozenset(pending[j]), kind="steer"))
            d = block.duration
            if compensate and block.kind == "steered":
                d -= tau_s
            if d > 0:
                tl.segments.append(Segment(d, kind=block.kind if block.kind == "idle" else "analog"))
        if len(sched.blocks) in pending:
            tl.segments.append(Segment(tau_s, frozenset(pending[len(sched.blocks)]), kind="steer"))
        if tau_z > 0:
            rates = tuple((q, float(z[q - 1] / (alpha * tau_z))) for q in range(1, n + 1) if z[q - 1])
            tl.segments.append(Segment(tau_z, z_rates=rates, kind="zfield"))
        if tau_d > 0:
            tl.segments.append(Segment(tau_d, allq, kind="driver"))
        prev_driver = tau_d
    tl.tail_time = prev_driver / 2 if compensate else 0.0
    return tl


def run_timeline(tl: BDATimeline, state: np.ndarray | None = None) -> np.ndarray:
    """Integrate the timeline with the resource always on."""
    rdiag = resource_diagonal(tl.resource)
    psi = plus_state(tl.n) if state is None else state
    for seg in tl.segments:
        psi = evolve_device(psi, rdiag, seg.active_x, dict(seg.z_rates), tl.alpha, seg.duration)
    return psi


def sequential_reference(tl: BDATimeline, state: np.ndarray | None = None) -> np.ndarray:
    """Midpoint-split reference: half the resource, the bare drive, the other half, per window."""
    rdiag = resource_diagonal(tl.resource)
    psi = plus_state(tl.n) if state is None else state
    for seg in tl.segments:
        if not seg.active_x:
            psi = evolve_device(psi, rdiag, (), dict(seg.z_rates), tl.alpha, seg.duration)
            continue
        half = np.exp(0.5j * seg.duration * rdiag)
        psi = apply_x_product(psi * half, seg.active_x, tl.alpha * seg.duration) * half
    return psi


def bdaqc_qaoa_state(
    H: IsingHamiltonian, resource: ResourceCoupling, alpha: float, gammas, betas, *, compensate: bool = False,
    method: str = "auto",
) -> np.ndarray:
    return run_timeline(build_timeline(H, resource, alpha, gammas, betas, compensate=compensate, method=method))
