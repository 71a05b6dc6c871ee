"""Variational loop, approximation ratios and the banged-recovery sweep."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .dynamics import bdaqc_qaoa_state, expectation, qaoa_state
from .problems import IsingHamiltonian, Problem, max_value, random_erdos_renyi
from .resources import build_resource, model_from_dict

log = logging.getLogger(__name__)

GAMMA_MAX = 2 * np.pi
BETA_MAX = np.pi
DEFAULT_BUDGET = 2000


class OptimizationError(ValueError):
    pass


@dataclass
class QAOAParams:
    gammas: np.ndarray
    betas: np.ndarray

    def __post_init__(self):
        self.gammas = np.atleast_1d(np.asarray(self.gammas, float))
        self.betas = np.atleast_1d(np.asarray(self.betas, float))
        if self.gammas.shape != self.betas.shape:
            raise OptimizationError("gamma and beta vectors must have equal length")

    @property
    def p(self) -> int:
        return self.gammas.size

    def in_box(self) -> bool:
        g, b = self.gammas, self.betas
        return bool(np.all((g >= 0) & (g < GAMMA_MAX)) and np.all((b >= 0) & (b <= BETA_MAX)))

    def vector(self) -> np.ndarray:
        return np.concatenate([self.gammas, self.betas])

    @classmethod
    def from_vector(cls, x) -> "QAOAParams":
        x = np.asarray(x, float)
        p = x.size // 2
        return cls(np.mod(x[:p], GAMMA_MAX), np.clip(x[p:], 0.0, BETA_MAX))


@dataclass
class OptimizationResult:
    params: QAOAParams
    value: float
    trace: list[tuple[tuple[float, ...], float]]
    seed: int | None
    budget_exceeded: bool = False

    @property
    def evaluations(self) -> int:
        return len(self.trace)


def approximation_ratio(value: float, H: IsingHamiltonian) -> float:
    top = max_value(H)
    if top <= 0:
        raise OptimizationError("approximation ratio undefined: maximum objective is zero")
    return value / top


class _Budget(Exception):
    pass


class _Tracker:
    def __init__(self, evaluator, budget):
        self.evaluator, self.budget = evaluator, budget
        self.trace: list[tuple[tuple[float, ...], float]] = []
        self.best_x, self.best = None, -np.inf

    def __call__(self, x) -> float:
        if len(self.trace) >= self.budget:
            raise _Budget
        params = QAOAParams.from_vector(x)
        val = float(self.evaluator(params))
        key = tuple(float(v) for v in params.vector())
        self.trace.append((key, val))
        if val > self.best:
            self.best, self.best_x = val, params
        return val


def _grid(p: int) -> list[np.ndarray]:
    if p != 1:
        return [np.zeros(2 * p)]
    gs = np.linspace(0, GAMMA_MAX, 32, endpoint=False)
    bs = np.linspace(0, BETA_MAX, 16)
    return [np.array([g, b]) for g in gs for b in bs]


def optimize(
    evaluator: Callable[[QAOAParams], float],
    p: int = 1,
    *,
    seed: int | None = 0,
    initial: QAOAParams | None = None,
    budget: int = DEFAULT_BUDGET,
    starts: int = 8,
    use_grid: bool = True,
) -> OptimizationResult:
    """Maximise ``evaluator`` over the parameter box.

    p = 1 scans a 32 x 16 grid and refines the best grid point with Nelder-Mead;
    deeper circuits use ``starts`` random starts.  The initial point, if given,
    is evaluated first and also refined, so the result is never worse than it.
    """
    if p < 1:
        raise OptimizationError("p must be >= 1")
    tr = _Tracker(evaluator, budget)
    rng = np.random.default_rng(seed)
    seeds: list[np.ndarray] = []
    lo = np.zeros(2 * p)
    hi = np.concatenate([np.full(p, GAMMA_MAX), np.full(p, BETA_MAX)])
    exceeded = False
    try:
        if initial is not None:
            if initial.p != p:
                raise OptimizationError("initial point has the wrong depth")
            tr(initial.vector())
            seeds.append(initial.vector())
        if use_grid or initial is None:
            vals = [(tr(x), i, x) for i, x in enumerate(_grid(p))]
            seeds.append(max(vals, key=lambda v: (v[0], -v[1]))[2])
        if p > 1:
            seeds += [lo + rng.random(2 * p) * (hi - lo) for _ in range(starts)]
        for x0 in seeds:
            remaining = budget - len(tr.trace)
            if remaining <= 0:
                raise _Budget
            minimize(
                lambda x: -tr(x), x0, method="Nelder-Mead", bounds=list(zip(lo, hi)),
                options={"maxfev": remaining, "xatol": 1e-7, "fatol": 1e-10},
            )
    except _Budget:
        exceeded = True
        log.info("evaluation budget %d exhausted", budget)
    return OptimizationResult(tr.best_x, tr.best, tr.trace, seed, exceeded)


def gradient_probe(evaluator: Callable[[QAOAParams], float], params: QAOAParams, h: float = 1e-4) -> np.ndarray:
    """Central finite-difference gradient in (gammas, betas) order."""
    if h <= 0:
        raise OptimizationError("step h must be positive")
    x = params.vector()
    grad = np.zeros_like(x)
    p = params.p
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        up, dn = x + e, x - e
        grad[i] = (evaluator(QAOAParams(up[:p], up[p:])) - evaluator(QAOAParams(dn[:p], dn[p:]))) / (2 * h)
    return grad


# -- evaluators ------------------------------------------------------------------


def ideal_evaluator(H: IsingHamiltonian):
    diag = H.diagonal()
    return lambda prm: expectation(qaoa_state(H, prm.gammas, prm.betas), diag)


def bda_evaluator(H: IsingHamiltonian, resource, alpha: float, **kw):
    diag = H.diagonal()
    return lambda prm: expectation(bdaqc_qaoa_state(H, resource, alpha, prm.gammas, prm.betas, **kw), diag)


# -- recovery sweep --------------------------------------------------------------


@dataclass
class RecoveryRecord:
    n: int
    alpha: float
    instance_seed: int
    r_ideal: float
    r_fixed: float
    r_reopt: float
    pct_fixed_change: float  # 100 (r_fixed - r_ideal) / r_ideal
    pct_reopt_gain: float  # 100 (r_reopt - r_fixed) / r_ideal
    evals: int
    grad_norm: float = float("nan")
    budget_exceeded: bool = False

    def row(self) -> dict:
        return asdict(self)


@dataclass
class SweepConfig:
    ns: list[int] = field(default_factory=lambda: [6, 8])
    alphas: list[float] = field(default_factory=lambda: [10**1.5, 1e2, 10**2.5, 1e3, 1e4])
    p: int = 1
    instances: int = 15
    p_clause: float = 0.7
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    resource: dict = field(default_factory=lambda: {"model": "homogeneous"})
    compensate: bool = False


def instance_seed(base: int, n: int, k: int) -> int:
    return int(np.random.SeedSequence([base, n, k]).generate_state(1)[0])


def _instance(n: int, seed: int, p_clause: float) -> IsingHamiltonian:
    # resample until there is at least one edge, so the approximation ratio is defined
    s = seed
    while True:
        g = random_erdos_renyi(n, p_clause, s)
        if g.edges:
            return Problem.maxcut(g).hamiltonian()
        s += 1


def _run_instance(args) -> list[RecoveryRecord]:
    n, k, cfg = args
    seed = instance_seed(cfg.seed, n, k)
    H = _instance(n, seed, cfg.p_clause)
    model = model_from_dict(cfg.resource)
    resource = build_resource(model.with_seed(seed) if model.kind == "gaussian" else model, n)
    top = max_value(H)
    ideal = optimize(ideal_evaluator(H), cfg.p, seed=seed, budget=cfg.budget)
    out = []
    for alpha in cfg.alphas:
        ev = bda_evaluator(H, resource, alpha, compensate=cfg.compensate)
        fixed_val = ev(ideal.params)
        re = optimize(ev, cfg.p, seed=seed, initial=ideal.params, budget=cfg.budget)
        r_ideal, r_fixed, r_reopt = ideal.value / top, fixed_val / top, re.value / top
        grad = float(np.linalg.norm(gradient_probe(ev, ideal.params, 1e-4)))
        out.append(RecoveryRecord(
            n, float(alpha), seed, r_ideal, r_fixed, r_reopt,
            100 * (r_fixed - r_ideal) / r_ideal, 100 * (r_reopt - r_fixed) / r_ideal,
            ideal.evaluations + re.evaluations, grad, ideal.budget_exceeded or re.budget_exceeded,
        ))
        log.info("n=%d alpha=%g seed=%d r_ideal=%.4f r_fixed=%.4f r_reopt=%.4f", n, alpha, seed, r_ideal, r_fixed, r_reopt)
    return out


def bda_performance_sweep(cfg: SweepConfig, workers: int = 1) -> list[RecoveryRecord]:
    """Ideal optimum, banged value at that optimum, and banged re-optimum per (n, alpha, instance)."""
    jobs = [(n, k, cfg) for n in cfg.ns for k in range(cfg.instances)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_instance, jobs))
    else:
        results = [_run_instance(j) for j in jobs]
    records = [r for batch in results for r in batch]
    return sorted(records, key=lambda r: (r.n, r.alpha, r.instance_seed))
