"""Time accounting for digital-analog versus gate-based execution of one problem layer."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from .compiler import CompileError, DASchedule, compile_schedule, x_gate_layers
from .problems import Graph, Problem, random_erdos_renyi
from .resources import ResourceError, ResourceModel, build_resource

log = logging.getLogger(__name__)


# -- edge colouring ----------------------------------------------------------------


def _greedy(edges: list[tuple[int, int]]) -> dict[tuple[int, int], int]:
    used: dict[int, set[int]] = {}
    colors = {}
    for j, k in edges:
        taken = used.setdefault(j, set()) | used.setdefault(k, set())
        c = next(c for c in range(len(taken) + 1) if c not in taken)
        colors[(j, k)] = c
        used[j].add(c)
        used[k].add(c)
    return colors


def _misra_gries(n: int, edges: list[tuple[int, int]], ncolors: int) -> dict[tuple[int, int], int]:
    """Proper colouring with ``ncolors = max_degree + 1`` colours (Misra and Gries, 1992)."""
    at = {v: {} for v in range(1, n + 1)}  # vertex -> {colour: neighbour}

    def col(u, v):
        for c, w in at[u].items():
            if w == v:
                return c
        return None

    def free(x):
        return next(c for c in range(ncolors) if c not in at[x])

    def is_free(c, x):
        return c not in at[x]

    def set_col(u, v, c):
        old = col(u, v)
        if old is not None:
            del at[u][old], at[v][old]
        if c is not None:
            at[u][c] = v
            at[v][c] = u

    for u, v in edges:
        fan = [v]
        nbrs = [w for c, w in at[u].items()]
        grown = True
        while grown:
            grown = False
            for w in nbrs:
                if w not in fan and is_free(col(u, w), fan[-1]):
                    fan.append(w)
                    grown = True
                    break
        c, d = free(u), free(fan[-1])
        # invert the c/d alternating path starting at u
        path, x, want = [], u, d
        while want in at[x]:
            y = at[x][want]
            path.append((x, y, want))
            x, want = y, (c if want == d else d)
        for x, y, old in path:
            del at[x][old], at[y][old]
        for x, y, old in path:
            new = c if old == d else d
            at[x][new] = y
            at[y][new] = x
        # first fan prefix ending at a vertex where d is free
        k = None
        for i, w in enumerate(fan):
            if i > 0 and not is_free(col(u, w), fan[i - 1]):
                break
            if is_free(d, w):
                k = i
                break
        if k is None:
            raise RuntimeError("edge colouring invariant violated")
        shifted = [col(u, fan[i + 1]) for i in range(k)]
        for w in fan[1 : k + 1]:
            set_col(u, w, None)
        for w, c_new in zip(fan, shifted):
            set_col(u, w, c_new)
        set_col(u, fan[k], d)
    return {(min(u, v), max(u, v)): c for u in at for c, v in at[u].items()}


def greedy_edge_coloring(graph: Graph) -> dict[tuple[int, int], int]:
    """Greedy smallest-free-colour over sorted edges, repaired to max_degree + 1 colours if needed."""
    edges = graph.sorted_edges()
    colors = _greedy(edges)
    if colors and max(colors.values()) + 1 > graph.max_degree + 1:
        colors = _misra_gries(graph.n, edges, graph.max_degree + 1)
    return colors


def is_proper_coloring(graph: Graph, colors: dict) -> bool:
    if set(colors) != set(graph.edges):
        return False
    seen = set()
    for (j, k), c in colors.items():
        if (j, c) in seen or (k, c) in seen:
            return False
        seen.update({(j, c), (k, c)})
    return True


def digital_steps(graph: Graph) -> int:
    colors = greedy_edge_coloring(graph)
    return max(colors.values()) + 1 if colors else 0


def digital_time(graph: Graph, gamma: float = 1.0, coupling: float = 0.5) -> float:
    """Parallel two-qubit layers times the per-edge interaction time ``|gamma * coupling|``."""
    return digital_steps(graph) * abs(gamma * coupling)


# -- DA accounting ---------------------------------------------------------------


def da_time(schedule: DASchedule) -> float:
    return schedule.total_time


@dataclass
class TimeCostReport:
    n: int
    model: str
    seed: int
    da_time: float
    x_count: int
    digital_steps: int
    digital_time: float
    stepwise_total: float
    max_degree: int
    method: str = ""
    error: str = ""

    def row(self) -> dict:
        return asdict(self)


def time_cost(problem: Problem, model: ResourceModel, seed: int, *, gamma: float = 1.0, t_x: float = 0.0,
              method: str = "auto") -> TimeCostReport:
    graph = problem.graph
    steps = digital_steps(graph)
    dig = digital_time(graph, gamma, 0.5 if problem.kind == "maxcut" else 0.25)
    label = model.label
    try:
        res = build_resource(model.with_seed(seed) if model.kind == "gaussian" else model, problem.n)
        sched = compile_schedule(problem.hamiltonian(), gamma, res, method=method)
    except (CompileError, ResourceError) as exc:
        nan = float("nan")
        return TimeCostReport(problem.n, label, seed, nan, 0, steps, dig, nan, graph.max_degree, error=str(exc))
    xc = x_gate_layers(sched).x_count
    t = da_time(sched)
    return TimeCostReport(problem.n, label, seed, t, xc, steps, dig, t + xc * t_x, graph.max_degree, sched.method)


REFERENCE_MODELS = (
    ResourceModel.homogeneous_model(),
    ResourceModel.gaussian(0.05),
    ResourceModel.gaussian(0.1),
    ResourceModel.power_law(3),
    ResourceModel.power_law(6),
)


def comparison_sweep(ns, models=REFERENCE_MODELS, *, p_clause: float = 0.75, seeds=range(20), gamma: float = 1.0,
                     t_x: float = 0.0, base_seed: int = 0) -> list[TimeCostReport]:
    """One report per (n, seed, model).  Every model sees the same graph for a given seed,
    and Gaussian models of different widths share their underlying normal draws."""
    out = []
    for n in ns:
        for s in seeds:
            seed = int(np.random.SeedSequence([base_seed, n, s]).generate_state(1)[0])
            problem = Problem.maxcut(random_erdos_renyi(n, p_clause, seed))
            for m in models:
                rep = time_cost(problem, m, seed, gamma=gamma, t_x=t_x)
                if rep.error:
                    log.warning("n=%d seed=%d %s: %s", n, seed, m.label, rep.error)
                out.append(rep)
    return out


def cell_means(reports: list[TimeCostReport]) -> dict[tuple[int, str], float]:
    cells: dict[tuple[int, str], list[float]] = {}
    for r in reports:
        if not r.error:
            cells.setdefault((r.n, r.model), []).append(r.da_time)
    return {k: float(np.mean(v)) for k, v in cells.items()}
