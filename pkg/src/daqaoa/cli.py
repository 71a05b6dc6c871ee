"""Command-line front end: ``python3 -m daqaoa <command> --config cfg.json``.

Data goes to ``--out`` (or stdout); progress goes to stderr.  Every output
embeds the tool version and a hash of the effective configuration.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from .bounds import BoundError, bound_report
from .compiler import CompileError, UnsupportedCombinationError, UnsupportedSizeError, compile_schedule, schedule_fidelity
from .costs import REFERENCE_MODELS, comparison_sweep
from .dynamics import SimulationError, bdaqc_qaoa_state, expectation, qaoa_state, sdaqc_qaoa_state, state_fidelity
from .problems import Problem, ProblemError, load_problem, random_erdos_renyi, random_max2sat, max_value
from .qaoa import OptimizationError, QAOAParams, SweepConfig, bda_evaluator, bda_performance_sweep, ideal_evaluator, optimize
from .resources import ResourceError, model_from_dict, resource_from_dict

log = logging.getLogger("daqaoa")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_BUDGET = 0, 2, 3, 4
VERIFY_MAX_N = 10


class ConfigError(ValueError):
    pass


COMMAND_KEYS = {
    "compile": {"problem", "resource", "gamma", "method", "seed"},
    "simulate": {"problem", "resource", "mode", "alpha", "gammas", "betas", "compensate", "seed"},
    "optimize": {"problem", "resource", "mode", "alpha", "p", "budget", "seed", "compensate"},
    "bound": {"problem", "resource", "alpha", "gammas", "betas", "numeric", "seed"},
    "timecost": {"ns", "models", "p_clause", "seeds", "gamma", "t_x", "seed"},
    "sweep": {"kind", "ns", "alphas", "p", "instances", "p_clause", "seed", "budget", "resource", "compensate",
              "models", "seeds", "gamma", "t_x"},
}


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMAND_KEYS:
            raise ConfigError(f"unknown command {self.command!r}")
        extra = set(self.params) - COMMAND_KEYS[self.command]
        if extra:
            raise ConfigError(f"unknown config keys for {self.command}: {sorted(extra)}")

    def get(self, key, default=None):
        return self.params.get(key, default)

    def digest(self) -> str:
        blob = json.dumps({"command": self.command, **self.params}, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def meta(self) -> dict:
        return {"tool": "daqaoa", "version": __version__, "config_hash": self.digest()}


# -- input helpers -----------------------------------------------------------------


def _problem(cfg: ExperimentConfig) -> Problem:
    spec = cfg.get("problem")
    if spec is None:
        raise ConfigError("config needs a 'problem'")
    if isinstance(spec, str):
        return load_problem(spec)
    if "generate" in spec:
        g = spec["generate"]
        n, p, seed = int(g["n"]), float(g.get("p_clause", 0.7)), int(g.get("seed", cfg.get("seed", 0)))
        if g.get("type", "maxcut") == "maxcut":
            return Problem.maxcut(random_erdos_renyi(n, p, seed))
        return Problem(n, "max2sat", clauses=random_max2sat(n, p, seed))
    return Problem.from_dict(spec)


def _resource(cfg: ExperimentConfig, n: int):
    spec = cfg.get("resource", {"model": "homogeneous"})
    if isinstance(spec, str):
        with open(spec) as fh:
            spec = json.load(fh)
    if spec.get("model") == "gaussian" and spec.get("seed") is None:
        # keep every draw traceable to the declared config seed
        spec = {**spec, "seed": int(cfg.get("seed", 0))}
    return resource_from_dict(spec, n)


def _params(cfg: ExperimentConfig) -> QAOAParams:
    return QAOAParams(cfg.get("gammas", [0.0]), cfg.get("betas", [0.0]))


# -- commands ----------------------------------------------------------------------


def cmd_compile(cfg: ExperimentConfig) -> tuple[dict, int]:
    problem = _problem(cfg)
    H = problem.hamiltonian()
    res = _resource(cfg, problem.n)
    sched = compile_schedule(H, float(cfg.get("gamma", 1.0)), res, method=cfg.get("method", "auto"))
    out = sched.to_dict()
    out["total_time"] = sched.total_time
    if problem.n <= VERIFY_MAX_N:
        fid = schedule_fidelity(sched, H)
        out["verification"] = {"fidelity": fid, "passed": bool(fid >= 1 - 1e-9)}
        if fid < 1 - 1e-9:
            return out, EXIT_NUMERIC
    return out, EXIT_OK


def _state(cfg: ExperimentConfig, H, res, prm: QAOAParams):
    mode = cfg.get("mode", "ideal")
    if mode == "ideal":
        return qaoa_state(H, prm.gammas, prm.betas)
    if mode == "sdaqc":
        return sdaqc_qaoa_state(H, res, prm.gammas, prm.betas)
    if mode == "bdaqc":
        return bdaqc_qaoa_state(H, res, float(cfg.get("alpha", 1e3)), prm.gammas, prm.betas,
                                compensate=bool(cfg.get("compensate", False)))
    raise ConfigError(f"unknown mode {mode!r}")


def cmd_simulate(cfg: ExperimentConfig) -> tuple[dict, int]:
    problem = _problem(cfg)
    H = problem.hamiltonian()
    res = _resource(cfg, problem.n)
    prm = _params(cfg)
    psi = _state(cfg, H, res, prm)
    ideal = qaoa_state(H, prm.gammas, prm.betas)
    val = expectation(psi, H)
    top = max_value(H)
    return {
        "mode": cfg.get("mode", "ideal"),
        "expectation": val,
        "approximation_ratio": val / top if top > 0 else None,
        "fidelity_vs_ideal": state_fidelity(ideal, psi),
    }, EXIT_OK


def cmd_optimize(cfg: ExperimentConfig) -> tuple[dict, int]:
    problem = _problem(cfg)
    H = problem.hamiltonian()
    mode = cfg.get("mode", "ideal")
    if mode == "ideal":
        ev = ideal_evaluator(H)
    elif mode == "bdaqc":
        ev = bda_evaluator(H, _resource(cfg, problem.n), float(cfg.get("alpha", 1e3)),
                           compensate=bool(cfg.get("compensate", False)))
    else:
        raise ConfigError(f"optimize supports modes ideal and bdaqc, got {mode!r}")
    res = optimize(ev, int(cfg.get("p", 1)), seed=int(cfg.get("seed", 0)), budget=int(cfg.get("budget", 2000)))
    top = max_value(H)
    out = {
        "gammas": res.params.gammas.tolist(),
        "betas": res.params.betas.tolist(),
        "expectation": res.value,
        "approximation_ratio": res.value / top if top > 0 else None,
        "evaluations": res.evaluations,
        "budget_exceeded": res.budget_exceeded,
    }
    return out, EXIT_BUDGET if res.budget_exceeded else EXIT_OK


def cmd_bound(cfg: ExperimentConfig) -> tuple[dict, int]:
    problem = _problem(cfg)
    H = problem.hamiltonian()
    prm = _params(cfg)
    rep = bound_report(H, _resource(cfg, problem.n), float(cfg.get("alpha", 1e3)), prm.gammas, prm.betas,
                       numeric=bool(cfg.get("numeric", False)))
    return rep.to_dict(), EXIT_OK


def _models(cfg: ExperimentConfig):
    specs = cfg.get("models")
    return REFERENCE_MODELS if specs is None else tuple(model_from_dict(m) for m in specs)


def _timecost_rows(cfg: ExperimentConfig) -> list[dict]:
    reports = comparison_sweep(
        cfg.get("ns", [6, 8, 10]), _models(cfg), p_clause=float(cfg.get("p_clause", 0.75)),
        seeds=range(int(cfg.get("seeds", 20))), gamma=float(cfg.get("gamma", 1.0)),
        t_x=float(cfg.get("t_x", 0.0)), base_seed=int(cfg.get("seed", 0)),
    )
    return [r.row() for r in reports]


TIMECOST_COLUMNS = ["n", "model", "seed", "da_time", "x_count", "digital_steps", "digital_time", "stepwise_total",
                    "max_degree", "method", "error"]
RECOVERY_COLUMNS = ["n", "alpha", "instance_seed", "r_ideal", "r_fixed", "r_reopt", "pct_fixed_change", "pct_reopt_gain", "evals",
                    "grad_norm", "budget_exceeded"]


def cmd_timecost(cfg: ExperimentConfig) -> tuple[tuple[list[str], list[dict]], int]:
    return (TIMECOST_COLUMNS, _timecost_rows(cfg)), EXIT_OK


def cmd_sweep(cfg: ExperimentConfig, workers: int = 1) -> tuple[tuple[list[str], list[dict]], int]:
    kind = cfg.get("kind", "recovery")
    if kind == "timecost":
        return cmd_timecost(ExperimentConfig("timecost", {k: v for k, v in cfg.params.items()
                                                          if k in COMMAND_KEYS["timecost"]}))
    if kind != "recovery":
        raise ConfigError(f"unknown sweep kind {kind!r}")
    names = {f.name for f in fields(SweepConfig)}
    sc = SweepConfig(**{k: v for k, v in cfg.params.items() if k in names})
    records = bda_performance_sweep(sc, workers=workers)
    code = EXIT_BUDGET if any(r.budget_exceeded for r in records) else EXIT_OK
    return (RECOVERY_COLUMNS, [r.row() for r in records]), code


# -- output ------------------------------------------------------------------------


def _to_builtin(x):
    if isinstance(x, dict):
        return {k: _to_builtin(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_to_builtin(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


def render_json(cfg: ExperimentConfig, data: dict) -> str:
    return json.dumps({"meta": cfg.meta(), **_to_builtin(data)}, indent=2, sort_keys=False) + "\n"


def render_csv(cfg: ExperimentConfig, columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    m = cfg.meta()
    buf.write(f"# {m['tool']} {m['version']} config_hash={m['config_hash']}\n")
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _to_builtin(v) for k, v in row.items()})
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="daqaoa", description="Digital-analog QAOA workbench")
    ap.add_argument("--version", action="version", version=f"daqaoa {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMAND_KEYS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "compile":
            p.add_argument("--problem", help="problem JSON file")
            p.add_argument("--resource", help="resource JSON file")
            p.add_argument("--gamma", type=float)
    return ap


def load_config(args) -> ExperimentConfig:
    params: dict = {}
    if args.config:
        with open(args.config) as fh:
            params = json.load(fh)
        if not isinstance(params, dict):
            raise ConfigError("config must be a JSON object")
        params.pop("command", None)
    for key in ("problem", "resource", "gamma"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    if args.seed is not None:
        params["seed"] = args.seed
    return ExperimentConfig(args.command, params)


def _classify(exc: Exception) -> tuple[str, int]:
    if isinstance(exc, (UnsupportedSizeError, UnsupportedCombinationError)):
        return type(exc).__name__, EXIT_VALIDATION
    if isinstance(exc, ResourceError) and "n = 4" in str(exc):
        return "UnsupportedSizeError", EXIT_VALIDATION
    if isinstance(exc, (CompileError, SimulationError, np.linalg.LinAlgError)):
        return type(exc).__name__, EXIT_NUMERIC
    return type(exc).__name__, EXIT_VALIDATION


def run(args) -> int:
    cfg = load_config(args)
    if args.command == "sweep":
        (columns, rows), code = cmd_sweep(cfg, args.workers)
        text = render_csv(cfg, columns, rows)
    elif args.command == "timecost":
        (columns, rows), code = cmd_timecost(cfg)
        text = render_csv(cfg, columns, rows)
    else:
        handler = {"compile": cmd_compile, "simulate": cmd_simulate, "optimize": cmd_optimize, "bound": cmd_bound}
        data, code = handler[args.command](cfg)
        text = render_json(cfg, data)
    _emit(text, args.out)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except (ValueError, KeyError, TypeError, OSError, SimulationError, np.linalg.LinAlgError) as exc:
        kind, code = _classify(exc)
        sys.stdout.write(json.dumps({"error": kind, "message": str(exc), "exit_code": code}) + "\n")
        return code


if __name__ == "__main__":
    raise SystemExit(main())
