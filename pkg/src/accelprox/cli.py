"""Command-line harness: configs in, traces and certificate reports out.

Config files are TOML with four sections::

    [problem]    generator = "quadratic" | "logistic_ridge" | "l1_composite"
                 | "quartic", plus generator parameters and a seed
    [algorithm]  name = "ahpe" | "largestep" | "tensor" | "proxgrad",
                 plus the method's parameters
    [stopping]   max_iter (required), grad_norm_tol, value_gap_tol
    [init]       kind = "zero" | "unit", scale, seed   (optional section)
    [output]     trace, report                          (optional section)

`run` writes the trace CSV and the report JSON, then exits 0 only if
every certified bound held.  Exit codes: 2 config error, 3 solver or
capability failure, 4 bound violation.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import certificates
from .core import (LambdaPolicy, MethodConfig, StoppingRule, Trace,
                   TraceRecord, run_ahpe)
from .errors import (AccelProxError, CapabilityError, DataError,
                     LineSearchFailure, ParameterError, SolverFailure,
                     StepError)
from .largestep import LargeStepConfig, run_largestep
from .problems import (make_l1_composite, make_logistic_ridge, make_quadratic,
                       make_quartic, random_logistic_data)
from .proxgrad import PGConfig, run_proxgrad
from .solvers import SubproblemSolver
from .tensor import TensorConfig, run_tensor

__all__ = ["main"]

TRACE_HEADER = "k,lambda,a,A,value_gap,dist_x,dist_y,v_norm,eps,residual_ratio,step_norm"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_BOUNDS = 4


class ConfigError(AccelProxError):
    pass


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _js(x):
    """Standard-JSON float: non-finite values become null."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _load_toml(path: Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such config file")
    except tomllib.TOMLDecodeError as exc:
        # tomllib messages carry "at line N, column M"
        raise ConfigError(f"{path}: {exc}")


def _section(cfg: dict, name: str, path: Path, required: bool = True) -> dict:
    sec = cfg.get(name)
    if sec is None:
        if required:
            raise ConfigError(f"{path}: missing [{name}] section")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"{path}: [{name}] must be a table")
    return sec


def _take(sec: dict, key: str, path: Path, section: str, default=None,
          required: bool = False):
    if key not in sec:
        if required:
            raise ConfigError(f"{path}: [{section}] is missing key {key!r}")
        return default
    return sec[key]


def build_problem(cfg: dict, path: Path, seed_override=None):
    sec = _section(cfg, "problem", path)
    gen = _take(sec, "generator", path, "problem", required=True)
    seed = _take(sec, "seed", path, "problem", default=0)
    if seed_override is not None:
        seed = seed_override
    try:
        if gen == "quadratic":
            return make_quadratic(
                dim=int(_take(sec, "dim", path, "problem", required=True)),
                mu=float(_take(sec, "mu", path, "problem", required=True)),
                L=float(_take(sec, "L", path, "problem", required=True)),
                seed=int(seed))
        if gen == "logistic_ridge":
            samples, labels = random_logistic_data(
                n_samples=int(_take(sec, "n_samples", path, "problem", required=True)),
                dim=int(_take(sec, "dim", path, "problem", required=True)),
                seed=int(seed))
            return make_logistic_ridge(
                samples, labels,
                mu=float(_take(sec, "mu", path, "problem", required=True)))
        if gen == "l1_composite":
            return make_l1_composite(
                dim=int(_take(sec, "dim", path, "problem", required=True)),
                mu=float(_take(sec, "mu", path, "problem", required=True)),
                L=float(_take(sec, "L", path, "problem", required=True)),
                l1_weight=float(_take(sec, "l1_weight", path, "problem", required=True)),
                seed=int(seed))
        if gen == "quartic":
            return make_quartic(
                dim=int(_take(sec, "dim", path, "problem", required=True)),
                mu=float(_take(sec, "mu", path, "problem", required=True)),
                seed=int(seed),
                coupling_scale=float(_take(sec, "coupling_scale", path,
                                           "problem", default=0.1)),
                box_radius=float(_take(sec, "box_radius", path, "problem",
                                       default=1.0)),
                tilt_scale=float(_take(sec, "tilt_scale", path, "problem",
                                       default=0.0)))
    except (ParameterError, DataError) as exc:
        raise ConfigError(f"{path}: [problem] {exc}")
    raise ConfigError(f"{path}: unknown generator {gen!r}")


def build_x0(cfg: dict, path: Path, problem) -> np.ndarray:
    sec = _section(cfg, "init", path, required=False)
    kind = _take(sec, "kind", path, "init", default="zero")
    scale = float(_take(sec, "scale", path, "init", default=1.0))
    if kind == "zero":
        x0 = np.zeros(problem.dim)
        if scale != 1.0:
            raise ConfigError(f"{path}: [init] scale has no effect with kind='zero'")
        return x0
    if kind == "unit":
        seed = int(_take(sec, "seed", path, "init", default=0))
        rng = np.random.default_rng(seed)
        direction = rng.standard_normal(problem.dim)
        return scale * direction / np.linalg.norm(direction)
    raise ConfigError(f"{path}: unknown init kind {kind!r}")


def build_stopping(cfg: dict, path: Path, max_iter_override=None) -> StoppingRule:
    sec = _section(cfg, "stopping", path)
    max_iter = int(_take(sec, "max_iter", path, "stopping", required=True))
    if max_iter_override is not None:
        max_iter = int(max_iter_override)
    grad_tol = _take(sec, "grad_norm_tol", path, "stopping")
    gap_tol = _take(sec, "value_gap_tol", path, "stopping")
    try:
        return StoppingRule(
            max_iter=max_iter,
            grad_norm_tol=None if grad_tol is None else float(grad_tol),
            value_gap_tol=None if gap_tol is None else float(gap_tol))
    except ParameterError as exc:
        raise ConfigError(f"{path}: [stopping] {exc}")


def _build_subsolver(sec: dict, path: Path) -> SubproblemSolver:
    kind = _take(sec, "solver", path, "algorithm", default="exact_structured")
    try:
        return SubproblemSolver(
            kind=kind,
            inner_budget=int(_take(sec, "inner_budget", path, "algorithm",
                                   default=200)),
            inner_tol_floor=float(_take(sec, "inner_tol_floor", path,
                                        "algorithm", default=0.0)))
    except ParameterError as exc:
        raise ConfigError(f"{path}: [algorithm] {exc}")


def run_from_config(cfg: dict, path: Path, seed_override=None,
                    max_iter_override=None) -> Trace:
    problem = build_problem(cfg, path, seed_override)
    x0 = build_x0(cfg, path, problem)
    stopping = build_stopping(cfg, path, max_iter_override)
    sec = _section(cfg, "algorithm", path)
    name = _take(sec, "name", path, "algorithm", required=True)

    if name == "ahpe":
        lam = _take(sec, "lambda", path, "algorithm")
        schedule = _take(sec, "lambda_schedule", path, "algorithm")
        try:
            if schedule is not None:
                policy = LambdaPolicy.from_schedule([float(v) for v in schedule])
            elif lam is not None:
                policy = LambdaPolicy.constant(float(lam))
            else:
                raise ConfigError(
                    f"{path}: [algorithm] ahpe needs lambda or lambda_schedule")
            method = MethodConfig(
                sigma=float(_take(sec, "sigma", path, "algorithm", required=True)),
                lambda_policy=policy, stopping=stopping)
        except ParameterError as exc:
            raise ConfigError(f"{path}: [algorithm] {exc}")
        return run_ahpe(problem, x0, method, _build_subsolver(sec, path))

    if name == "largestep":
        try:
            config = LargeStepConfig(
                p=float(_take(sec, "p", path, "algorithm", default=2.0)),
                theta=float(_take(sec, "theta", path, "algorithm", required=True)),
                sigma=float(_take(sec, "sigma", path, "algorithm", required=True)),
                stopping=stopping,
                window_upper_const=_opt_float(sec.get("window_upper_const")),
                window_upper_sqrt_coef=_opt_float(sec.get("window_upper_sqrt_coef")),
                bracket_factor=float(_take(sec, "bracket_factor", path,
                                           "algorithm", default=2.0)),
                max_evals=int(_take(sec, "max_evals", path, "algorithm",
                                    default=80)),
                lam_seed=float(_take(sec, "lam_seed", path, "algorithm",
                                     default=1.0)))
        except ParameterError as exc:
            raise ConfigError(f"{path}: [algorithm] {exc}")
        return run_largestep(problem, x0, config, _build_subsolver(sec, path))

    if name == "tensor":
        M = sec.get("M")
        try:
            config = TensorConfig(
                sigma_l=float(_take(sec, "sigma_l", path, "algorithm", required=True)),
                sigma_u=float(_take(sec, "sigma_u", path, "algorithm", required=True)),
                sigma_hat=float(_take(sec, "sigma_hat", path, "algorithm",
                                      default=0.0)),
                M=_opt_float(M), p=int(_take(sec, "p", path, "algorithm", default=2)),
                stopping=stopping,
                bracket_factor=float(_take(sec, "bracket_factor", path,
                                           "algorithm", default=2.0)),
                max_evals=int(_take(sec, "max_evals", path, "algorithm",
                                    default=80)),
                lam_seed=float(_take(sec, "lam_seed", path, "algorithm",
                                     default=1.0)),
                inner_budget=int(_take(sec, "inner_budget", path, "algorithm",
                                       default=500)))
        except ParameterError as exc:
            raise ConfigError(f"{path}: [algorithm] {exc}")
        return run_tensor(problem, x0, config)

    if name == "proxgrad":
        try:
            config = PGConfig(
                sigma_u=float(_take(sec, "sigma_u", path, "algorithm", required=True)),
                sigma_hat=float(_take(sec, "sigma_hat", path, "algorithm",
                                      default=0.0)),
                allow_boundary=bool(_take(sec, "allow_boundary", path,
                                          "algorithm", default=False)),
                stopping=stopping)
        except ParameterError as exc:
            raise ConfigError(f"{path}: [algorithm] {exc}")
        return run_proxgrad(problem, x0, config)

    raise ConfigError(f"{path}: unknown algorithm {name!r}")


def _opt_float(v):
    return None if v is None else float(v)


def write_trace(trace: Trace, path: Path):
    lines = [TRACE_HEADER]
    for r in trace.records:
        lines.append(",".join([str(int(r.k))] + [
            _fmt(getattr(r, f)) for f in TraceRecord.FIELDS if f != "k"]))
    path.write_text("\n".join(lines) + "\n")


def report_payload(trace: Trace, bundle, cfg: dict, trace_path: Path) -> dict:
    reports = []
    for rep in bundle.reports:
        reports.append({
            "name": rep.name,
            "satisfied": bool(rep.satisfied),
            "skipped": bool(rep.skipped),
            "note": rep.note,
            "worst_margin": _js(rep.worst_margin),
            "per_k": [[int(e.k), _js(e.bound), _js(e.observed),
                       _js(e.margin), bool(e.ok)] for e in rep.per_k],
        })
    return {
        "metadata": {
            "algorithm": trace.algorithm,
            "problem": trace.problem_name,
            "mu": _js(trace.mu),
            "sigma": _js(trace.sigma),
            "d0": _js(trace.d0),
            "h_star": _js(trace.h_star),
            "iterations": len(trace.records),
            "termination": trace.termination,
            "trace_file": trace_path.name,
        },
        "params": {k: _js(v) for k, v in sorted(trace.params.items())},
        "config": cfg,
        "reports": reports,
        "ok": bundle.ok,
    }


def _resolve_out(cfg: dict, path: Path, out_dir: Path):
    sec = _section(cfg, "output", path, required=False)
    trace_name = _take(sec, "trace", path, "output",
                       default=f"{path.stem}_trace.csv")
    report_name = _take(sec, "report", path, "output",
                        default=f"{path.stem}_report.json")
    return out_dir / trace_name, out_dir / report_name


def _out_dir(args) -> Path:
    if args.out_dir is not None:
        d = Path(args.out_dir)
    else:
        d = Path(os.environ.get("ACCELPROX_OUT_DIR", "."))
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_run(args) -> int:
    path = Path(args.config)
    try:
        cfg = _load_toml(path)
        out_dir = _out_dir(args)
        trace_path, report_path = _resolve_out(cfg, path, out_dir)
        trace = run_from_config(cfg, path, seed_override=args.seed,
                                max_iter_override=args.max_iter)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverFailure, LineSearchFailure, StepError, CapabilityError,
            ParameterError, DataError) as exc:
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    bundle = certificates.verify_trace(trace)
    write_trace(trace, trace_path)
    payload = report_payload(trace, bundle, cfg, trace_path)
    report_path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n")

    failed = [r.name for r in bundle.reports if not r.satisfied]
    print(f"trace:  {trace_path}")
    print(f"report: {report_path}")
    print(f"iterations: {len(trace.records)}  termination: {trace.termination}")
    if failed:
        print(f"bound violations: {', '.join(failed)}", file=sys.stderr)
        return EXIT_BOUNDS
    print(f"bounds: all {len(bundle.reports)} satisfied")
    return EXIT_OK


def _read_trace_csv(path: Path):
    text = path.read_text().strip().splitlines()
    if not text or text[0] != TRACE_HEADER:
        raise ConfigError(f"{path}: not a trace file (bad header)")
    rows = {}
    for line in text[1:]:
        parts = line.split(",")
        rows[int(parts[0])] = parts
    return rows


def cmd_compare(args) -> int:
    paths = [Path(p) for p in args.configs]
    if len(paths) < 2:
        print("config error: compare needs at least two configs",
              file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfgs = [_load_toml(p) for p in paths]
        out_dir = _out_dir(args)
        base = cfgs[0].get("problem")
        for p, cfg in zip(paths[1:], cfgs[1:]):
            if cfg.get("problem") != base:
                raise ConfigError(
                    f"{p}: [problem] differs from {paths[0]}; compare needs "
                    f"identical problem sections")
        traces = []
        labels = []
        for p, cfg in zip(paths, cfgs):
            trace_path, _ = _resolve_out(cfg, p, out_dir)
            if not trace_path.exists():
                raise SolverFailure(
                    f"{trace_path}: trace not found; run {p} first")
            traces.append(_read_trace_csv(trace_path))
            labels.append(p.stem)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"compare failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    seen = {}
    for i, lab in enumerate(labels):
        if lab in seen:
            labels[i] = f"{lab}_{i}"
        seen[lab] = True
    gap_col = TRACE_HEADER.split(",").index("value_gap")
    all_k = sorted(set().union(*[set(t) for t in traces]))
    lines = ["k," + ",".join(f"value_gap_{lab}" for lab in labels)]
    for k in all_k:
        cells = [str(k)]
        for t in traces:
            cells.append(t[k][gap_col] if k in t else "")
        lines.append(",".join(cells))
    out = out_dir / "compare.csv"
    out.write_text("\n".join(lines) + "\n")
    print(f"compare: {out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="accelprox",
        description="Run certified accelerated proximal methods from a config")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one config")
    p_run.add_argument("config")
    p_run.add_argument("--out-dir", default=None)
    p_run.add_argument("--seed", type=int, default=None,
                       help="override [problem] seed")
    p_run.add_argument("--max-iter", type=int, default=None,
                       help="override [stopping] max_iter")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="merge value gaps of finished runs")
    p_cmp.add_argument("configs", nargs="+")
    p_cmp.add_argument("--out-dir", default=None)
    p_cmp.set_defaults(func=cmd_compare)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
