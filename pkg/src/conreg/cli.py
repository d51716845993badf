"""Batch command-line entry points.

Subcommands wire configuration to the library and write CSV/JSON reports:

* ``solve``   -- one constrained solve from a flat key=value config file.
* ``rates``   -- radius sweep on a synthetic instance plus a slope summary.
* ``stability`` -- perturbation schedules, value continuity, and the 1-d
  counterexample.
* ``density`` -- entropy density estimate from a samples file.

Exit codes: 0 success (an infeasible solve is a result, not a failure),
2 malformed input, 3 experiment/construction failure.  Outputs are
deterministic given identical inputs and seeds; every float is printed
with 17 significant digits.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import io, rates, stability, transport
from .core import Problem, SolveStatus, regularizer_value
from .errors import (ConstructionFailedError, InsufficientDataError,
                     InvalidInputError, SizeError, UnsupportedExponentError)
from .solvers import SolverOptions, residual_method_solve

_INPUT_ERRORS = (InvalidInputError, UnsupportedExponentError, SizeError,
                 InsufficientDataError, OSError, ValueError)

_SOLVE_KEYS = {
    "operator", "data", "beta", "p", "radius_is_squared", "out",
    "max_outer_bisections", "max_inner_iterations", "inner_tolerance",
    "discrepancy_match_tolerance", "restarts", "rng_seed",
}


def _fail(message):
    print(f"error: {message}", file=sys.stderr)


def parse_config(path, known_keys):
    """Flat ``key = value`` file with '#' comments; unknown keys are errors."""
    out = {}
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInputError(f"{path}, line {lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in known_keys:
                raise InvalidInputError(f"{path}, line {lineno}: unknown key {key!r}")
            if key in out:
                raise InvalidInputError(f"{path}, line {lineno}: duplicate key {key!r}")
            out[key] = value
    return out


def _parse_bool(text, key):
    low = text.strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise InvalidInputError(f"{key} must be a boolean, got {text!r}")


def _json_value(v):
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return io.format_float(v)
    if isinstance(v, str):
        return '"' + v + '"'
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v)!r}")


def _write_json(path, items):
    """Write an ordered mapping as JSON with 17-digit floats."""
    body = ",\n".join(f'  "{k}": {_json_value(v)}' for k, v in items)
    with open(path, "w", newline="\n") as fh:
        fh.write("{\n" + body + "\n}\n")


def _solver_options(cfg):
    kwargs = {}
    for key, cast in (("max_outer_bisections", int), ("max_inner_iterations", int),
                      ("inner_tolerance", float),
                      ("discrepancy_match_tolerance", float),
                      ("restarts", int), ("rng_seed", int)):
        if key in cfg:
            kwargs[key] = cast(cfg[key])
    return SolverOptions(**kwargs)


def cmd_solve(args):
    cfg = parse_config(args.config, _SOLVE_KEYS)
    for key in ("operator", "data", "beta", "p"):
        if key not in cfg:
            raise InvalidInputError(f"config is missing required key {key!r}")
    operator = io.read_matrix(cfg["operator"])
    data = io.read_vector(cfg["data"])
    beta = float(cfg["beta"])
    squared = args.radius_is_squared or (
        "radius_is_squared" in cfg and _parse_bool(cfg["radius_is_squared"],
                                                   "radius_is_squared"))
    if squared:
        if beta < 0:
            raise InvalidInputError("a squared radius must be >= 0")
        beta = math.sqrt(beta)
    problem = Problem(operator, data, beta, float(cfg["p"]))
    report = residual_method_solve(problem, _solver_options(cfg))
    out = cfg.get("out", "solve_report.json")
    _write_json(out, [
        ("x", [float(v) for v in report.x]),
        ("objective", float(report.objective)),
        ("discrepancy", float(report.discrepancy)),
        ("alpha", None if report.alpha is None else float(report.alpha)),
        ("status", report.status.value),
        ("iterations", int(report.iterations)),
        ("restarts_used", int(report.restarts_used)),
    ])
    return 0


def cmd_rates(args):
    if args.num_beta < 3:
        raise InvalidInputError("num-beta must be >= 3 for a slope fit")
    if args.beta_min <= 0 or args.beta_max <= args.beta_min:
        raise InvalidInputError("need 0 < beta-min < beta-max")
    spec = rates.RateInstanceSpec(m=args.m, n=args.n, p=args.p,
                                  sparsity=args.sparsity, rng_seed=args.seed)
    instance = rates.build_rate_instance(spec)
    grid = rates.default_beta_grid(args.beta_min, args.beta_max, args.num_beta)
    table = rates.run_rate_experiment(instance, grid, args.seeds)
    table.to_csv(args.out)
    fit = rates.fit_loglog_slope(table, "err_l2")
    expected = rates.expected_rate(args.p, args.sparsity > 0, "l2")
    summary = args.summary or args.out + ".summary.json"
    _write_json(summary, [
        ("slope", fit.slope),
        ("expected", expected),
        ("r_squared", fit.r_squared),
        ("pass", abs(fit.slope - expected) <= 0.15),
    ])
    return 0


def _seeded_problem(m, n, p, beta_frac, seed):
    rng = np.random.default_rng([seed, 104729])
    F = rng.standard_normal((m, n)) / math.sqrt(n)
    y = rng.standard_normal(m)
    beta = beta_frac * float(np.linalg.norm(y))
    return Problem(F, y, beta, p), rng


def cmd_stability(args):
    if args.mode == "counterexample":
        deltas = [float(tok) for tok in args.deltas.split(",")]
        demo = stability.instability_demo(args.y, deltas, resolution=args.resolution)
        rows = []
        for k, (delta, x_d) in enumerate(demo.rows, start=1):
            norm_gap = abs(x_d - demo.x_zero)
            r_gap = abs(x_d ** 2 - demo.x_zero ** 2)
            rows.append(stability.StabilityRow(k, delta, norm_gap, r_gap, r_gap))
        rows.append(stability.StabilityRow(len(rows) + 1, 0.0, 0.0, 0.0, 0.0))
        stability.StabilityReport(rows=rows).to_csv(args.out)
        return 0

    problem, rng = _seeded_problem(args.m, args.n, args.p, args.beta_frac, args.seed)
    opts = SolverOptions(rng_seed=args.seed)
    if args.mode == "data":
        e = rng.standard_normal(problem.m)
        e /= np.linalg.norm(e)
        schedule = [(problem.data + e / k, problem.beta)
                    for k in stability.default_schedule_indices()]
        report = stability.run_data_stability(problem, schedule, opts)
    elif args.mode == "operator":
        E = rng.standard_normal((problem.m, problem.n))
        E /= np.linalg.norm(E, 2)
        schedule = [problem.operator + E / k
                    for k in stability.default_schedule_indices()]
        report = stability.run_operator_stability(problem, schedule, opts)
    else:  # value
        eps_grid = [10.0 ** (-j) for j in range(1, 7)]
        tight = SolverOptions(rng_seed=args.seed, discrepancy_match_tolerance=1e-10)
        ref = residual_method_solve(problem, tight)
        rows = []
        for k, eps in enumerate(eps_grid, start=1):
            perturbed = Problem(problem.operator, problem.data,
                                problem.beta + eps, problem.p)
            rep = residual_method_solve(perturbed, tight)
            rows.append(stability.StabilityRow(
                k, eps,
                float(np.linalg.norm(rep.x - ref.x)),
                abs(regularizer_value(rep.x, problem.p)
                    - regularizer_value(ref.x, problem.p)),
                abs(rep.objective - ref.objective)))
        report = stability.StabilityReport(rows=rows)
    report.to_csv(args.out)
    return 0


def cmd_density(args):
    samples = io.read_vector(args.samples)
    domain = (args.domain_a, args.domain_b)
    if args.beta == "auto":
        h = (domain[1] - domain[0]) / args.cells
        counts, _ = np.histogram(samples, bins=args.cells, range=domain)
        if counts.sum() == 0:
            raise InvalidInputError("samples file is empty")
        binned = counts / counts.sum()
        uniform = np.full(args.cells, 1.0 / args.cells)
        w1 = float(np.sum(np.abs(np.cumsum(binned - uniform))) * h)
        beta = 2.0 * w1 / math.sqrt(samples.size)
        beta_source = "auto"
    else:
        beta = float(args.beta)
        beta_source = "flag"
    density, report = transport.density_estimate(samples, beta, domain=domain,
                                                 cells=args.cells)
    density.to_csv(args.out)
    report_path = args.report or args.out + ".report.json"
    _write_json(report_path, [
        ("beta", report.beta),
        ("beta_source", beta_source),
        ("achieved_w1", report.achieved_w1),
        ("entropy", report.entropy),
        ("penalty", report.penalty),
        ("rounds", report.rounds),
        ("iterations", report.iterations),
        ("status", report.status),
    ])
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="conreg",
        description="Constrained regularization solvers and experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one constrained problem from a config file")
    p_solve.add_argument("config", help="flat key = value config file")
    p_solve.add_argument("--radius-is-squared", action="store_true",
                         help="interpret beta as a squared-norm radius")
    p_solve.set_defaults(func=cmd_solve)

    p_rates = sub.add_parser("rates", help="convergence-rate sweep on a synthetic instance")
    p_rates.add_argument("--p", type=float, required=True)
    p_rates.add_argument("--sparsity", type=int, default=5)
    p_rates.add_argument("--m", type=int, default=64)
    p_rates.add_argument("--n", type=int, default=128)
    p_rates.add_argument("--beta-min", type=float, default=1e-4)
    p_rates.add_argument("--beta-max", type=float, default=1e-1)
    p_rates.add_argument("--num-beta", type=int, default=9)
    p_rates.add_argument("--seeds", type=int, default=10)
    p_rates.add_argument("--seed", type=int, default=0)
    p_rates.add_argument("--out", required=True, help="rate table CSV path")
    p_rates.add_argument("--summary", help="summary JSON path (default OUT.summary.json)")
    p_rates.set_defaults(func=cmd_rates)

    p_stab = sub.add_parser("stability", help="perturbation and continuity experiments")
    p_stab.add_argument("mode", choices=["data", "operator", "value", "counterexample"])
    p_stab.add_argument("--m", type=int, default=8)
    p_stab.add_argument("--n", type=int, default=12)
    p_stab.add_argument("--p", type=float, default=2.0)
    p_stab.add_argument("--beta-frac", type=float, default=0.5,
                        help="radius as a fraction of ||y||")
    p_stab.add_argument("--seed", type=int, default=0)
    p_stab.add_argument("--y", type=float, default=1.0,
                        help="counterexample data value")
    p_stab.add_argument("--deltas", default="0.1,0.01,0.001",
                        help="counterexample perturbations, comma separated, decreasing")
    p_stab.add_argument("--resolution", type=float, default=1e-3)
    p_stab.add_argument("--out", required=True, help="stability report CSV path")
    p_stab.set_defaults(func=cmd_stability)

    p_dens = sub.add_parser("density", help="entropy density estimate from samples")
    p_dens.add_argument("--samples", required=True, help="one sample per line")
    p_dens.add_argument("--beta", default="auto",
                        help="W1 radius, or 'auto' for the sample-size heuristic")
    p_dens.add_argument("--cells", type=int, default=64)
    p_dens.add_argument("--domain-a", type=float, default=0.0)
    p_dens.add_argument("--domain-b", type=float, default=1.0)
    p_dens.add_argument("--out", required=True, help="grid density CSV path")
    p_dens.add_argument("--report", help="report JSON path (default OUT.report.json)")
    p_dens.set_defaults(func=cmd_density)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConstructionFailedError as exc:
        _fail(str(exc))
        return 3
    except _INPUT_ERRORS as exc:
        _fail(str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
