"""Perturbation experiments: data, radius, and operator stability.

Each experiment solves a reference problem and a schedule of perturbed
problems and reports per-step gaps between the perturbed and reference
solutions.  For strictly convex regularizers (``p > 1``) and positive
radius the minimizer is unique, so shrinking gaps witness continuous
dependence on the inputs.  A one-dimensional non-linear counterexample
with a genuinely discontinuous solution map is included for contrast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Problem, SolveStatus, regularizer_value
from .errors import InvalidInputError
from .io import format_float
from .solvers import SolverOptions, residual_method_solve

__all__ = ["StabilityRow", "StabilityReport", "run_data_stability",
           "run_operator_stability", "check_value_right_continuity",
           "instability_demo", "default_schedule_indices"]


def default_schedule_indices():
    """Geometric perturbation indices 1, 2, 4, ..., 64."""
    return [1, 2, 4, 8, 16, 32, 64]


@dataclass
class StabilityRow:
    k: int
    perturbation_size: float
    norm_gap: float
    r_gap: float
    value_gap: float


@dataclass
class StabilityReport:
    rows: list = field(default_factory=list)

    def __post_init__(self):
        sizes = [r.perturbation_size for r in self.rows]
        if any(b > a + 1e-15 for a, b in zip(sizes, sizes[1:])):
            raise InvalidInputError("perturbation sizes must be nonincreasing")
        for r in self.rows:
            if min(r.norm_gap, r.r_gap, r.value_gap) < 0:
                raise InvalidInputError("gaps must be >= 0")

    def to_csv(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write("k,perturbation_size,norm_gap,r_gap,value_gap\n")
            for r in self.rows:
                fh.write(",".join([str(r.k), format_float(r.perturbation_size),
                                   format_float(r.norm_gap), format_float(r.r_gap),
                                   format_float(r.value_gap)]) + "\n")


def _gap_rows(problem, perturbed, opts):
    """Solve reference and schedule, returning rows of solution gaps."""
    ref = residual_method_solve(problem, opts)
    rows = []
    for k, (prob_k, size) in enumerate(perturbed, start=1):
        rep = residual_method_solve(prob_k, opts)
        if rep.status is SolveStatus.INFEASIBLE:
            rows.append(StabilityRow(k, size, math.inf, math.inf, math.inf))
            continue
        rows.append(StabilityRow(
            k=k,
            perturbation_size=size,
            norm_gap=float(np.linalg.norm(rep.x - ref.x)),
            r_gap=abs(regularizer_value(rep.x, problem.p)
                      - regularizer_value(ref.x, problem.p)),
            value_gap=abs(rep.objective - ref.objective),
        ))
    return StabilityReport(rows=rows)


def run_data_stability(problem, schedule, opts=None):
    """Gaps under perturbed data and radii.

    ``schedule`` is a list of ``(y_k, beta_k)`` pairs with nonincreasing
    perturbation size ``||y_k - y|| + |beta_k - beta|``.  Requires ``p > 1``
    (unique minimizers) and ``beta > 0``.
    """
    opts = opts or SolverOptions()
    if problem.p <= 1.0:
        raise InvalidInputError("data stability requires p > 1 (unique minimizers)")
    if problem.beta <= 0.0:
        raise InvalidInputError("data stability requires beta > 0")
    perturbed = []
    for y_k, beta_k in schedule:
        y_k = np.asarray(y_k, dtype=float)
        size = float(np.linalg.norm(y_k - problem.data)) + abs(float(beta_k) - problem.beta)
        perturbed.append((Problem(problem.operator, y_k, beta_k, problem.p), size))
    return _gap_rows(problem, perturbed, opts)


def run_operator_stability(problem, operator_schedule, opts=None):
    """Gaps under perturbed operators with spectral distance shrinking to 0.

    The schedule must have nonincreasing ``||F_k - F||`` (spectral norm);
    violating schedules raise :class:`InvalidInputError`.
    """
    opts = opts or SolverOptions()
    if problem.p <= 1.0:
        raise InvalidInputError("operator stability requires p > 1 (unique minimizers)")
    if problem.beta <= 0.0:
        raise InvalidInputError("operator stability requires beta > 0")
    sizes = []
    perturbed = []
    for F_k in operator_schedule:
        F_k = np.asarray(F_k, dtype=float)
        size = float(np.linalg.norm(F_k - problem.operator, 2))
        sizes.append(size)
        perturbed.append((Problem(F_k, problem.data, problem.beta, problem.p), size))
    if any(b > a + 1e-15 for a, b in zip(sizes, sizes[1:])):
        raise InvalidInputError("operator schedule must have nonincreasing distance to F")
    return _gap_rows(problem, perturbed, opts)


@dataclass
class ValueContinuityReport:
    v_beta: float
    rows: list  # (eps, value)
    sup_gap: float
    max_violation: float


def check_value_right_continuity(operator, data, p, beta, eps_grid, opts=None):
    """Value-function behavior as the radius is enlarged by vanishing eps.

    Computes ``v(beta + eps)`` over a decreasing grid and ``v(beta)``.
    Monotonicity requires ``v(beta + eps) <= v(beta)``; right continuity
    shows up as ``sup_gap = v(beta) - v(beta + eps_min)`` shrinking with
    the grid.  ``max_violation`` reports any positive monotonicity breach.
    """
    opts = opts or SolverOptions()
    eps = [float(e) for e in eps_grid]
    if any(e <= 0 for e in eps):
        raise InvalidInputError("eps grid entries must be > 0")
    if any(b > a for a, b in zip(eps, eps[1:])):
        raise InvalidInputError("eps grid must be decreasing")
    beta = float(beta)
    if beta <= 0:
        raise InvalidInputError("beta must be > 0")

    def value(b):
        rep = residual_method_solve(Problem(operator, data, b, p), opts)
        return math.inf if rep.status is SolveStatus.INFEASIBLE else rep.objective

    v_beta = value(beta)
    rows = [(e, value(beta + e)) for e in eps]
    finite = [v for _, v in rows if math.isfinite(v)]
    sup_gap = v_beta - rows[-1][1] if math.isfinite(v_beta) and finite else math.nan
    max_violation = max([0.0] + [v - v_beta for _, v in rows])
    return ValueContinuityReport(v_beta=v_beta, rows=rows, sup_gap=sup_gap,
                                 max_violation=max_violation)


# -- one-dimensional counterexample ------------------------------------------

def _cubic(x):
    return x ** 3 - x ** 2


def _grid_min_1d(target, radius, resolution):
    """min x**2 s.t. |x^3 - x^2 - target| <= radius, by dense scan on [-3, 3]."""
    lo, hi, res = -3.0, 3.0, float(resolution)
    slack = 1e-9 * max(1.0, radius)
    best = None
    for _ in range(3):  # coarse pass plus two x100 refinements
        xs = np.arange(lo, hi + res, res)
        feas = np.abs(_cubic(xs) - target) <= radius + slack
        if not np.any(feas):
            return None
        cand = xs[feas]
        x_best = cand[np.argmin(cand ** 2)]
        best = float(x_best)
        lo, hi = best - res, best + res
        res /= 100.0
    return best


@dataclass
class InstabilityReport:
    x_zero: float
    rows: list  # (delta, minimizer)
    jump: float


def instability_demo(y, delta_list, resolution=1e-3):
    """Solution jump of ``min x**2 s.t. |x^3 - x^2 - (y + delta)| <= y``.

    The unperturbed problem (``delta = 0``) is solved by ``x = 0``, yet any
    upward data perturbation forces the minimizer beyond 1, so the
    solutions along ``delta -> 0`` stay bounded away from the limit
    solution.  ``jump`` is the gap between the smallest-delta minimizer and
    the unperturbed one.
    """
    y = float(y)
    if y <= 0:
        raise InvalidInputError("y must be > 0")
    deltas = [float(d) for d in delta_list]
    if any(d <= 0 for d in deltas):
        raise InvalidInputError("delta values must be > 0")
    if any(b > a for a, b in zip(deltas, deltas[1:])):
        raise InvalidInputError("delta list must be decreasing")
    x_zero = _grid_min_1d(y, y, resolution)
    rows = []
    for d in deltas:
        x_d = _grid_min_1d(y + d, y, resolution)
        rows.append((d, x_d))
    jump = abs(rows[-1][1] - x_zero) if rows and rows[-1][1] is not None else math.nan
    return InstabilityReport(x_zero=x_zero, rows=rows, jump=jump)
