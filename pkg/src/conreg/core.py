"""Problem model and shared primitives for constrained regularization.

A problem instance bundles a dense linear operator F, measured data y, a
radius ``beta`` bounding the admissible data misfit, and the exponent ``p``
of the sum-of-powers regularizer ``R_p(x) = sum_i |x_i|**p``.  Solvers
minimize ``R_p`` over the feasible set ``{x : ||F x - y|| <= beta}``.

The radius is measured in the plain Euclidean output norm.  Callers holding
a squared-norm radius convert it with a square root at ingestion (the CLI
exposes a flag for this).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidInputError

#: Dense desk-scale cap on either matrix dimension.
MAX_DIM = 2048


def as_vector(x, name="x"):
    """Coerce to a finite 1-d float array, raising :class:`InvalidInputError`."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def as_matrix(a, name="operator"):
    """Coerce to a finite 2-d float array, raising :class:`InvalidInputError`."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInputError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


class SolveStatus(Enum):
    """Outcome classification of a constrained solve."""

    CONSTRAINT_ACTIVE = "ConstraintActive"
    INTERIOR_MINIMUM = "InteriorMinimum"
    ZERO_FEASIBLE = "ZeroFeasible"
    INFEASIBLE = "Infeasible"


@dataclass
class Problem:
    """A constrained regularization instance.

    Parameters
    ----------
    operator : array, shape (m, n)
        Dense forward matrix.
    data : array, shape (m,)
        Measured right-hand side.
    beta : float
        Misfit radius, ``beta >= 0``, in the plain output norm.
    p : float
        Regularizer exponent in ``(0, 2]``.
    """

    operator: np.ndarray
    data: np.ndarray
    beta: float
    p: float

    def __post_init__(self):
        self.operator = as_matrix(self.operator)
        self.data = as_vector(self.data, "data")
        m, n = self.operator.shape
        if m > MAX_DIM or n > MAX_DIM:
            raise InvalidInputError(f"operator exceeds the {MAX_DIM} desk-scale cap: {m}x{n}")
        if self.data.shape[0] != m:
            raise InvalidInputError(
                f"data length {self.data.shape[0]} does not match operator rows {m}")
        self.beta = float(self.beta)
        if not math.isfinite(self.beta) or self.beta < 0:
            raise InvalidInputError(f"beta must be finite and >= 0, got {self.beta}")
        self.p = float(self.p)
        if not (0.0 < self.p <= 2.0):
            raise InvalidInputError(f"p must lie in (0, 2], got {self.p}")

    @property
    def m(self):
        return self.operator.shape[0]

    @property
    def n(self):
        return self.operator.shape[1]


@dataclass
class SolveReport:
    """Result of a constrained (or auxiliary Tikhonov) solve.

    ``objective`` is always the regularizer value ``R_p(x)``, not the
    Tikhonov objective.  ``alpha`` is the Tikhonov parameter selected on the
    discrepancy-matching path, when one was used.  ``path`` records the
    visited ``(alpha, discrepancy)`` pairs of that path and ``converged``
    flags inner-iteration convergence; neither is part of the wire format.
    """

    x: np.ndarray
    objective: float
    discrepancy: float
    alpha: float | None
    status: SolveStatus
    iterations: int
    restarts_used: int = 0
    converged: bool = True
    path: list = field(default_factory=list, repr=False)


def feasibility_tolerance(problem):
    """Default feasibility slack, ``1e-9 * max(1, ||y||)``."""
    return 1e-9 * max(1.0, float(np.linalg.norm(problem.data)))


def regularizer_value(x, p):
    """Evaluate ``R_p(x) = sum_i |x_i|**p``.

    Nonnegative, and zero exactly for the zero vector.
    """
    p = float(p)
    if not (0.0 < p <= 2.0):
        raise InvalidInputError(f"p must lie in (0, 2], got {p}")
    x = as_vector(x)
    return float(np.sum(np.abs(x) ** p))


def discrepancy(problem, x):
    """Euclidean misfit ``||F x - y||`` of a candidate point."""
    x = as_vector(x)
    if x.shape[0] != problem.n:
        raise InvalidInputError(
            f"x length {x.shape[0]} does not match operator columns {problem.n}")
    return float(np.linalg.norm(problem.operator @ x - problem.data))


def feasible(problem, x, tol=None):
    """Whether ``x`` satisfies the misfit constraint up to slack ``tol``.

    ``tol=None`` uses the default :func:`feasibility_tolerance`.
    """
    if tol is None:
        tol = feasibility_tolerance(problem)
    if tol < 0:
        raise InvalidInputError(f"tol must be >= 0, got {tol}")
    return discrepancy(problem, x) <= problem.beta + tol


def value_function(operator, data, p, beta_grid, opts=None):
    """Optimal regularizer value over an ascending grid of radii.

    Solves the constrained problem once per grid point and returns a list of
    ``(beta, value)`` pairs.  Infeasible cells carry ``value = inf`` (the
    infimum over an empty feasible set), which keeps the sequence
    nonincreasing.

    Parameters
    ----------
    operator, data, p
        Fixed problem family.
    beta_grid : sequence of float
        Ascending radii, all ``>= 0``.
    opts : SolverOptions, optional
        Forwarded to the solver.
    """
    from . import solvers

    grid = [float(b) for b in beta_grid]
    if any(b < 0 for b in grid):
        raise InvalidInputError("beta_grid entries must be >= 0")
    if any(b2 < b1 for b1, b2 in zip(grid, grid[1:])):
        raise InvalidInputError("beta_grid must be ascending")
    out = []
    for b in grid:
        report = solvers.residual_method_solve(Problem(operator, data, b, p), opts)
        value = math.inf if report.status is SolveStatus.INFEASIBLE else report.objective
        out.append((b, value))
    return out
