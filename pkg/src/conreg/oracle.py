"""Brute-force reference solvers for tiny instances.

These are exhaustive grid scans used as ground truth in the test suites.
They are deliberately solver-independent: feasibility is checked pointwise
with a slack proportional to the final grid resolution, which biases the
reported objective slightly low, so a correct solver never beats the
oracle by more than discretization noise.
"""

from __future__ import annotations

import itertools

import numpy as np

from .core import (Problem, SolveReport, SolveStatus, feasibility_tolerance,
                   regularizer_value)
from .errors import InvalidInputError, SizeError

__all__ = ["grid_search_solve", "support_enumeration_solve"]

_MAX_POINTS = 10 ** 8
_CHUNK = 200_000


def _scan(problem, lows, highs, resolution, slack):
    """Best feasible grid point over the box, or None."""
    F, y, beta, p = problem.operator, problem.data, problem.beta, problem.p
    counts = [int(np.floor((hi - lo) / resolution)) + 1 for lo, hi in zip(lows, highs)]
    total = int(np.prod(counts, dtype=np.int64))
    if total > _MAX_POINTS:
        raise SizeError(f"grid of {total} points exceeds the {_MAX_POINTS} cap")
    best = None  # (objective, x, discrepancy)
    for start in range(0, total, _CHUNK):
        ids = np.arange(start, min(start + _CHUNK, total))
        coords = np.empty((ids.size, len(counts)))
        rem = ids
        for dim in range(len(counts) - 1, -1, -1):
            rem, col = np.divmod(rem, counts[dim])
            coords[:, dim] = lows[dim] + col * resolution
        misfit = np.linalg.norm(coords @ F.T - y, axis=1)
        feas = misfit <= beta + slack
        if not np.any(feas):
            continue
        objs = np.sum(np.abs(coords[feas]) ** p, axis=1)
        j = int(np.argmin(objs))
        cand = (float(objs[j]), coords[feas][j].copy(), float(misfit[feas][j]))
        if best is None or cand[0] < best[0]:
            best = cand
    return best


def grid_search_solve(problem, bounds=None, resolution=1e-3, refinements=2,
                      slack_factor=2.0):
    """Exhaustive box scan for problems with at most 3 unknowns.

    Scans the box at the given resolution, then runs ``refinements``
    passes that shrink the window around the incumbent and divide the
    resolution by 10.  ``bounds`` is a list of per-dimension ``(lo, hi)``
    pairs; by default a symmetric box around zero containing the
    least-squares solution with margin.  A grid implying more than 1e8
    points raises :class:`SizeError`.
    """
    if problem.n > 3:
        raise SizeError(f"grid search supports n <= 3, got n = {problem.n}")
    norm_y = float(np.linalg.norm(problem.data))
    if norm_y <= problem.beta:
        return SolveReport(x=np.zeros(problem.n), objective=0.0, discrepancy=norm_y,
                           alpha=None, status=SolveStatus.ZERO_FEASIBLE, iterations=0)
    if bounds is None:
        x_ls, *_ = np.linalg.lstsq(problem.operator, problem.data, rcond=None)
        half = 2.0 * (float(np.max(np.abs(x_ls), initial=0.0)) + 1.0)
        bounds = [(-half, half)] * problem.n
    lows = [float(lo) for lo, _ in bounds]
    highs = [float(hi) for _, hi in bounds]
    if any(hi <= lo for lo, hi in zip(lows, highs)):
        raise InvalidInputError("bounds must satisfy lo < hi")

    op_scale = max(1.0, float(np.linalg.norm(problem.operator, 2)))
    res = float(resolution)
    best = None
    points = 0
    for level in range(refinements + 1):
        slack = max(slack_factor * res * op_scale, feasibility_tolerance(problem))
        found = _scan(problem, lows, highs, res, slack)
        if found is not None and (best is None or found[0] <= best[0]):
            best = found
        if best is None:
            # nothing feasible at this slack; a finer pass cannot help
            break
        center = best[1]
        lows = [c - 2.0 * res for c in center]
        highs = [c + 2.0 * res for c in center]
        res /= 10.0
        points += 1
    if best is None:
        x_ls, *_ = np.linalg.lstsq(problem.operator, problem.data, rcond=None)
        r_min = float(np.linalg.norm(problem.operator @ x_ls - problem.data))
        return SolveReport(x=x_ls, objective=regularizer_value(x_ls, problem.p),
                           discrepancy=r_min, alpha=None,
                           status=SolveStatus.INFEASIBLE, iterations=points)
    obj, x, d = best
    boundary = abs(d - problem.beta) <= max(1e-6 * problem.beta, 10.0 * res * op_scale)
    status = SolveStatus.CONSTRAINT_ACTIVE if boundary else SolveStatus.INTERIOR_MINIMUM
    return SolveReport(x=x, objective=obj, discrepancy=d, alpha=None,
                       status=status, iterations=points)


def support_enumeration_solve(problem, max_support, resolution=1e-3, refinements=2):
    """Exhaustive sparse oracle: scan every support of size <= ``max_support``.

    For each candidate support the restricted problem (at most 3 unknowns)
    is handed to :func:`grid_search_solve`; the embedded minimizer with the
    smallest regularizer value wins, ties broken lexicographically.
    """
    if problem.n > 12:
        raise SizeError(f"support enumeration supports n <= 12, got n = {problem.n}")
    if max_support > 3:
        raise SizeError(f"max_support must be <= 3, got {max_support}")
    if max_support < 0:
        raise InvalidInputError("max_support must be >= 0")
    tol = feasibility_tolerance(problem)
    norm_y = float(np.linalg.norm(problem.data))
    if norm_y <= problem.beta + tol:
        status = SolveStatus.ZERO_FEASIBLE if norm_y <= problem.beta else SolveStatus.CONSTRAINT_ACTIVE
        return SolveReport(x=np.zeros(problem.n), objective=0.0, discrepancy=norm_y,
                           alpha=None, status=status, iterations=0)
    if max_support == 0:
        x_ls, *_ = np.linalg.lstsq(problem.operator, problem.data, rcond=None)
        return _infeasible(problem, x_ls)

    best = None  # (objective, x, discrepancy, status)
    for size in range(1, max_support + 1):
        for support in itertools.combinations(range(problem.n), size):
            sub = Problem(problem.operator[:, support], problem.data,
                          problem.beta, problem.p)
            rep = grid_search_solve(sub, resolution=resolution, refinements=refinements)
            if rep.status is SolveStatus.INFEASIBLE:
                continue
            x = np.zeros(problem.n)
            x[list(support)] = rep.x
            entry = (rep.objective, x, rep.discrepancy, rep.status)
            if best is None or entry[0] < best[0] - 1e-15 or (
                    abs(entry[0] - best[0]) <= 1e-15 and tuple(x) < tuple(best[1])):
                best = entry
    if best is None:
        x_ls, *_ = np.linalg.lstsq(problem.operator, problem.data, rcond=None)
        return _infeasible(problem, x_ls)
    obj, x, d, status = best
    return SolveReport(x=x, objective=obj, discrepancy=d, alpha=None,
                       status=status, iterations=0)


def _infeasible(problem, x_ls):
    r_min = float(np.linalg.norm(problem.operator @ x_ls - problem.data))
    return SolveReport(x=x_ls, objective=regularizer_value(x_ls, problem.p),
                       discrepancy=r_min, alpha=None,
                       status=SolveStatus.INFEASIBLE, iterations=0)
