"""Solvers for the constrained problem ``min R_p(x)  s.t.  ||F x - y|| <= beta``.

The convex case (``p >= 1``) follows a Tikhonov path: accelerated
proximal-gradient solves of ``||F x - y||**2 + alpha * R_p(x)`` combined
with a bisection on ``alpha`` that matches the achieved misfit to the
radius (discrepancy principle).  For linear operators and convex
regularizers the matched Tikhonov minimizer solves the constrained
problem up to the stated tolerances.

The non-convex case (``0 < p < 1``) runs multistart proximal descent,
each start followed by the same discrepancy bisection, and keeps the best
feasible candidate.  No global optimality is claimed there; small
instances are cross-checked against brute-force oracles in the test
suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (Problem, SolveReport, SolveStatus, feasibility_tolerance,
                   regularizer_value)
from .errors import InvalidInputError

__all__ = ["SolverOptions", "prox_lp", "tikhonov_min", "residual_method_solve",
           "nonconvex_solve"]


@dataclass
class SolverOptions:
    """Tuning knobs for the constrained solvers.

    ``discrepancy_match_tolerance`` is relative to the radius.  ``restarts``
    only matters for ``p < 1``.
    """

    max_outer_bisections: int = 60
    max_inner_iterations: int = 5000
    inner_tolerance: float = 1e-10
    discrepancy_match_tolerance: float = 1e-6
    restarts: int = 16
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_outer_bisections < 1 or self.max_inner_iterations < 1:
            raise InvalidInputError("iteration counts must be >= 1")
        if self.restarts < 1:
            raise InvalidInputError("restarts must be >= 1")
        if self.inner_tolerance <= 0 or self.discrepancy_match_tolerance <= 0:
            raise InvalidInputError("tolerances must be > 0")


# maximum bracket expansions (factors of 10) on the Tikhonov parameter
_BRACKET_STEPS = 40


def prox_lp(v, t, p):
    """Componentwise proximal map of ``u -> t * |u|**p``.

    Returns ``argmin_u 0.5*(u - v)**2 + t*|u|**p`` for each entry of ``v``.
    ``t`` may be a scalar or an array broadcastable against ``v``.  Closed
    forms are used for ``p`` in {1, 1.5, 2}; other exponents in (1, 2) use a
    safeguarded Newton iteration on the stationarity equation, and exponents
    in (0, 1) use the hard-thresholded stationary point, preferring 0 on
    ties.
    """
    p = float(p)
    if not (0.0 < p <= 2.0):
        raise InvalidInputError(f"p must lie in (0, 2], got {p}")
    v = np.asarray(v, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise InvalidInputError("t must be > 0")
    scalar_in = v.ndim == 0
    v = np.atleast_1d(v)
    t_arr = np.broadcast_to(t_arr, v.shape)

    if p == 2.0:
        out = v / (1.0 + 2.0 * t_arr)
    elif p == 1.0:
        out = np.sign(v) * np.maximum(np.abs(v) - t_arr, 0.0)
    else:
        a = np.abs(v)
        if p > 1.0:
            u = _prox_root_convex(a, t_arr, p)
        else:
            u = _prox_root_nonconvex(a, t_arr, p)
        out = np.sign(v) * u

    if scalar_in:
        return float(out[0])
    return out


def _prox_root_convex(a, t, p):
    """Positive root of ``u + t*p*u**(p-1) = a`` for ``p`` in (1, 2)."""
    if p == 1.5:
        # quadratic in sqrt(u)
        s = 0.5 * (-1.5 * t + np.sqrt(2.25 * t * t + 4.0 * a))
        return np.maximum(s, 0.0) ** 2
    c = t * p
    q = p - 1.0
    lo = np.zeros_like(a)
    hi = a.copy()
    u = 0.5 * a
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(80):
            pos = u > 0.0
            uq = np.where(pos, np.abs(u) ** q, 0.0)
            g = u + c * uq - a
            gp = 1.0 + np.where(pos, c * q * np.abs(u) ** (q - 1.0), np.inf)
            hi = np.where(g > 0.0, u, hi)
            lo = np.where(g <= 0.0, u, lo)
            step = np.where(np.isfinite(gp), g / gp, 0.0)
            u_new = u - step
            bad = (u_new <= lo) | (u_new >= hi)
            u_new = np.where(bad, 0.5 * (lo + hi), u_new)
            if np.max(np.abs(u_new - u)) <= 1e-16 * max(1.0, float(np.max(a, initial=0.0))):
                u = u_new
                break
            u = u_new
    return u


def _prox_root_half(a, t):
    """Largest stationary point for p = 1/2 via the cubic in sqrt(u)."""
    # s^3 - a*s + t/2 = 0 with s = sqrt(u); three real roots exist exactly
    # when a stationary point exists, and the largest one is the candidate
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = -0.75 * math.sqrt(3.0) * t / np.maximum(a, 1e-300) ** 1.5
        solvable = (a > 0) & (arg >= -1.0)
        phi = np.arccos(np.clip(arg, -1.0, 1.0)) / 3.0
        s = 2.0 * np.sqrt(np.maximum(a, 0.0) / 3.0) * np.cos(phi)
        u = np.where(solvable, s * s, 0.0)
        obj_root = 0.5 * (u - a) ** 2 + t * np.sqrt(np.maximum(u, 0.0))
    obj_zero = 0.5 * a ** 2
    return np.where(solvable & (obj_root < obj_zero), u, 0.0)


def _prox_root_nonconvex(a, t, p):
    """Hard-thresholded stationary point for ``p`` in (0, 1), ties to zero."""
    if p == 0.5:
        return _prox_root_half(a, t)
    c = t * p
    q = p - 1.0  # in (-1, 0)
    # location of the minimum of g(u) = u + c*u**q
    u_m = (c * (1.0 - p)) ** (1.0 / (2.0 - p))
    with np.errstate(divide="ignore", invalid="ignore"):
        g_min = u_m + c * u_m ** q
    # no stationary point above the dip, or a = 0: prox is 0
    solvable = (a > 0) & (g_min <= a)
    u = np.where(solvable, a, 0.0)
    lo = np.where(solvable, u_m, 0.0)
    hi = np.where(solvable, a, 0.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for _ in range(80):
            pos = u > 0.0
            uq = np.where(pos, np.abs(u) ** q, np.inf)
            g = u + c * uq - a
            gp = 1.0 + np.where(pos, c * q * np.abs(u) ** (q - 1.0), 0.0)
            hi = np.where(solvable & (g > 0.0), u, hi)
            lo = np.where(solvable & (g <= 0.0), u, lo)
            u_new = u - np.where(gp > 0, g / gp, 0.0)
            bad = (u_new <= lo) | (u_new >= hi) | ~np.isfinite(u_new)
            u_new = np.where(bad, 0.5 * (lo + hi), u_new)
            u_new = np.where(solvable, u_new, 0.0)
            if np.max(np.abs(u_new - u)) <= 1e-16 * max(1.0, float(np.max(a, initial=0.0))):
                u = u_new
                break
            u = u_new
        # compare against the objective at zero; zero wins ties
        obj_root = 0.5 * (u - a) ** 2 + t * np.where(u > 0, u ** p, 0.0)
    obj_zero = 0.5 * a ** 2
    return np.where(solvable & (obj_root < obj_zero), u, 0.0)


def gram_spectral_bound(operator, iters=300, tol=1e-12):
    """Largest eigenvalue of ``F^T F`` by power iteration (deterministic start)."""
    n = operator.shape[1]
    v = np.ones(n) + np.linspace(0.0, 1.0, n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = operator.T @ (operator @ v)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(nw - lam) <= tol * max(1.0, nw):
            lam = nw
            break
        lam = nw
    return lam


def _fista(operator, data, alpha, p, x0, L, opts):
    """Accelerated proximal gradient for 0.5*||Fx-y||^2 + (alpha/2)*R_p, p >= 1."""
    x = x0.copy()
    z = x.copy()
    s = 1.0
    t_prox = alpha / (2.0 * L)
    iterations = 0
    converged = False
    for _ in range(opts.max_inner_iterations):
        iterations += 1
        grad = operator.T @ (operator @ z - data)
        x_new = prox_lp(z - grad / L, t_prox, p)
        dx = x_new - x
        # restart momentum when it points against the descent direction
        if float(np.dot(z - x_new, dx)) > 0.0:
            s = 1.0
        s_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * s * s))
        z = x_new + ((s - 1.0) / s_new) * dx
        s = s_new
        if np.linalg.norm(dx) <= opts.inner_tolerance * max(1.0, float(np.linalg.norm(x_new))):
            x = x_new
            converged = True
            break
        x = x_new
    return x, iterations, converged


def _ista_batch(operator, data, X, t_cols, L, p, opts):
    """Proximal descent on each column of ``X`` (its own prox weight), p < 1."""
    X = X.copy()
    k = X.shape[1]
    active = np.ones(k, dtype=bool)
    iterations = 0
    target = data[:, None]
    for _ in range(opts.max_inner_iterations):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        Xa = X[:, idx]
        grad = operator.T @ (operator @ Xa - target)
        X_new = prox_lp(Xa - grad / L, t_cols[idx][None, :], p)
        iterations += idx.size
        change = np.linalg.norm(X_new - Xa, axis=0)
        scale = np.maximum(1.0, np.linalg.norm(X_new, axis=0))
        X[:, idx] = X_new
        done = change <= opts.inner_tolerance * scale
        active[idx[done]] = False
    return X, iterations


def tikhonov_min(operator, data, alpha, p, opts=None, x0=None, L=None):
    """Minimize ``||F x - y||**2 + alpha * R_p(x)``.

    For ``p >= 1`` this is a convex problem solved to the inner tolerance by
    accelerated proximal gradient with step ``1/L``, ``L`` the largest
    eigenvalue of ``F^T F``.  For ``p < 1`` a single proximal-descent run
    from ``x0`` is performed and only a stationary point is returned.
    Non-convergence within the iteration budget yields ``converged=False``
    on the report, not an exception.
    """
    opts = opts or SolverOptions()
    operator = np.asarray(operator, dtype=float)
    data = np.asarray(data, dtype=float)
    alpha = float(alpha)
    if alpha <= 0:
        raise InvalidInputError(f"alpha must be > 0, got {alpha}")
    p = float(p)
    if not (0.0 < p <= 2.0):
        raise InvalidInputError(f"p must lie in (0, 2], got {p}")
    if L is None:
        L = gram_spectral_bound(operator) * 1.02
    if L <= 0:
        L = 1.0
    if x0 is None:
        x0 = np.zeros(operator.shape[1])
    if p >= 1.0:
        x, iterations, converged = _fista(operator, data, alpha, p, x0, L, opts)
    else:
        X, iterations = _ista_batch(operator, data, x0.reshape(-1, 1),
                                    np.array([alpha / (2.0 * L)]), L, p, opts)
        x = X[:, 0]
        converged = iterations < opts.max_inner_iterations
    return SolveReport(
        x=x,
        objective=regularizer_value(x, p),
        discrepancy=float(np.linalg.norm(operator @ x - data)),
        alpha=alpha,
        status=SolveStatus.INTERIOR_MINIMUM,
        iterations=iterations,
        converged=converged,
    )


def _zero_report(problem, norm_y):
    return SolveReport(
        x=np.zeros(problem.n),
        objective=0.0,
        discrepancy=norm_y,
        alpha=None,
        status=SolveStatus.ZERO_FEASIBLE,
        iterations=0,
    )


def _least_squares(problem):
    x_ls, *_ = np.linalg.lstsq(problem.operator, problem.data, rcond=None)
    r_min = float(np.linalg.norm(problem.operator @ x_ls - problem.data))
    return x_ls, r_min


def _infeasible_report(problem, x_ls, r_min):
    return SolveReport(
        x=x_ls,
        objective=regularizer_value(x_ls, problem.p),
        discrepancy=r_min,
        alpha=None,
        status=SolveStatus.INFEASIBLE,
        iterations=0,
    )


def _equality_constrained_min(problem, opts, x_ls, L):
    """beta = 0 with a consistent system: minimize R_p over {x : F x = y}.

    Convex exponents use Douglas-Rachford splitting between the regularizer
    prox and the exact projection onto the affine solution set (computed
    from the pseudoinverse, i.e. an explicit row-space/null-space split).
    """
    F, y, p = problem.operator, problem.data, problem.p
    pinv = np.linalg.pinv(F)

    def project(x):
        return x - pinv @ (F @ x - y)

    t = 0.1 * (1.0 + float(np.max(np.abs(x_ls), initial=0.0)))
    z = x_ls.copy()
    x = project(z)
    iterations = 0
    converged = False
    for _ in range(opts.max_inner_iterations):
        iterations += 1
        x_new = prox_lp(z, t, p)
        w = project(2.0 * x_new - z)
        z = z + w - x_new
        if np.linalg.norm(x_new - x) <= opts.inner_tolerance * max(1.0, float(np.linalg.norm(x_new))):
            x = x_new
            converged = True
            break
        x = x_new
    x = project(x)
    return SolveReport(
        x=x,
        objective=regularizer_value(x, p),
        discrepancy=float(np.linalg.norm(F @ x - y)),
        alpha=None,
        status=SolveStatus.CONSTRAINT_ACTIVE,
        iterations=iterations,
        converged=converged,
    )


def residual_method_solve(problem, opts=None):
    """Solve the constrained problem via the discrepancy-matched Tikhonov path.

    Returns a report with status

    * ``ZeroFeasible`` when ``||y|| <= beta`` (then ``x = 0`` is optimal),
    * ``ConstraintActive`` when the Tikhonov parameter was matched so the
      misfit equals ``beta`` within the relative match tolerance,
    * ``InteriorMinimum`` when the match tolerance could not be met and the
      returned feasible iterate sits strictly inside the constraint,
    * ``Infeasible`` when ``beta`` lies below the least-squares residual
      (the witness is returned as the iterate).

    For ``p < 1`` the solve is delegated to :func:`nonconvex_solve`.
    """
    opts = opts or SolverOptions()
    tol_feas = feasibility_tolerance(problem)
    norm_y = float(np.linalg.norm(problem.data))
    if norm_y <= problem.beta:
        return _zero_report(problem, norm_y)
    if problem.p < 1.0:
        return nonconvex_solve(problem, opts)

    x_ls, r_min = _least_squares(problem)
    if problem.beta < r_min - tol_feas:
        return _infeasible_report(problem, x_ls, r_min)
    L = gram_spectral_bound(problem.operator) * 1.02
    if L <= 0:
        return _infeasible_report(problem, x_ls, r_min)
    if problem.beta == 0.0:
        return _equality_constrained_min(problem, opts, x_ls, L)

    beta = problem.beta
    tol_match = opts.discrepancy_match_tolerance * beta
    path = []
    total_iters = 0
    warm = np.zeros(problem.n)
    best = None  # feasible-side report closest to the boundary

    def evaluate(alpha):
        nonlocal total_iters, warm, best
        rep = tikhonov_min(problem.operator, problem.data, alpha, problem.p,
                           opts=opts, x0=warm, L=L)
        total_iters += rep.iterations
        warm = rep.x
        path.append((alpha, rep.discrepancy))
        if rep.discrepancy <= beta * (1.0 + opts.discrepancy_match_tolerance):
            if best is None or abs(rep.discrepancy - beta) < abs(best.discrepancy - beta):
                best = rep
        return rep

    alpha = 1.0
    rep = evaluate(alpha)
    lo = hi = None
    if abs(rep.discrepancy - beta) > tol_match:
        if rep.discrepancy > beta:
            for _ in range(_BRACKET_STEPS):
                hi = alpha
                alpha /= 10.0
                rep = evaluate(alpha)
                if abs(rep.discrepancy - beta) <= tol_match:
                    break
                if rep.discrepancy <= beta:
                    lo = alpha
                    break
        else:
            for _ in range(_BRACKET_STEPS):
                lo = alpha
                alpha *= 10.0
                rep = evaluate(alpha)
                if abs(rep.discrepancy - beta) <= tol_match:
                    break
                if rep.discrepancy >= beta:
                    hi = alpha
                    break
    if abs(rep.discrepancy - beta) > tol_match and lo is not None and hi is not None:
        for _ in range(opts.max_outer_bisections):
            alpha = math.sqrt(lo * hi)
            rep = evaluate(alpha)
            if abs(rep.discrepancy - beta) <= tol_match:
                break
            if rep.discrepancy > beta:
                hi = alpha
            else:
                lo = alpha

    matched = abs(rep.discrepancy - beta) <= tol_match
    final = rep if matched else best
    if final is None:
        # never reached the feasible side; beta sits in the tolerance band
        # around the least-squares residual
        if r_min <= beta + tol_feas:
            final, matched = rep, False
        else:
            return _infeasible_report(problem, x_ls, r_min)
    status = SolveStatus.CONSTRAINT_ACTIVE if matched else SolveStatus.INTERIOR_MINIMUM
    return SolveReport(
        x=final.x,
        objective=final.objective,
        discrepancy=final.discrepancy,
        alpha=final.alpha,
        status=status,
        iterations=total_iters,
        converged=matched,
        path=path,
    )


def _nonconvex_starts(problem, x_ls, opts):
    """Start matrix: least squares, zero perturbations, random sparse points."""
    n = problem.n
    rng = np.random.default_rng(opts.rng_seed)
    cols = [x_ls]
    n_zero = (opts.restarts - 1) // 2
    scale = 1e-2 * (1.0 + float(np.max(np.abs(x_ls), initial=0.0)))
    for _ in range(n_zero):
        cols.append(scale * rng.standard_normal(n))
    mag = max(1.0, float(np.max(np.abs(x_ls), initial=0.0)))
    k_max = max(2, min(problem.m, n) // 4)
    while len(cols) < opts.restarts:
        k = int(rng.integers(1, k_max + 1))
        idx = rng.choice(n, size=k, replace=False)
        x = np.zeros(n)
        x[idx] = rng.uniform(0.5, 1.5, size=k) * rng.choice([-1.0, 1.0], size=k) * mag
        cols.append(x)
    return np.stack(cols[:opts.restarts], axis=1)


class _PathState:
    """Per-start continuation/bisection state for the non-convex path."""

    __slots__ = ("phase", "rung", "alpha", "lo", "hi", "x_lo", "bisections",
                 "candidate")

    def __init__(self):
        self.phase = "ladder"
        self.rung = 0
        self.alpha = _LADDER_LO
        self.lo = None
        self.hi = None
        self.x_lo = None
        self.bisections = 0
        self.candidate = None  # (gap, x, d, alpha)


# geometric continuation ladder on the Tikhonov parameter
_LADDER_LO = 1e-12
_LADDER_RATIO = math.sqrt(10.0)
_LADDER_RUNGS = 49  # 1e-12 ... 1e12 in half-decade steps


def nonconvex_solve(problem, opts=None):
    """Multistart proximal descent for ``0 < p < 1``.

    The discrepancy of a proximal-descent stationary point is not a
    well-behaved function of the Tikhonov parameter, so each restart walks
    a geometric continuation ladder in ``alpha`` (warm-starting from the
    previous rung, which keeps the iterate on its solution branch) until
    the misfit crosses the radius, and then bisects inside the crossing
    interval, always descending from the branch-side iterate.  The best
    feasible candidate by regularizer value wins, with lexicographic
    tie-breaking.  Stationary points only; no global claim.
    """
    opts = opts or SolverOptions()
    if not (0.0 < problem.p < 1.0):
        raise InvalidInputError(f"nonconvex_solve requires p in (0, 1), got {problem.p}")
    tol_feas = feasibility_tolerance(problem)
    norm_y = float(np.linalg.norm(problem.data))
    if norm_y <= problem.beta:
        return _zero_report(problem, norm_y)
    x_ls, r_min = _least_squares(problem)
    if problem.beta < r_min - tol_feas:
        return _infeasible_report(problem, x_ls, r_min)
    L = gram_spectral_bound(problem.operator) * 1.02
    if L <= 0:
        return _infeasible_report(problem, x_ls, r_min)

    beta = problem.beta
    feas_cap = beta * (1.0 + opts.discrepancy_match_tolerance)
    tol_match = opts.discrepancy_match_tolerance * beta
    starts = _nonconvex_starts(problem, x_ls, opts)
    k = starts.shape[1]

    if beta == 0.0:
        return _nonconvex_equality(problem, opts, starts, L, x_ls)

    states = [_PathState() for _ in range(k)]
    X = starts.copy()  # current warm iterate per column
    total_iters = 0
    rounds_cap = _LADDER_RUNGS + opts.max_outer_bisections + 2
    for _ in range(rounds_cap):
        active = [i for i, s in enumerate(states) if s.phase not in ("done", "failed")]
        if not active:
            break
        idx = np.array(active)
        alphas = np.array([states[i].alpha for i in active])
        X_sub, iters = _ista_batch(problem.operator, problem.data, X[:, idx],
                                   alphas / (2.0 * L), L, problem.p, opts)
        total_iters += iters
        d = np.linalg.norm(problem.operator @ X_sub - problem.data[:, None], axis=0)
        for j, i in enumerate(active):
            st = states[i]
            xi = X_sub[:, j]
            di = float(d[j])
            gap = abs(di - beta)
            if di <= feas_cap and (st.candidate is None or gap < st.candidate[0]):
                st.candidate = (gap, xi.copy(), di, st.alpha)
            if gap <= tol_match:
                st.phase = "done"
                continue
            if st.phase == "ladder":
                if di < beta:
                    st.x_lo = xi.copy()
                    st.lo = st.alpha
                    st.rung += 1
                    if st.rung >= _LADDER_RUNGS:
                        st.phase = "done" if st.candidate is not None else "failed"
                        continue
                    st.alpha *= _LADDER_RATIO
                    X[:, i] = xi  # warm continuation along the branch
                elif st.lo is None:
                    # misfit already above the radius at the smallest alpha
                    st.phase = "failed"
                else:
                    st.hi = st.alpha
                    st.phase = "bisect"
                    st.alpha = math.sqrt(st.lo * st.hi)
                    X[:, i] = st.x_lo
            else:  # bisect, always descending from the branch-side iterate
                if di < beta:
                    st.lo = st.alpha
                    st.x_lo = xi.copy()
                else:
                    st.hi = st.alpha
                st.bisections += 1
                if st.bisections >= opts.max_outer_bisections:
                    st.phase = "done" if st.candidate is not None else "failed"
                    continue
                st.alpha = math.sqrt(st.lo * st.hi)
                X[:, i] = st.x_lo

    best = None
    for st in states:
        if st.candidate is None:
            continue
        _, x, di, alpha = st.candidate
        obj = regularizer_value(x, problem.p)
        entry = (obj, x, di, alpha)
        if best is None or obj < best[0] - 1e-12:
            best = entry
        elif abs(obj - best[0]) <= 1e-12 and tuple(x) < tuple(best[1]):
            best = entry
    if best is None:
        if r_min <= beta + tol_feas:
            # the least-squares witness itself is feasible
            return SolveReport(x=x_ls, objective=regularizer_value(x_ls, problem.p),
                               discrepancy=r_min, alpha=None,
                               status=SolveStatus.INTERIOR_MINIMUM,
                               iterations=total_iters, restarts_used=k,
                               converged=False)
        return _infeasible_report(problem, x_ls, r_min)
    obj, x, di, alpha = best
    matched = abs(di - beta) <= tol_match
    return SolveReport(
        x=x,
        objective=obj,
        discrepancy=di,
        alpha=alpha,
        status=SolveStatus.CONSTRAINT_ACTIVE if matched else SolveStatus.INTERIOR_MINIMUM,
        iterations=total_iters,
        restarts_used=k,
        converged=matched,
    )


def _nonconvex_equality(problem, opts, X, L, x_ls):
    """beta = 0 for p < 1: projected proximal descent per start (heuristic)."""
    F, y, p = problem.operator, problem.data, problem.p
    pinv = np.linalg.pinv(F)
    tol_feas = feasibility_tolerance(problem)
    t = 0.1 / L
    best = None
    total = 0
    for j in range(X.shape[1]):
        x = X[:, j].copy()
        for _ in range(opts.max_inner_iterations):
            total += 1
            x_new = prox_lp(x, t, p)
            x_new = x_new - pinv @ (F @ x_new - y)
            if np.linalg.norm(x_new - x) <= opts.inner_tolerance * max(1.0, float(np.linalg.norm(x_new))):
                x = x_new
                break
            x = x_new
        d = float(np.linalg.norm(F @ x - y))
        if d > tol_feas:
            continue
        obj = regularizer_value(x, p)
        if best is None or obj < best[0] - 1e-12 or (
                abs(obj - best[0]) <= 1e-12 and tuple(x) < tuple(best[1])):
            best = (obj, x, d)
    if best is None:
        x_ls2, r_min = _least_squares(problem)
        return _infeasible_report(problem, x_ls2, r_min)
    obj, x, d = best
    return SolveReport(
        x=x,
        objective=obj,
        discrepancy=d,
        alpha=None,
        status=SolveStatus.CONSTRAINT_ACTIVE,
        iterations=total,
        restarts_used=X.shape[1],
    )
