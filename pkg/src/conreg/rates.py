"""Convergence-rate experiments: instance construction, sweeps, slope fits.

Instances are built so that the premises of the quantitative error
estimates hold by construction: a Gaussian operator, a reference point
whose subgradient is exactly representable through the adjoint (convex
exponents), or a sparse reference with the support submatrix verifiably
injective (non-convex exponents).  Sweeping the radius over a geometric
grid and regressing log-error on log-radius then reproduces the predicted
exponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bregman import SourceCertificate, bregman_distance, gamma_from_eta, subgradient_lp
from .core import Problem, SolveStatus, regularizer_value
from .errors import ConstructionFailedError, InsufficientDataError, InvalidInputError
from .io import format_float
from .solvers import SolverOptions, residual_method_solve

__all__ = ["RateInstanceSpec", "RateInstance", "RateRow", "RateTable",
           "build_rate_instance", "run_rate_experiment", "fit_loglog_slope",
           "expected_rate", "default_beta_grid"]

_RETRY_BUDGET = 20
_OFF_SUPPORT_MARGIN = 1e-3
_MIN_SUPPORT_SINGULAR = 1e-6


@dataclass
class RateInstanceSpec:
    """Shape and law of a synthetic rate instance."""

    m: int
    n: int
    p: float
    sparsity: int = 0
    operator_model: str = "GaussianIID"
    rng_seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise InvalidInputError("m and n must be >= 1")
        if not (0.0 < self.p <= 2.0):
            raise InvalidInputError(f"p must lie in (0, 2], got {self.p}")
        if self.sparsity < 0 or self.sparsity > self.n:
            raise InvalidInputError("sparsity must lie in [0, n]")
        if self.sparsity > 0 and self.m < self.sparsity:
            raise InvalidInputError(
                "m >= sparsity is required for injectivity on the support")
        if self.operator_model != "GaussianIID":
            raise InvalidInputError(f"unknown operator model {self.operator_model!r}")


@dataclass
class RateInstance:
    operator: np.ndarray
    x_dagger: np.ndarray
    certificate: SourceCertificate | None
    spec: RateInstanceSpec


@dataclass
class RateRow:
    beta: float
    seed: int
    err_l2: float
    err_lp: float
    bregman: float | None
    discrepancy: float
    objective_gap: float


@dataclass
class RateTable:
    rows: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    def __post_init__(self):
        for row in self.rows:
            if row.beta <= 0:
                raise InvalidInputError("rate rows require beta > 0")
            if row.err_l2 < 0 or row.err_lp < 0:
                raise InvalidInputError("error columns must be >= 0")

    def column(self, name):
        vals = [getattr(r, name) for r in self.rows]
        return np.array([math.nan if v is None else v for v in vals])

    def to_csv(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write("beta,seed,err_l2,err_lp,bregman,discrepancy,objective_gap\n")
            for r in self.rows:
                breg = "" if r.bregman is None else format_float(r.bregman)
                fh.write(",".join([
                    format_float(r.beta), str(r.seed), format_float(r.err_l2),
                    format_float(r.err_lp), breg, format_float(r.discrepancy),
                    format_float(r.objective_gap)]) + "\n")


def default_beta_grid(lo=1e-4, hi=1e-1, num=9):
    """Geometric radius grid used by the experiments."""
    if num < 1:
        raise InvalidInputError("num must be >= 1")
    return np.geomspace(lo, hi, num)


def _invert_subgradient(xi, p):
    """Reference point whose R_p subgradient equals ``xi`` (p > 1)."""
    return np.sign(xi) * (np.abs(xi) / p) ** (1.0 / (p - 1.0))


def _try_build(spec, seed):
    rng = np.random.default_rng(seed)
    m, n, p, s = spec.m, spec.n, spec.p, spec.sparsity
    F = rng.standard_normal((m, n)) / math.sqrt(m)
    omega = rng.standard_normal(m)

    if p > 1.0 and s == 0:
        xi = F.T @ omega
        x_dagger = _invert_subgradient(xi, p)
        return F, x_dagger, omega, xi

    if p > 1.0:
        xi0 = F.T @ omega
        support = np.sort(np.argsort(-np.abs(xi0))[:s])
        off = np.setdiff1d(np.arange(n), support)
        # A subgradient of R_p at a sparse point vanishes off the support,
        # which no reweighting of omega alone can achieve for a wide
        # Gaussian matrix; instead the off-support columns are projected
        # orthogonal to omega, leaving the on-support fit untouched.
        w2 = float(np.dot(omega, omega))
        F = F.copy()
        F[:, off] -= np.outer(omega, omega @ F[:, off]) / w2
        if _support_singular(F, support) <= _MIN_SUPPORT_SINGULAR:
            return None
        xi = np.zeros(n)
        xi[support] = xi0[support]
        x_dagger = np.zeros(n)
        x_dagger[support] = _invert_subgradient(xi0[support], p)
        return F, x_dagger, omega, xi

    if p == 1.0:
        support = np.sort(rng.choice(n, size=s, replace=False))
        signs = rng.choice([-1.0, 1.0], size=s)
        omega, *_ = np.linalg.lstsq(F[:, support].T, signs, rcond=None)
        xi = F.T @ omega
        if np.max(np.abs(xi[support] - signs)) > 1e-9:
            return None
        off = np.setdiff1d(np.arange(n), support)
        if off.size and np.max(np.abs(xi[off])) >= 1.0 - _OFF_SUPPORT_MARGIN:
            return None
        if _support_singular(F, support) <= _MIN_SUPPORT_SINGULAR:
            return None
        x_dagger = np.zeros(n)
        x_dagger[support] = signs * rng.uniform(0.5, 2.0, size=s)
        return F, x_dagger, omega, xi

    # p < 1: sparse reference, injectivity on the support; no certificate
    support = np.sort(rng.choice(n, size=s, replace=False))
    if _support_singular(F, support) <= _MIN_SUPPORT_SINGULAR:
        return None
    x_dagger = np.zeros(n)
    x_dagger[support] = rng.choice([-1.0, 1.0], size=s) * rng.uniform(0.5, 2.0, size=s)
    return F, x_dagger, None, None


def _support_singular(F, support):
    return float(np.linalg.svd(F[:, support], compute_uv=False)[-1])


def build_rate_instance(spec):
    """Draw an instance satisfying the rate premises for its exponent.

    The operator is i.i.d. Gaussian scaled by ``1/sqrt(m)``.  For convex
    exponents the certificate is exact by construction; for ``p < 1`` the
    certificate is not populated and only injectivity on the support is
    enforced.  Construction retries with reseeded draws and raises
    :class:`ConstructionFailedError` once the budget is exhausted.
    """
    if spec.p < 1.0 and spec.sparsity == 0:
        raise InvalidInputError("p < 1 instances require a sparse reference point")
    for attempt in range(_RETRY_BUDGET):
        built = _try_build(spec, spec.rng_seed + 1000 * attempt)
        if built is None:
            continue
        F, x_dagger, omega, xi = built
        if omega is None:
            return RateInstance(F, x_dagger, None, spec)
        fit_residual = float(np.linalg.norm(F.T @ omega - xi))
        eta1, eta2 = 0.0, float(np.linalg.norm(omega))
        g1, g2 = gamma_from_eta(eta1, eta2)
        cert = SourceCertificate(xi=xi, omega=omega, fit_residual=fit_residual,
                                 gamma1=g1, gamma2=g2, eta1=eta1, eta2=eta2)
        return RateInstance(F, x_dagger, cert, spec)
    raise ConstructionFailedError(
        f"no valid instance after {_RETRY_BUDGET} reseeded attempts for {spec}")


def run_rate_experiment(instance, beta_grid, seeds_per_beta, opts=None,
                        noise_scale_range=(0.5, 1.0)):
    """Sweep the radius, solving one noisy problem per (beta, seed) cell.

    Noise is drawn strictly inside the radius ball: a uniform direction on
    the sphere scaled by ``beta`` times a uniform draw from
    ``noise_scale_range``, so the reference point is always feasible.
    Cells are assembled in deterministic (beta index, seed) order.
    """
    opts = opts or SolverOptions()
    F, x_dagger = instance.operator, instance.x_dagger
    p = instance.spec.p
    y_exact = F @ x_dagger
    r_dagger = regularizer_value(x_dagger, p)
    rows, diagnostics = [], []
    for b_idx, beta in enumerate(beta_grid):
        beta = float(beta)
        if beta <= 0:
            raise InvalidInputError("beta grid entries must be > 0")
        for seed in range(seeds_per_beta):
            rng = np.random.default_rng([instance.spec.rng_seed, b_idx, seed, 7919])
            direction = rng.standard_normal(F.shape[0])
            direction /= np.linalg.norm(direction)
            scale = rng.uniform(*noise_scale_range)
            y = y_exact + beta * scale * direction
            assert np.linalg.norm(y - y_exact) <= beta * (1 + 1e-12)
            report = residual_method_solve(Problem(F, y, beta, p), opts)
            if report.status is SolveStatus.INFEASIBLE:
                diagnostics.append((beta, seed, "infeasible cell"))
                continue
            dx = report.x - x_dagger
            breg = None
            if instance.certificate is not None:
                breg = bregman_distance(report.x, x_dagger, instance.certificate.xi, p)
            rows.append(RateRow(
                beta=beta, seed=seed,
                err_l2=float(np.linalg.norm(dx)),
                err_lp=float(np.sum(np.abs(dx) ** p) ** (1.0 / p)),
                bregman=breg,
                discrepancy=report.discrepancy,
                objective_gap=report.objective - r_dagger,
            ))
    return RateTable(rows=rows, diagnostics=diagnostics)


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    r_squared: float
    dropped: int


def fit_loglog_slope(table, column):
    """Least-squares slope of log(median over seeds) against log(beta).

    Nonpositive medians are dropped (their count is reported); fewer than
    three usable radii raise :class:`InsufficientDataError`.
    """
    if column not in ("err_l2", "err_lp", "bregman", "discrepancy", "objective_gap"):
        raise InvalidInputError(f"unknown column {column!r}")
    betas = np.array([r.beta for r in table.rows])
    vals = table.column(column)
    uniq = np.unique(betas)
    med = []
    dropped = 0
    for b in uniq:
        v = float(np.median(vals[betas == b]))
        if not math.isfinite(v) or v <= 0:
            dropped += 1
            continue
        med.append((b, v))
    if len(med) < 3:
        raise InsufficientDataError(
            f"need >= 3 usable beta points, have {len(med)} ({dropped} dropped)")
    lx = np.log(np.array([b for b, _ in med]))
    ly = np.log(np.array([v for _, v in med]))
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    resid = ly - A @ coef
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return SlopeFit(slope=slope, intercept=intercept, r_squared=r_squared,
                    dropped=dropped)


def expected_rate(p, sparse, norm):
    """Predicted error exponent in the radius, per the rate table.

    Dense references with ``p`` in (1, 2] decay like ``beta**0.5`` in both
    the l2 and lp norms; sparse references give ``beta**(1/p)`` in l2 for
    ``p`` in [1, 2) and ``beta**1`` for ``p`` in (0, 1).
    """
    p = float(p)
    if norm not in ("l2", "lp"):
        raise InvalidInputError(f"norm must be 'l2' or 'lp', got {norm!r}")
    if not sparse:
        if 1.0 < p <= 2.0:
            return 0.5
    else:
        if norm == "l2" and 1.0 <= p < 2.0:
            return 1.0 / p
        if norm == "l2" and 0.0 < p < 1.0:
            return 1.0
    raise InvalidInputError(
        "unsupported combination; known rows: dense p in (1,2] -> 0.5 (l2 or lp), "
        "sparse p in [1,2) -> 1/p (l2), sparse p in (0,1) -> 1.0 (l2)")
