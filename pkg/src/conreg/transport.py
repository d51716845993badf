"""One-dimensional optimal transport and entropy-regularized density fitting.

Discrete measures on the line admit exact Wasserstein distances through
their quantile functions: the monotone coupling is optimal, so the
distance is a sum over merged cumulative-weight segments.  The density
estimator minimizes the Boltzmann-Shannon entropy subject to a
1-Wasserstein ball around the binned empirical measure, solved by
entropic mirror descent with a penalty weight tuned to activate the
constraint.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, SizeError, UnsupportedExponentError
from .io import format_float

__all__ = ["DiscreteMeasure", "GridDensity", "wasserstein_discrete",
           "wasserstein_oracle_permutation", "empirical_measure", "entropy",
           "density_estimate", "wp_convexity_check", "DensityOptions"]

_WEIGHT_TOL = 1e-12


@dataclass
class DiscreteMeasure:
    """Probability measure with finitely many atoms on the line.

    Atoms are strictly increasing and deduplicated; weights are positive
    and sum to one.
    """

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.atoms = np.asarray(self.atoms, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.atoms.ndim != 1 or self.weights.ndim != 1:
            raise InvalidInputError("atoms and weights must be one-dimensional")
        if self.atoms.size == 0:
            raise InvalidInputError("a measure needs at least one atom")
        if self.atoms.size != self.weights.size:
            raise InvalidInputError("atoms and weights must have equal length")
        if not (np.all(np.isfinite(self.atoms)) and np.all(np.isfinite(self.weights))):
            raise InvalidInputError("atoms and weights must be finite")
        if np.any(np.diff(self.atoms) <= 0):
            raise InvalidInputError("atoms must be strictly increasing")
        if np.any(self.weights <= 0):
            raise InvalidInputError("weights must be positive")
        if abs(float(self.weights.sum()) - 1.0) > _WEIGHT_TOL:
            raise InvalidInputError("weights must sum to 1")

    @classmethod
    def from_atoms(cls, locations, weights):
        """Sort and merge duplicate locations, summing their weights."""
        locations = np.asarray(locations, dtype=float)
        weights = np.asarray(weights, dtype=float)
        order = np.argsort(locations, kind="stable")
        locations, weights = locations[order], weights[order]
        uniq, inverse = np.unique(locations, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inverse, weights)
        return cls(atoms=uniq, weights=merged)


@dataclass
class GridDensity:
    """Nonnegative piecewise-constant density on a uniform grid.

    ``values[i]`` is the density on cell ``[a + i*h, a + (i+1)*h)`` with
    ``h = (b - a) / cells``; the cell masses sum to one.
    """

    a: float
    b: float
    values: np.ndarray

    def __post_init__(self):
        self.a, self.b = float(self.a), float(self.b)
        self.values = np.asarray(self.values, dtype=float)
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or self.b <= self.a:
            raise InvalidInputError("domain must satisfy a < b")
        if self.values.ndim != 1 or self.values.size < 2:
            raise InvalidInputError("a grid density needs at least 2 cells")
        if not np.all(np.isfinite(self.values)):
            raise InvalidInputError("density values must be finite")
        if np.any(self.values < 0):
            raise InvalidInputError("density values must be nonnegative")
        if abs(float(self.values.sum()) * self.cell_width - 1.0) > 1e-10:
            raise InvalidInputError("cell_width * sum(values) must equal 1")

    @property
    def cells(self):
        return self.values.size

    @property
    def cell_width(self):
        return (self.b - self.a) / self.values.size

    def cell_centers(self):
        h = self.cell_width
        return self.a + h * (np.arange(self.cells) + 0.5)

    def as_measure(self):
        """The density viewed as a discrete measure at the cell centers."""
        mass = self.values * self.cell_width
        keep = mass > 0
        return DiscreteMeasure(atoms=self.cell_centers()[keep], weights=mass[keep])

    def to_csv(self, path):
        h = self.cell_width
        with open(path, "w", newline="\n") as fh:
            fh.write("cell_left,value\n")
            for i, v in enumerate(self.values):
                fh.write(f"{format_float(self.a + i * h)},{format_float(v)}\n")


def wasserstein_discrete(mu, nu, p):
    """Exact p-Wasserstein distance between discrete measures on the line.

    Merged quantile decomposition: both cumulative weight profiles are cut
    at every breakpoint of either measure, and each segment contributes
    ``mass * |x - z|**p`` for its pair of atoms.  Requires ``p >= 1``.
    """
    p = float(p)
    if p < 1.0:
        raise UnsupportedExponentError(f"Wasserstein distance needs p >= 1, got {p}")
    cum_a = np.cumsum(mu.weights)
    cum_b = np.cumsum(nu.weights)
    edges = np.concatenate([[0.0], np.sort(np.concatenate([cum_a[:-1], cum_b[:-1]])), [1.0]])
    masses = np.diff(edges)
    ia = np.minimum(np.searchsorted(cum_a, edges[:-1], side="right"), mu.atoms.size - 1)
    ib = np.minimum(np.searchsorted(cum_b, edges[:-1], side="right"), nu.atoms.size - 1)
    cost = float(np.sum(masses * np.abs(mu.atoms[ia] - nu.atoms[ib]) ** p))
    return cost ** (1.0 / p)


def wasserstein_oracle_permutation(mu, nu, p):
    """Brute-force coupling oracle for small equal-weight measures.

    Minimizes over all assignments of the (at most 8) uniformly weighted
    atoms; exponentially slow by design, used only to certify the quantile
    algorithm.
    """
    p = float(p)
    if p < 1.0:
        raise UnsupportedExponentError(f"Wasserstein distance needs p >= 1, got {p}")
    k = mu.atoms.size
    if k != nu.atoms.size:
        raise InvalidInputError("oracle requires equal atom counts")
    if k > 8:
        raise SizeError(f"permutation oracle supports at most 8 atoms, got {k}")
    uniform = np.full(k, 1.0 / k)
    if (np.max(np.abs(mu.weights - uniform)) > _WEIGHT_TOL
            or np.max(np.abs(nu.weights - uniform)) > _WEIGHT_TOL):
        raise InvalidInputError("oracle requires uniform weights 1/k")
    best = math.inf
    for perm in itertools.permutations(range(k)):
        cost = sum(abs(mu.atoms[i] - nu.atoms[perm[i]]) ** p for i in range(k)) / k
        best = min(best, cost)
    return best ** (1.0 / p)


def empirical_measure(samples):
    """Normalized sum of point masses at the sample locations."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or samples.size == 0:
        raise InvalidInputError("samples must be a nonempty vector")
    if not np.all(np.isfinite(samples)):
        raise InvalidInputError("samples must be finite")
    return DiscreteMeasure.from_atoms(samples, np.full(samples.size, 1.0 / samples.size))


def entropy(u):
    """Boltzmann-Shannon entropy ``sum_i u_i log(u_i) * h`` with 0 log 0 = 0."""
    v = u.values
    pos = v > 0
    return float(np.sum(v[pos] * np.log(v[pos])) * u.cell_width)


@dataclass
class DensityOptions:
    max_iterations: int = 20000
    penalty_rounds: int = 40
    step0: float = 0.1
    w1_match_rel: float = 1e-4


@dataclass
class DensityReport:
    beta: float
    achieved_w1: float
    entropy: float
    penalty: float
    rounds: int
    iterations: int
    status: str  # "interior", "boundary", or "histogram"


def _grid_w1(q, target, h):
    """W_1 between two mass vectors on the same uniform grid."""
    return float(np.sum(np.abs(np.cumsum(q - target))) * h)


def _mirror_descent(q0, target, h, mu, opts):
    """Minimize entropy + mu * W_1 over the simplex by multiplicative updates."""
    q = q0.copy()
    iterations = 0
    for it in range(1, opts.max_iterations + 1):
        iterations += 1
        c = np.cumsum(q - target)
        signs = np.sign(c)
        grad_w1 = h * np.cumsum(signs[::-1])[::-1]
        grad = np.log(np.maximum(q, 1e-300) / h) + 1.0 + mu * grad_w1
        grad -= grad.mean()  # gauge: simplex normalization kills the mean anyway
        step = opts.step0 / math.sqrt(it)
        q_new = q * np.exp(-step * np.clip(grad, -50.0, 50.0))
        q_new /= q_new.sum()
        delta = float(np.abs(q_new - q).sum())
        q = q_new
        if delta < 1e-13:
            break
    return q, iterations


def density_estimate(samples, beta, domain=(0.0, 1.0), cells=64, opts=None):
    """Entropy-minimal density within a W_1 ball of the binned samples.

    The empirical measure is binned onto the grid; the estimate minimizes
    the Boltzmann-Shannon entropy over the density simplex subject to
    ``W_1(u, binned) <= beta`` (grid representation, convex and piecewise
    linear).  A penalty weight is bisected until the constraint is active
    within ``w1_match_rel``, unless the unconstrained entropy minimizer
    (the uniform density) is already feasible.  A final exact blend toward
    the histogram enforces feasibility: ``W_1`` is linear along that path.

    Returns a ``(GridDensity, DensityReport)`` pair.
    """
    opts = opts or DensityOptions()
    a, b = float(domain[0]), float(domain[1])
    if b <= a:
        raise InvalidInputError("domain must satisfy a < b")
    if cells < 2:
        raise InvalidInputError("cells must be >= 2")
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or samples.size == 0:
        raise InvalidInputError("samples must be a nonempty vector")
    if not np.all(np.isfinite(samples)):
        raise InvalidInputError("samples must be finite")
    if np.any(samples < a) or np.any(samples > b):
        raise InvalidInputError("samples must lie within the domain")
    beta = float(beta)
    if beta < 0:
        raise InvalidInputError("beta must be >= 0")

    h = (b - a) / cells
    counts, _ = np.histogram(samples, bins=cells, range=(a, b))
    target = counts / counts.sum()

    if beta == 0.0:
        u = GridDensity(a, b, target / h)
        report = DensityReport(beta=beta, achieved_w1=0.0, entropy=entropy(u),
                               penalty=0.0, rounds=0, iterations=0,
                               status="histogram")
        return u, report

    q_uniform = np.full(cells, 1.0 / cells)
    w1_uniform = _grid_w1(q_uniform, target, h)
    if w1_uniform <= beta:
        u = GridDensity(a, b, q_uniform / h)
        report = DensityReport(beta=beta, achieved_w1=w1_uniform, entropy=entropy(u),
                               penalty=0.0, rounds=0, iterations=0,
                               status="interior")
        return u, report

    cap = beta * (1.0 + opts.w1_match_rel)
    total_iters = 0
    rounds = 0
    best = None  # (entropy_value, q, w1, mu)

    def consider(q, mu):
        nonlocal best
        w1 = _grid_w1(q, target, h)
        if w1 > cap:
            # exact feasibility repair: W_1 is linear under blending toward
            # the histogram, so the blend lands on the boundary exactly
            theta = 1.0 - beta / w1
            q = (1.0 - theta) * q + theta * target
            w1 = _grid_w1(q, target, h)
        ent = float(np.sum(q * np.log(np.maximum(q, 1e-300) / h)))
        if best is None or ent < best[0]:
            best = (ent, q, w1, mu)
        return w1

    q_warm = q_uniform
    mu = 1.0
    lo = hi = None
    q_warm, iters = _mirror_descent(q_warm, target, h, mu, opts)
    total_iters += iters
    rounds += 1
    w1 = _grid_w1(q_warm, target, h)
    consider(q_warm, mu)
    grow = w1 > beta
    while rounds < opts.penalty_rounds:
        if grow:
            if w1 <= beta:
                hi, lo = mu, mu / 10.0
                break
            lo, mu = mu, mu * 10.0
        else:
            if w1 > beta:
                lo, hi = mu, mu * 10.0
                break
            hi, mu = mu, mu / 10.0
        q_warm, iters = _mirror_descent(q_warm, target, h, mu, opts)
        total_iters += iters
        rounds += 1
        w1 = _grid_w1(q_warm, target, h)
        consider(q_warm, mu)
    while rounds < opts.penalty_rounds and lo is not None and hi is not None:
        if abs(w1 - beta) <= opts.w1_match_rel * beta:
            break
        mu = math.sqrt(lo * hi)
        q_warm, iters = _mirror_descent(q_warm, target, h, mu, opts)
        total_iters += iters
        rounds += 1
        w1 = _grid_w1(q_warm, target, h)
        consider(q_warm, mu)
        if w1 > beta:
            lo = mu
        else:
            hi = mu

    ent, q, w1, mu = best
    u = GridDensity(a, b, q / h)
    report = DensityReport(beta=beta, achieved_w1=w1, entropy=entropy(u),
                           penalty=mu, rounds=rounds, iterations=total_iters,
                           status="boundary")
    return u, report


@dataclass
class ConvexityReport:
    max_violation: float
    worst_lambda: float | None


def mixture(mu1, mu2, lam):
    """Convex combination of two discrete measures (union of atoms)."""
    if not (0.0 <= lam <= 1.0):
        raise InvalidInputError("lambda must lie in [0, 1]")
    if lam == 0.0:
        return mu2
    if lam == 1.0:
        return mu1
    return DiscreteMeasure.from_atoms(
        np.concatenate([mu1.atoms, mu2.atoms]),
        np.concatenate([lam * mu1.weights, (1.0 - lam) * mu2.weights]))


def wp_convexity_check(mu1, mu2, nu, p, lambda_grid):
    """Convexity of ``W_p(., nu)**p`` along mixtures of two measures.

    Checks ``W_p(lam*mu1 + (1-lam)*mu2, nu)**p <= lam*W_p(mu1, nu)**p +
    (1-lam)*W_p(mu2, nu)**p`` on the given grid and reports the largest
    positive violation.
    """
    w1p = wasserstein_discrete(mu1, nu, p) ** p
    w2p = wasserstein_discrete(mu2, nu, p) ** p
    max_violation = 0.0
    worst = None
    for lam in lambda_grid:
        lam = float(lam)
        lhs = wasserstein_discrete(mixture(mu1, mu2, lam), nu, p) ** p
        violation = lhs - (lam * w1p + (1.0 - lam) * w2p)
        if violation > max_violation:
            max_violation = violation
            worst = lam
    return ConvexityReport(max_violation=max_violation, worst_lambda=worst)
