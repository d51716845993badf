"""Subgradients, Bregman distances, and source certificates.

A source certificate witnesses that a subgradient of the regularizer at a
reference point lies in the range of the adjoint operator, ``xi = F^T w``.
For a linear operator this is exactly the premise of the quantitative
error estimates, and the certificate carries the constants of the
associated source inequality in both of its equivalent parametrizations
(``gamma_1, gamma_2`` and ``eta_1, eta_2``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_matrix, as_vector, regularizer_value
from .errors import InvalidInputError, UnsupportedExponentError

__all__ = ["SourceCertificate", "subgradient_lp", "source_certificate",
           "bregman_distance", "generalized_bregman", "verify_source_inequality",
           "r_coercivity_check", "gamma_from_eta", "eta_from_gamma"]


def gamma_from_eta(eta1, eta2):
    """Convert source-inequality constants: ``gamma = (eta1/(1+eta1), eta2/(1+eta1))``."""
    return eta1 / (1.0 + eta1), eta2 / (1.0 + eta1)


def eta_from_gamma(gamma1, gamma2):
    """Inverse of :func:`gamma_from_eta`; requires ``gamma1 < 1``."""
    if gamma1 >= 1.0:
        raise InvalidInputError(f"gamma1 must lie in [0, 1), got {gamma1}")
    return gamma1 / (1.0 - gamma1), gamma2 / (1.0 - gamma1)


@dataclass
class SourceCertificate:
    """Range-of-adjoint representation of a subgradient, with constants.

    ``fit_residual = ||F^T omega - xi||`` measures how well the subgradient
    is represented; a small residual certifies the source condition.
    """

    xi: np.ndarray
    omega: np.ndarray
    fit_residual: float
    gamma1: float
    gamma2: float
    eta1: float
    eta2: float

    def __post_init__(self):
        if self.fit_residual < 0:
            raise InvalidInputError("fit_residual must be >= 0")
        g1, g2 = gamma_from_eta(self.eta1, self.eta2)
        if abs(g1 - self.gamma1) > 1e-12 or abs(g2 - self.gamma2) > 1e-12:
            raise InvalidInputError("gamma and eta constants are inconsistent")


def subgradient_lp(x_dagger, p):
    """Subgradient of ``R_p`` at ``x_dagger`` plus a free-index mask.

    For ``p > 1`` the subdifferential is single valued,
    ``xi_i = p * sign(x_i) * |x_i|**(p-1)``, and the mask is empty.  For
    ``p = 1`` the sign vector is returned with the mask marking zero
    coordinates, where any value in ``[-1, 1]`` is admissible (0 is
    reported there).
    """
    p = float(p)
    if p < 1.0:
        raise UnsupportedExponentError(
            f"subgradients are only provided for p in [1, 2], got {p}")
    if p > 2.0:
        raise InvalidInputError(f"p must lie in [1, 2], got {p}")
    x = as_vector(x_dagger, "x_dagger")
    if p == 1.0:
        xi = np.sign(x)
        free = x == 0.0
        return xi, free
    xi = p * np.sign(x) * np.abs(x) ** (p - 1.0)
    return xi, np.zeros(x.shape[0], dtype=bool)


def source_certificate(operator, x_dagger, p, xi_free_values=None):
    """Best range-of-adjoint fit of a subgradient at ``x_dagger``.

    Solves ``min_w ||F^T w - xi||`` by least squares.  For ``p = 1`` the
    free coordinates of ``xi`` (zeros of ``x_dagger``) are jointly
    optimized inside ``[-1, 1]`` by 100 rounds of alternating projection,
    unless explicit ``xi_free_values`` are supplied.  The returned
    constants are ``eta1 = 0`` and ``eta2 = ||omega||``, the linear-operator
    case of the source inequality.
    """
    F = as_matrix(operator)
    xi, free = subgradient_lp(x_dagger, p)
    if F.shape[1] != xi.shape[0]:
        raise InvalidInputError("operator columns must match x_dagger length")
    if xi_free_values is not None:
        vals = as_vector(xi_free_values, "xi_free_values")
        if vals.shape[0] != int(free.sum()):
            raise InvalidInputError(
                f"expected {int(free.sum())} free values, got {vals.shape[0]}")
        if np.any(np.abs(vals) > 1.0 + 1e-12):
            raise InvalidInputError("free subgradient entries must lie in [-1, 1]")
        xi = xi.copy()
        xi[free] = vals
        omega, *_ = np.linalg.lstsq(F.T, xi, rcond=None)
    elif free.any():
        xi = xi.copy()
        omega = np.zeros(F.shape[0])
        for _ in range(100):
            omega, *_ = np.linalg.lstsq(F.T, xi, rcond=None)
            fit = F.T @ omega
            xi[free] = np.clip(fit[free], -1.0, 1.0)
    else:
        omega, *_ = np.linalg.lstsq(F.T, xi, rcond=None)
    fit_residual = float(np.linalg.norm(F.T @ omega - xi))
    eta1, eta2 = 0.0, float(np.linalg.norm(omega))
    gamma1, gamma2 = gamma_from_eta(eta1, eta2)
    return SourceCertificate(xi=xi, omega=omega, fit_residual=fit_residual,
                             gamma1=gamma1, gamma2=gamma2, eta1=eta1, eta2=eta2)


def bregman_distance(x, x_dagger, xi, p):
    """Classical Bregman distance ``R_p(x) - R_p(x') - <xi, x - x'>``.

    Nonnegative whenever ``xi`` is an admissible subgradient at
    ``x_dagger`` and ``p >= 1``.
    """
    x = as_vector(x)
    x_dagger = as_vector(x_dagger, "x_dagger")
    xi = as_vector(xi, "xi")
    return (regularizer_value(x, p) - regularizer_value(x_dagger, p)
            - float(np.dot(xi, x - x_dagger)))


def generalized_bregman(x, x_dagger, w, p):
    """Bregman distance with respect to a comparison function ``w``.

    ``R_p(x) - R_p(x_dagger) - w(x) + w(x_dagger)`` for a callable ``w``,
    e.g. members of the family ``w(x) = -c * ||x - x_ref||**p`` used in the
    sparse non-convex analysis.
    """
    x = as_vector(x)
    x_dagger = as_vector(x_dagger, "x_dagger")
    return (regularizer_value(x, p) - regularizer_value(x_dagger, p)
            - float(w(x)) + float(w(x_dagger)))


@dataclass
class SourceInequalityReport:
    max_violation: float
    worst_point: np.ndarray | None


def verify_source_inequality(operator, x_dagger, certificate, sample_points, p):
    """Check the linear source inequality on a batch of sample points.

    With ``w(x) = <xi, x>`` the inequality reads
    ``w(x_dagger) - w(x) <= gamma1 * D_xi(x, x_dagger) + gamma2 * ||F(x - x_dagger)||``.
    Returns the largest positive violation and the witnessing point (zero
    and ``None`` when every sample satisfies the bound, or the list is
    empty).
    """
    F = as_matrix(operator)
    x_dagger = as_vector(x_dagger, "x_dagger")
    xi = as_vector(certificate.xi, "xi")
    max_violation = 0.0
    worst = None
    for pt in sample_points:
        x = as_vector(pt, "sample point")
        lhs = float(np.dot(xi, x_dagger - x))
        rhs = (certificate.gamma1 * bregman_distance(x, x_dagger, xi, p)
               + certificate.gamma2 * float(np.linalg.norm(F @ (x - x_dagger))))
        violation = lhs - rhs
        if violation > max_violation:
            max_violation = violation
            worst = x
    return SourceInequalityReport(max_violation=max_violation, worst_point=worst)


def r_coercivity_check(x, x_dagger, p, K, r=None):
    """Whether ``D_xi(x, x_dagger) >= (K/r) * ||x - x_dagger||**r`` holds.

    ``r`` defaults to ``max(p, 2)``, the natural power for the exponents
    handled here.  ``K`` is a trial constant, typically found empirically;
    no sharp constant is claimed.  A small absolute slack guards against
    round-off on exact-equality cases.
    """
    if r is None:
        r = max(float(p), 2.0)
    x = as_vector(x)
    x_dagger = as_vector(x_dagger, "x_dagger")
    xi, _ = subgradient_lp(x_dagger, p)
    dist = bregman_distance(x, x_dagger, xi, p)
    gap = float(np.linalg.norm(x - x_dagger)) ** r
    return dist >= (K / r) * gap - 1e-12 * max(1.0, gap)
