"""Closed-form attack solutions and KL expressions for conjugate Gaussian models.

For the known-variance conjugate linear model the predictive mean is linear in
the covariates, so the point attack that moves the predictive mean to a target
``y_star`` inside an L2 or L-infinity ball has an exact solution via the
Hölder inequality: the best achievable shift of the mean is
``epsilon * ||mu_n||_dual``, attained by perturbing along ``mu_n`` (L2) or
``sign(mu_n)`` (L-infinity).  The same model gives the KL divergence between a
Gaussian adversarial target and the predictive in closed form, together with
its covariate gradient, which powers a deterministic multi-start projected
gradient benchmark for the distribution attacks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attacks.feasible import FeasibleSet
from .attacks.ppd import NormalAppd
from .bayes.conjugate import GaussianPosterior, ppd_normal_params, spd_solve


@dataclass(frozen=True)
class AnalyticPointSolution:
    """Exact point-attack solution: perturbation, residual, feasibility flag."""

    r_star: np.ndarray
    x_star: np.ndarray
    residual: float
    achieved: bool


def _alpha(mu_n, x, y_star):
    mu_n = np.asarray(mu_n, dtype=float)
    x = np.asarray(x, dtype=float)
    if mu_n.shape != x.shape or mu_n.ndim != 1:
        raise ValueError("mu_n and x must be vectors of equal length")
    return mu_n, x, float(y_star) - float(mu_n @ x)


def analytic_point_l2(mu_n, x, y_star, eps) -> AnalyticPointSolution:
    """Exact L2-ball attack on the predictive mean of a linear model.

    Let ``alpha = y_star - mu_n^T x``.  If ``|alpha| <= eps * ||mu_n||_2`` the
    target is reachable and the minimum-norm solution is
    ``r = alpha * mu_n / ||mu_n||_2^2``; otherwise the optimum sits on the
    boundary at ``r = sign(alpha) * eps * mu_n / ||mu_n||_2`` with residual
    ``|alpha| - eps * ||mu_n||_2``.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    mu_n, x, alpha = _alpha(mu_n, x, y_star)
    nrm = np.linalg.norm(mu_n)
    if nrm == 0.0:
        if alpha == 0.0:
            return AnalyticPointSolution(np.zeros_like(x), x.copy(), 0.0, True)
        raise ValueError("mu_n is zero: the predictive mean cannot be moved")
    if abs(alpha) <= eps * nrm:
        r = (alpha / nrm**2) * mu_n
        return AnalyticPointSolution(r, x + r, 0.0, True)
    r = np.sign(alpha) * (eps / nrm) * mu_n
    return AnalyticPointSolution(r, x + r, abs(alpha) - eps * nrm, False)


def analytic_point_linf(mu_n, x, y_star, eps) -> AnalyticPointSolution:
    """Exact L-infinity-ball attack on the predictive mean of a linear model.

    The dual norm is L1: if ``|alpha| <= eps * ||mu_n||_1`` the solution
    ``r = (alpha / ||mu_n||_1) * sign(mu_n)`` reaches the target (zero entries
    of ``mu_n`` are left untouched, sign(0) = 0); otherwise
    ``r = eps * sign(mu_n) * sign(alpha)`` with residual
    ``|alpha| - eps * ||mu_n||_1``.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    mu_n, x, alpha = _alpha(mu_n, x, y_star)
    l1 = np.abs(mu_n).sum()
    if l1 == 0.0:
        if alpha == 0.0:
            return AnalyticPointSolution(np.zeros_like(x), x.copy(), 0.0, True)
        raise ValueError("mu_n is zero: the predictive mean cannot be moved")
    if abs(alpha) <= eps * l1:
        r = (alpha / l1) * np.sign(mu_n)
        return AnalyticPointSolution(r, x + r, 0.0, True)
    r = eps * np.sign(mu_n) * np.sign(alpha)
    return AnalyticPointSolution(r, x + r, abs(alpha) - eps * l1, False)


def gaussian_kl(mean1, var1, mean2, var2):
    """KL( N(mean1, var1) || N(mean2, var2) )."""
    if var1 <= 0 or var2 <= 0:
        raise ValueError("variances must be positive")
    return 0.5 * (np.log(var2 / var1) + (var1 + (mean1 - mean2) ** 2) / var2 - 1.0)


def kl_normal_ppd(appd: NormalAppd, post: GaussianPosterior, x):
    """KL from a Gaussian adversarial target to the predictive at ``x``.

    With predictive mean ``m(x) = x^T mu_n`` and variance
    ``v(x) = x^T inv(Lambda_n) x + sigma2``:

        KL = 0.5 log(v / var_A) + (var_A + (mean_A - m)^2) / (2 v) - 0.5
    """
    m, v = ppd_normal_params(post, x)
    return gaussian_kl(appd.mean, appd.var, m, v)


def kl_normal_ppd_grad(appd: NormalAppd, post: GaussianPosterior, x):
    """Exact covariate gradient of :func:`kl_normal_ppd`.

    Using ``grad m = mu_n`` and ``grad v = 2 inv(Lambda_n) x``:

        grad KL = grad_v * (1/(2v) - (var_A + (mean_A - m)^2) / (2 v^2))
                  - (mean_A - m) mu_n / v
    """
    x = np.asarray(x, dtype=float)
    m, v = ppd_normal_params(post, x)
    grad_v = 2.0 * spd_solve(post.lambda_n, x, "Lambda_n")
    dm = appd.mean - m
    return grad_v * (0.5 / v - (appd.var + dm**2) / (2.0 * v**2)) - (dm / v) * post.mu_n


@dataclass(frozen=True)
class KlBenchmarkResult:
    """Best point found by the deterministic benchmark plus all local solutions."""

    x: np.ndarray
    kl: float
    solutions: tuple  # of (x, kl) pairs, one per start


def minimize_kl_pgd(appd, post, feasible: FeasibleSet, x0, step=0.25, iters=500,
                    tol=1e-12):
    """Projected gradient descent on the closed-form KL with backtracking."""
    x = feasible.project(np.asarray(x0, dtype=float))
    val = kl_normal_ppd(appd, post, x)
    s = float(step)
    for _ in range(iters):
        g = kl_normal_ppd_grad(appd, post, x)
        moved = False
        while s > 1e-14:
            cand = feasible.project(x - s * g)
            cand_val = kl_normal_ppd(appd, post, cand)
            if cand_val < val - 1e-15:
                x, val = cand, cand_val
                moved = True
                s = min(s * 2.0, step)  # re-expand after a success
                break
            s *= 0.5
        if not moved or np.linalg.norm(g) < tol:
            break
    return x, float(val)


def minimize_kl_multistart(appd, post, feasible: FeasibleSet, rng, n_starts=8,
                           step=0.25, iters=500) -> KlBenchmarkResult:
    """Deterministic benchmark: multi-start PGD on the closed-form KL.

    The KL is generally non-convex in the covariates, so several starts inside
    the ball are polished and the best kept; all converged solutions are
    returned so callers can inspect distinct local minimisers.
    """
    starts = [feasible.center.copy()]
    for _ in range(max(0, n_starts - 1)):
        z = rng.uniform(-1.0, 1.0, size=feasible.dim)
        starts.append(feasible.project(feasible.center + feasible.epsilon * z))
    solutions = [
        minimize_kl_pgd(appd, post, feasible, x0, step=step, iters=iters) for x0 in starts
    ]
    best = min(solutions, key=lambda t: t[1])
    return KlBenchmarkResult(x=best[0], kl=best[1], solutions=tuple(solutions))
