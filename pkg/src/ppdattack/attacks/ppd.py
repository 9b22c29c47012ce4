"""Full-distribution attacks: drive the posterior predictive towards a target law.

The objective is the cross entropy ``-E_{y ~ pi_A}[log pi(y | x', D)]``
(equivalently the KL from the adversarial predictive distribution ``pi_A`` to
the induced posterior predictive, up to the constant entropy of ``pi_A``).
Its covariate gradient involves, for each outcome ``y``, the ratio

    g_x(y) = - E[grad_x pi(y | x, gamma)] / E[pi(y | x, gamma)]

of two posterior expectations.  The plug-in ratio with M draws in numerator
and denominator is biased at O(1/M); the multilevel estimator removes the
bias by telescoping over doubling batch sizes M0 * 2^level with an antithetic
first-half/second-half coupling and a randomised level draw, giving an
unbiased (or, when the level range is capped, nearly unbiased) gradient at
finite expected cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from ..exceptions import DegenerateLikelihoodError, NonFiniteGradientError
from ..bayes.backends import draw_params
from .feasible import FeasibleSet
from .trace import AttackTrace

_DENOM_FLOOR = 1e-300


@dataclass(frozen=True)
class NormalAppd:
    """Gaussian adversarial predictive target N(mean, var)."""

    mean: float
    var: float

    def __post_init__(self):
        if self.var <= 0:
            raise ValueError("var must be positive")

    def sample(self, size, rng):
        return self.mean + np.sqrt(self.var) * rng.standard_normal(size)

    def logpdf(self, y):
        y = np.asarray(y, dtype=float)
        return -0.5 * np.log(2.0 * np.pi * self.var) - (y - self.mean) ** 2 / (2.0 * self.var)


@dataclass(frozen=True)
class CategoricalAppd:
    """Categorical adversarial predictive target over class labels."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise ValueError("probs must be a 1-D probability vector summing to 1")
        object.__setattr__(self, "probs", probs)

    def sample(self, size, rng):
        u = rng.random(size)[:, None]
        return (np.cumsum(self.probs)[None, :] < u).sum(axis=1).astype(float)

    def logpdf(self, y):
        y = np.asarray(y).astype(int)
        with np.errstate(divide="ignore"):
            return np.log(self.probs)[y]


@dataclass(frozen=True)
class StudentTAppd:
    """Student-t adversarial predictive target.

    ``scale`` is the squared scale, matching
    :class:`~ppdattack.bayes.conjugate.TPredictive`.
    """

    df: float
    loc: float
    scale: float

    def __post_init__(self):
        if self.df <= 0 or self.scale <= 0:
            raise ValueError("df and scale must be positive")

    def sample(self, size, rng):
        return self.loc + np.sqrt(self.scale) * rng.standard_t(self.df, size=size)

    def logpdf(self, y):
        y = np.asarray(y, dtype=float)
        z2 = (y - self.loc) ** 2 / self.scale
        v = self.df
        return (
            gammaln((v + 1.0) / 2.0)
            - gammaln(v / 2.0)
            - 0.5 * np.log(v * np.pi * self.scale)
            - 0.5 * (v + 1.0) * np.log1p(z2 / v)
        )


@dataclass
class MlmcConfig:
    """Settings for the multilevel gradient and its attack loop.

    ``M0`` is the base batch size, level ``l`` uses ``M0 * 2^l`` draws, the
    randomised level is drawn with probability proportional to ``2^(-tau*l)``
    (``tau > 1`` so the expected cost is finite), ``R`` levels are averaged per
    predictive outcome, and ``B`` outcomes are drawn from the target per
    iteration.  ``Lmax`` caps the level range with renormalised weights; set
    ``untruncated=True`` for the uncapped geometric law (guarded by
    ``max_level_draws``).
    """

    feasible: FeasibleSet
    eta: float = 0.05
    T: int = 300
    M0: int = 8
    tau: float = 1.5
    R: int = 2
    Lmax: int = 6
    B: int = 1
    untruncated: bool = False
    eta_decay: bool = False
    record_objective: bool = True
    obj_draws: int = 64
    max_level_draws: int = 1 << 22

    def __post_init__(self):
        if self.tau <= 1.0:
            raise ValueError(
                "tau must exceed 1: the randomised-level estimator has divergent "
                "expected cost for tau <= 1"
            )
        if min(self.M0, self.R, self.B, self.T) < 1 or self.Lmax < 0:
            raise ValueError("M0, R, B, T must be >= 1 and Lmax >= 0")
        if self.M0 % 2 != 0:
            raise ValueError("M0 must be even so batches can be halved antithetically")
        if self.eta <= 0:
            raise ValueError("eta must be positive")


def level_weights(config: MlmcConfig):
    """Probabilities of levels 0..Lmax under the truncated, renormalised law."""
    w = 2.0 ** (-config.tau * np.arange(config.Lmax + 1))
    return w / w.sum()


def _sample_level(config, rng):
    if config.untruncated:
        q = 2.0 ** (-config.tau)
        level = int(rng.geometric(1.0 - q)) - 1
        if config.M0 * (1 << level) > config.max_level_draws:
            raise RuntimeError(
                "level %d needs %d draws, above the max_level_draws guard"
                % (level, config.M0 * (1 << level))
            )
        return level, (1.0 - q) * q**level
    w = level_weights(config)
    level = int(rng.choice(config.Lmax + 1, p=w))
    return level, float(w[level])


def ratio_grad(model, x, y, gammas):
    """Plug-in ratio estimate of -grad_x log of the predictive density at ``y``.

    Shares one batch of posterior draws between numerator and denominator:

        - sum_m pi(y | x, gamma_m) * score_x_m / sum_m pi(y | x, gamma_m)

    computed with the likelihoods factored by their common maximum log scale,
    so the denominator cannot underflow unless every likelihood is zero.
    Independent of batch size in expectation only up to O(1/M) bias; the
    multilevel combination removes that bias.
    """
    ll = np.atleast_1d(model.loglik(x, y, gammas))
    scores = np.atleast_2d(model.score_x(x, y, gammas))
    lmax = ll.max()
    if not np.isfinite(lmax):
        raise DegenerateLikelihoodError(
            "all likelihood values are zero (or non-finite) for this outcome"
        )
    w = np.exp(ll - lmax)
    denom = w.sum()
    if denom < _DENOM_FLOOR:
        raise DegenerateLikelihoodError("likelihood weights underflowed to zero")
    return -(w @ scores) / denom


def delta_level(model, x, y, level, config, backend, rng):
    """Antithetic level difference of the ratio estimator.

    Level 0 returns the plain ratio with M0 draws.  Level l >= 1 draws
    ``M0 * 2^l`` parameters and returns the full-batch ratio minus the average
    of the two half-batch ratios (first half / second half), whose expectation
    telescopes to the bias removed between consecutive batch sizes.
    """
    if level < 0:
        raise ValueError("level must be nonnegative")
    m = config.M0 * (1 << level)
    draws = draw_params(backend, m, rng)
    full = ratio_grad(model, x, y, draws)
    if level == 0:
        return full
    first, second = draws.halves()
    return full - 0.5 * (ratio_grad(model, x, y, first) + ratio_grad(model, x, y, second))


def _mlmc_grad_info(model, x, appd, config, backend, rng):
    ys = np.atleast_1d(appd.sample(config.B, rng))
    grad = np.zeros(np.asarray(x).size)
    levels = []
    cost = 0
    for y in ys:
        acc = np.zeros_like(grad)
        for _ in range(config.R):
            level, w = _sample_level(config, rng)
            levels.append(level)
            cost += config.M0 * (1 << level)
            acc += delta_level(model, x, y, level, config, backend, rng) / w
        grad += acc / config.R
    return grad / config.B, levels, cost


def mlmc_grad(model, x, appd, config, backend, rng):
    """Randomised multilevel estimate of the cross-entropy gradient at ``x``.

    Averages ``R`` single-level draws ``delta_level / P(level)`` per predictive
    outcome and ``B`` outcomes sampled from the adversarial target.
    """
    grad, _, _ = _mlmc_grad_info(model, x, appd, config, backend, rng)
    return grad


def expected_samples_per_iter(config: MlmcConfig):
    """Expected posterior draws per attack iteration under the config's level law.

    Untruncated geometric law: ``B * R * M0 * (1 - 2^-tau) / (1 - 2^-(tau-1))``.
    Truncated law: the exact finite sum ``B * R * sum_l w_l * M0 * 2^l`` with
    the renormalised weights.
    """
    if config.untruncated:
        q = 2.0 ** (-config.tau)
        if config.tau <= 1.0:
            raise ValueError("expected cost diverges for tau <= 1")
        per_level = config.M0 * (1.0 - q) / (1.0 - 2.0 * q)
    else:
        w = level_weights(config)
        per_level = float(w @ (config.M0 * 2.0 ** np.arange(config.Lmax + 1)))
    return config.B * config.R * per_level


def simulate_sample_cost(config: MlmcConfig, iters, rng):
    """Empirical mean posterior-draw count per iteration over simulated level draws.

    Exercises the same level-sampling path as :func:`mlmc_grad` without
    evaluating any gradients.
    """
    total = 0
    for _ in range(int(iters)):
        for _ in range(config.B * config.R):
            level, _ = _sample_level(config, rng)
            total += config.M0 * (1 << level)
    return total / float(iters)


def _objective_estimate(model, x, ys, config, backend, rng):
    # Diagnostic plug-in cross entropy: -mean_y log( mean_m pi(y | x, gamma_m) ).
    draws = draw_params(backend, config.obj_draws, rng)
    vals = np.empty(len(ys))
    for i, y in enumerate(ys):
        ll = np.atleast_1d(model.loglik(x, y, draws))
        vals[i] = logsumexp(ll) - np.log(len(draws))
    return -float(vals.mean())


def run_ppd_attack(model, appd, config, backend, rng) -> AttackTrace:
    """Projected SGD on the cross-entropy objective with multilevel gradients.

    The trace records, per iteration, a Monte-Carlo estimate of
    ``-E_{pi_A}[log predictive density]``, the levels drawn, and the posterior
    draws consumed by the gradient.
    """
    x = config.feasible.center.astype(float).copy()
    iterates = [x.copy()]
    objectives = np.empty(config.T)
    levels_used = []
    sample_cost = []
    for t in range(1, config.T + 1):
        grad, levels, cost = _mlmc_grad_info(model, x, appd, config, backend, rng)
        if not np.all(np.isfinite(grad)):
            raise NonFiniteGradientError(
                "non-finite multilevel gradient at iteration %d" % t, iteration=t, x=x.copy()
            )
        if config.record_objective:
            ys = np.atleast_1d(appd.sample(max(config.B, 8), rng))
            objectives[t - 1] = _objective_estimate(model, x, ys, config, backend, rng)
        else:
            objectives[t - 1] = np.nan
        levels_used.append("|".join(str(l) for l in levels))
        sample_cost.append(cost)
        step = config.eta / np.sqrt(t) if config.eta_decay else config.eta
        x = config.feasible.project(x - step * grad)
        iterates.append(x.copy())
    return AttackTrace(
        iterates=np.asarray(iterates),
        objectives=objectives,
        final_x=x,
        final_residual=float(objectives[-1]) if config.record_objective else np.nan,
        levels_used=levels_used,
        sample_cost=sample_cost,
    )
