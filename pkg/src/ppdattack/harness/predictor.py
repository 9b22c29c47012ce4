"""A fitted Bayesian predictor: likelihood family + posterior + draw backend."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..bayes.backends import ExactConjugate
from ..bayes.conjugate import (
    GaussianPosterior,
    NigPosterior,
    NigPrior,
    gaussian_update,
    nig_update,
    ppd_normal_params,
    ppd_t_params,
)
from ..bayes.data import Dataset
from ..bayes.likelihoods import GaussianLinear
from .config import ModelSpec


@dataclass
class BayesPredictor:
    """Bundles a likelihood, a posterior draw backend, and (when conjugate)
    the posterior object itself for closed-form predictive access."""

    likelihood: object
    backend: object
    posterior: object = None

    @property
    def dim(self):
        return self.likelihood.dim

    def predictive_mean_mc(self, x, n, rng):
        """Monte-Carlo predictive mean from n joint (parameter, outcome) draws."""
        draws = self.backend.draw(n, rng)
        return float(np.mean(self.likelihood.sample_y(x, draws, rng)))

    def predictive_normal_params(self, x):
        """Closed-form (mean, variance); known-variance conjugate only."""
        if not isinstance(self.posterior, GaussianPosterior):
            raise TypeError("closed-form normal predictive needs a GaussianPosterior")
        return ppd_normal_params(self.posterior, x)

    def predictive_t(self, x):
        """Closed-form Student-t predictive; normal--inverse-gamma only."""
        if not isinstance(self.posterior, NigPosterior):
            raise TypeError("t predictive needs a NigPosterior")
        return ppd_t_params(self.posterior, x)

    def log_predictive_mc(self, x, ys, m, rng):
        """Plug-in log predictive density log( mean_m pi(y | x, gamma_m) )."""
        draws = self.backend.draw(m, rng)
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        out = np.empty(ys.size)
        for i, y in enumerate(ys):
            ll = np.atleast_1d(self.likelihood.loglik(x, y, draws))
            out[i] = logsumexp(ll) - np.log(len(draws))
        return out


def fit_predictor(spec: ModelSpec, train: Dataset) -> BayesPredictor:
    """Fit the conjugate posterior described by ``spec`` on the training data."""
    p = train.p
    mu0 = np.full(p, float(spec.prior_mean))
    lambda0 = float(spec.prior_precision) * np.eye(p)
    if spec.kind == "gaussian_linear":
        post = gaussian_update(mu0, lambda0, spec.sigma2, train.X, train.y)
    elif spec.kind == "nig_linear":
        post = nig_update(NigPrior(mu0, lambda0, spec.a0, spec.b0), train.X, train.y)
    else:
        raise ValueError("unknown model kind %r" % spec.kind)
    return BayesPredictor(
        likelihood=GaussianLinear(p), backend=ExactConjugate(post), posterior=post
    )
