"""Posterior draw backends: exact conjugate sampling, stored banks, and MCMC.

All backends expose ``draw(count, rng) -> DrawBatch`` and are deterministic
given the generator state, so a fixed seed reproduces draw sequences
bit-identically.
"""

from __future__ import annotations

import warnings

import numpy as np

from .conjugate import GaussianPosterior, NigPosterior
from .draws import DrawBatch


class ExactConjugate:
    """iid draws from a conjugate posterior.

    For a normal--inverse-gamma posterior the noise variance is drawn from its
    inverse-gamma marginal and the coefficients from the conditional normal
    ``N(mu_n, sigma^2 inv(Lambda_n))``.  For a known-variance Gaussian
    posterior the coefficients are ``N(mu_n, inv(Lambda_n))`` with ``phi``
    pinned at the known ``sigma2``.
    """

    def __init__(self, posterior):
        if not isinstance(posterior, (NigPosterior, GaussianPosterior)):
            raise TypeError("posterior must be NigPosterior or GaussianPosterior")
        self.posterior = posterior
        self._chol = posterior.cov_chol()  # lower factor of inv(Lambda_n)

    def draw(self, count, rng):
        if count < 1:
            raise ValueError("count must be >= 1")
        post = self.posterior
        z = rng.standard_normal((count, post.p))
        if isinstance(post, NigPosterior):
            # InvGamma(a, b): reciprocal of Gamma(shape=a, scale=1/b).
            phi = 1.0 / rng.gamma(post.a_n, 1.0 / post.b_n, size=count)
            beta = post.mu_n + np.sqrt(phi)[:, None] * (z @ self._chol.T)
        else:
            phi = np.full(count, post.sigma2)
            beta = post.mu_n + z @ self._chol.T
        return DrawBatch(beta, phi)


class SampleBank:
    """Resample stored draws with replacement to approximate iid posterior draws.

    When the bank holds states of a correlated chain this is only an
    approximation to independent sampling; the resampled draws inherit
    whatever autocorrelation structure survives in the bank.
    """

    def __init__(self, batch: DrawBatch):
        if len(batch) == 0:
            raise ValueError("sample bank must be non-empty")
        self.batch = batch

    def __len__(self):
        return len(self.batch)

    def draw(self, count, rng):
        if count < 1:
            raise ValueError("count must be >= 1")
        idx = rng.integers(0, len(self.batch), size=count)
        return DrawBatch(self.batch.beta[idx], self.batch.phi[idx])


def adaptive_rwm(log_post, x0, n_keep, rng, step=0.5, burn_in=1000, thin=5,
                 target_accept=0.3):
    """Adaptive random-walk Metropolis sampler.

    The global proposal scale is adapted during burn-in by Robbins--Monro
    updates towards ``target_accept``; it is frozen afterwards so the kept
    states target the exact posterior.

    Returns
    -------
    states : ndarray, shape (n_keep, dim)
    accept_rate : float
        Post-burn-in acceptance rate.
    """
    if burn_in < 0 or thin < 1 or n_keep < 1:
        raise ValueError("need burn_in >= 0, thin >= 1, n_keep >= 1")
    x = np.asarray(x0, dtype=float).copy()
    dim = x.size
    lp = float(log_post(x))
    if not np.isfinite(lp):
        raise ValueError("log posterior is not finite at the initial state")
    scale = float(step)
    states = np.empty((n_keep, dim))
    kept = 0
    accepted_post = 0
    total_post = 0
    total = burn_in + n_keep * thin
    for t in range(total):
        prop = x + scale * rng.standard_normal(dim)
        lp_prop = float(log_post(prop))
        accept = np.log(rng.random()) < lp_prop - lp
        if accept:
            x, lp = prop, lp_prop
        if t < burn_in:
            gain = (t + 1.0) ** -0.6
            scale *= np.exp(gain * ((1.0 if accept else 0.0) - target_accept))
        else:
            total_post += 1
            accepted_post += int(accept)
            if (t - burn_in) % thin == thin - 1:
                states[kept] = x
                kept += 1
    rate = accepted_post / max(total_post, 1)
    if not 0.05 <= rate <= 0.95:
        warnings.warn(
            "MCMC acceptance rate %.3f outside [0.05, 0.95] after adaptation; "
            "draws may mix poorly" % rate,
            RuntimeWarning,
        )
    return states, rate


class McmcChain:
    """Posterior draws via adaptive random-walk Metropolis on a log posterior.

    Parameters
    ----------
    log_post : callable
        Maps a flat parameter vector to the unnormalised log posterior.
    initial : ndarray
        Chain starting state.
    step, burn_in, thin, target_accept
        Sampler settings; the proposal scale adapts during burn-in only.
    param_map : callable, optional
        Maps the (n, dim) array of kept states to a DrawBatch.  Defaults to
        ``beta = state, phi = 1`` (appropriate for classifiers with no free
        noise scale).
    """

    def __init__(self, log_post, initial, step=0.5, burn_in=1000, thin=5,
                 target_accept=0.3, param_map=None):
        self.log_post = log_post
        self.initial = np.asarray(initial, dtype=float)
        self.step = float(step)
        self.burn_in = int(burn_in)
        self.thin = int(thin)
        self.target_accept = float(target_accept)
        self.param_map = param_map
        self.last_accept_rate = None

    def draw(self, count, rng):
        states, rate = adaptive_rwm(
            self.log_post, self.initial, count, rng,
            step=self.step, burn_in=self.burn_in, thin=self.thin,
            target_accept=self.target_accept,
        )
        self.last_accept_rate = rate
        if self.param_map is not None:
            return self.param_map(states)
        return DrawBatch(states, 1.0)

    def to_bank(self, count, rng):
        """Run the chain once and freeze the states into a SampleBank."""
        return SampleBank(self.draw(count, rng))


def draw_params(backend, count, rng) -> DrawBatch:
    """Draw ``count`` posterior parameter draws from any backend."""
    return backend.draw(count, rng)
