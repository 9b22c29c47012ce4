"""Likelihood families with closed-form covariate gradients.

Every family implements, for a covariate vector ``x``, outcome(s) ``y`` and a
draw (or batch of draws) of parameters ``gamma = (beta, phi)``:

* ``loglik``   -- log density/mass ``log pi(y | x, gamma)``
* ``score_x``  -- gradient of ``loglik`` with respect to ``x``
* ``pdf_grad_x`` -- gradient of the density itself, ``pi * score_x``
* ``sample_y`` -- forward sampling of the outcome

Batched calls take a :class:`~ppdattack.bayes.draws.DrawBatch` and return one
row per draw; single :class:`~ppdattack.bayes.draws.ParamDraw` inputs return
unbatched arrays/scalars.  ``y`` may be a scalar (evaluated under every draw)
or one value per draw.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit, logsumexp

from ..exceptions import UnsupportedModelError
from .draws import DrawBatch, ParamDraw, as_batch


def _prep(gamma):
    single = isinstance(gamma, ParamDraw)
    return as_batch(gamma), single


def _out(arr, single):
    return arr[0] if single else arr


def _check_x(x, dim):
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise ValueError("x must have shape (%d,), got %s" % (dim, x.shape))
    return x


def _labels(y, m, n_classes):
    y = np.asarray(y)
    if not np.issubdtype(y.dtype, np.number) or np.any(y != np.floor(y)):
        raise ValueError("class labels must be integers")
    y = np.broadcast_to(y.astype(int), (m,))
    if np.any(y < 0) or np.any(y >= n_classes):
        raise ValueError("class label out of range [0, %d)" % n_classes)
    return y


def _sample_categorical(probs, rng):
    # Inverse-CDF sampling, one row of class probabilities per draw.
    u = rng.random(probs.shape[0])[:, None]
    return (np.cumsum(probs, axis=1) < u).sum(axis=1)


class GaussianLinear:
    """Gaussian linear regression likelihood: y | x, gamma ~ N(beta^T x, phi)."""

    def __init__(self, dim):
        self.dim = int(dim)

    def loglik(self, x, y, gamma):
        batch, single = _prep(gamma)
        x = _check_x(x, self.dim)
        mean = batch.beta @ x
        # The quadratic term may overflow to inf for tiny phi; -inf is the
        # correct log likelihood there, so silence the overflow warning.
        with np.errstate(over="ignore"):
            ll = -0.5 * np.log(2.0 * np.pi * batch.phi) - (np.asarray(y) - mean) ** 2 / (
                2.0 * batch.phi
            )
        return _out(ll, single)

    def score_x(self, x, y, gamma):
        batch, single = _prep(gamma)
        x = _check_x(x, self.dim)
        mean = batch.beta @ x
        with np.errstate(over="ignore"):
            w = (np.asarray(y) - mean) / batch.phi
        return _out(w[:, None] * batch.beta, single)

    def sample_y(self, x, gamma, rng):
        batch, single = _prep(gamma)
        x = _check_x(x, self.dim)
        ys = batch.beta @ x + np.sqrt(batch.phi) * rng.standard_normal(len(batch))
        return _out(ys, single)


class BernoulliLogit:
    """Bernoulli likelihood with logit link: P(y=1 | x, gamma) = expit(beta^T x)."""

    def __init__(self, dim):
        self.dim = int(dim)

    def _check_y(self, y, m):
        y = np.broadcast_to(np.asarray(y, dtype=float), (m,))
        if np.any((y != 0.0) & (y != 1.0)):
            raise ValueError("binary labels must be 0 or 1")
        return y

    def loglik(self, x, y, gamma):
        batch, single = _prep(gamma)
        x = _check_x(x, self.dim)
        s = batch.beta @ x
        y = self._check_y(y, len(batch))
        return _out(y * s - np.logaddexp(0.0, s), single)

    def score_x(self, x, y, gamma):
        batch, single = _prep(gamma)
        x = _check_x(x, self.dim)
        s = batch.beta @ x
        y = self._check_y(y, len(batch))
        return _out((y - expit(s))[:, None] * batch.beta, single)

    def sample_y(self, x, gamma, rng):
        batch, single = _prep(gamma)
        x = _check_x(x, self.dim)
        p = expit(batch.beta @ x)
        return _out((rng.random(len(batch)) < p).astype(float), single)


class CategoricalSoftmax:
    """Softmax classification with linear class logits ``W x``.

    The flattened parameter vector per draw is ``W.ravel()`` for a
    (n_classes, dim) weight matrix; labels are integers in [0, n_classes).
    """

    def __init__(self, dim, n_classes):
        self.dim = int(dim)
        self.n_classes = int(n_classes)
        if self.n_classes < 2:
            raise ValueError("need at least two classes")

    @property
    def n_params(self):
        return self.n_classes * self.dim

    def _weights(self, batch):
        if batch.beta.shape[1] != self.n_params:
            raise ValueError(
                "expected %d flattened weights per draw, got %d"
                % (self.n_params, batch.beta.shape[1])
            )
        return batch.beta.reshape(len(batch), self.n_classes, self.dim)

    def class_probs(self, x, gamma):
        """Per-draw softmax class probabilities at ``x``."""
        batch, single = _prep(gamma)
        x = _check_x(x, self.dim)
        logits = self._weights(batch) @ x
        probs = np.exp(logits - logsumexp(logits, axis=1, keepdims=True))
        return _out(probs, single)

    def loglik(self, x, y, gamma):
        batch, single = _prep(gamma)
        x = _check_x(x, self.dim)
        logits = self._weights(batch) @ x
        y = _labels(y, len(batch), self.n_classes)
        ll = logits[np.arange(len(batch)), y] - logsumexp(logits, axis=1)
        return _out(ll, single)

    def score_x(self, x, y, gamma):
        batch, single = _prep(gamma)
        x = _check_x(x, self.dim)
        W = self._weights(batch)
        logits = W @ x
        probs = np.exp(logits - logsumexp(logits, axis=1, keepdims=True))
        y = _labels(y, len(batch), self.n_classes)
        s = W[np.arange(len(batch)), y, :] - np.einsum("mk,mkp->mp", probs, W)
        return _out(s, single)

    def sample_y(self, x, gamma, rng):
        batch, single = _prep(gamma)
        probs = np.atleast_2d(self.class_probs(x, batch))
        return _out(_sample_categorical(probs, rng).astype(float), single)


class SmallBnn:
    """One-hidden-layer tanh network likelihood with closed-form x-gradients.

    ``likelihood='gaussian'`` models a scalar response y ~ N(f(x), phi);
    ``likelihood='categorical'`` uses the ``n_out`` network outputs as class
    logits.  The flattened parameter vector per draw is
    ``[W1.ravel(), b1, W2.ravel(), b2]`` with W1 (hidden, dim) and
    W2 (n_out, hidden).
    """

    def __init__(self, dim, hidden, likelihood="gaussian", n_out=None):
        self.dim = int(dim)
        self.hidden = int(hidden)
        if likelihood not in ("gaussian", "categorical"):
            raise ValueError("likelihood must be 'gaussian' or 'categorical'")
        self.likelihood = likelihood
        if likelihood == "gaussian":
            self.n_out = 1
        else:
            if n_out is None or n_out < 2:
                raise ValueError("categorical SmallBnn needs n_out >= 2")
            self.n_out = int(n_out)

    @property
    def n_params(self):
        h, p, o = self.hidden, self.dim, self.n_out
        return h * p + h + o * h + o

    def _unpack(self, batch):
        if batch.beta.shape[1] != self.n_params:
            raise ValueError(
                "expected %d flattened parameters per draw, got %d"
                % (self.n_params, batch.beta.shape[1])
            )
        m = len(batch)
        h, p, o = self.hidden, self.dim, self.n_out
        i = 0
        W1 = batch.beta[:, i : i + h * p].reshape(m, h, p)
        i += h * p
        b1 = batch.beta[:, i : i + h]
        i += h
        W2 = batch.beta[:, i : i + o * h].reshape(m, o, h)
        i += o * h
        b2 = batch.beta[:, i : i + o]
        return W1, b1, W2, b2

    def _forward(self, x, batch):
        W1, b1, W2, b2 = self._unpack(batch)
        hvals = np.tanh(W1 @ x + b1)
        out = np.einsum("moh,mh->mo", W2, hvals) + b2
        return out, hvals, W1, W2

    def _grad_out_x(self, hvals, W1, W2):
        # d out_o / d x = W1^T diag(1 - h^2) W2_o  -> (m, n_out, dim)
        gate = (1.0 - hvals**2)[:, None, :] * W2  # (m, o, h)
        return np.einsum("moh,mhp->mop", gate, W1)

    def loglik(self, x, y, gamma):
        batch, single = _prep(gamma)
        x = _check_x(x, self.dim)
        out, _, _, _ = self._forward(x, batch)
        if self.likelihood == "gaussian":
            f = out[:, 0]
            ll = -0.5 * np.log(2.0 * np.pi * batch.phi) - (np.asarray(y) - f) ** 2 / (
                2.0 * batch.phi
            )
        else:
            y = _labels(y, len(batch), self.n_out)
            ll = out[np.arange(len(batch)), y] - logsumexp(out, axis=1)
        return _out(ll, single)

    def score_x(self, x, y, gamma):
        batch, single = _prep(gamma)
        x = _check_x(x, self.dim)
        out, hvals, W1, W2 = self._forward(x, batch)
        dout = self._grad_out_x(hvals, W1, W2)  # (m, o, p)
        if self.likelihood == "gaussian":
            w = (np.asarray(y) - out[:, 0]) / batch.phi
            s = w[:, None] * dout[:, 0, :]
        else:
            y = _labels(y, len(batch), self.n_out)
            probs = np.exp(out - logsumexp(out, axis=1, keepdims=True))
            resid = -probs
            resid[np.arange(len(batch)), y] += 1.0
            s = np.einsum("mo,mop->mp", resid, dout)
        return _out(s, single)

    def sample_y(self, x, gamma, rng):
        batch, single = _prep(gamma)
        x = _check_x(x, self.dim)
        out, _, _, _ = self._forward(x, batch)
        if self.likelihood == "gaussian":
            ys = out[:, 0] + np.sqrt(batch.phi) * rng.standard_normal(len(batch))
        else:
            probs = np.exp(out - logsumexp(out, axis=1, keepdims=True))
            ys = _sample_categorical(probs, rng).astype(float)
        return _out(ys, single)

    def random_init(self, rng, scale=0.5):
        """A flat parameter vector for starting an MCMC chain."""
        return scale * rng.standard_normal(self.n_params)


class FeatureSubsetModel:
    """Wrap a model that only sees a subset of the covariates.

    Used for gray-box attackers whose surrogate was fit on fewer features:
    likelihood evaluations restrict ``x`` to ``indices`` and covariate
    gradients are zero on the unseen coordinates.
    """

    def __init__(self, inner, indices, dim):
        self.inner = inner
        self.indices = np.asarray(indices, dtype=int)
        self.dim = int(dim)
        if self.indices.size != inner.dim:
            raise ValueError("indices must match the inner model dimension")
        if np.any(self.indices < 0) or np.any(self.indices >= dim):
            raise ValueError("indices out of range")

    def loglik(self, x, y, gamma):
        x = _check_x(x, self.dim)
        return self.inner.loglik(x[self.indices], y, gamma)

    def score_x(self, x, y, gamma):
        x = _check_x(x, self.dim)
        inner = self.inner.score_x(x[self.indices], y, gamma)
        inner2 = np.atleast_2d(inner)
        full = np.zeros((inner2.shape[0], self.dim))
        full[:, self.indices] = inner2
        return full[0] if inner.ndim == 1 else full

    def sample_y(self, x, gamma, rng):
        x = _check_x(x, self.dim)
        return self.inner.sample_y(x[self.indices], gamma, rng)


def loglik(model, x, y, gamma):
    """Log likelihood ``log pi(y | x, gamma)`` under ``model``."""
    return model.loglik(x, y, gamma)


def score_x(model, x, y, gamma):
    """Covariate gradient of the log likelihood."""
    return model.score_x(x, y, gamma)


def pdf_grad_x(model, x, y, gamma):
    """Covariate gradient of the likelihood density: pi * score_x."""
    ll = np.atleast_1d(model.loglik(x, y, gamma))
    s = np.atleast_2d(model.score_x(x, y, gamma))
    g = np.exp(ll)[:, None] * s
    return g[0] if isinstance(gamma, ParamDraw) else g


def sample_predictive(model, x, gamma, rng):
    """Draw outcomes from the likelihood at ``x`` under the given draw(s)."""
    return model.sample_y(x, gamma, rng)


def require_gaussian_linear(model):
    """Raise unless ``model`` is a plain Gaussian linear likelihood."""
    if not isinstance(model, GaussianLinear):
        raise UnsupportedModelError(
            "this operation needs a GaussianLinear likelihood, got %s"
            % type(model).__name__
        )
    return model
