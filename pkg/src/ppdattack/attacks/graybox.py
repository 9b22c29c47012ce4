"""Gray-box attacks through a model-averaged attacker view.

A gray-box attacker does not know the defender's model.  It holds an ensemble
of candidate models (each a likelihood family plus a posterior backend) with
prior weights, and attacks the Bayesian model average: every posterior draw
first samples a member index from the weights, then parameters from that
member's posterior, and outcomes from that member's likelihood.  The attack
algorithms themselves are reused unchanged -- the ensemble is packaged as a
(mixture likelihood, mixture backend) pair whose draws carry member tags.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..bayes.draws import DrawBatch, ParamDraw
from .point import PointAttackProblem, run_point_attack
from .ppd import run_ppd_attack


@dataclass(frozen=True)
class EnsembleMember:
    """One candidate model: a likelihood and a posterior draw backend."""

    likelihood: object
    backend: object


class ModelEnsemble:
    """Weighted collection of candidate models forming the attacker's view."""

    def __init__(self, members, weights=None):
        self.members = list(members)
        k = len(self.members)
        if k == 0:
            raise ValueError("ensemble must have at least one member")
        if weights is None:
            weights = np.full(k, 1.0 / k)
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (k,) or np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be a probability vector over members")
        self.weights = weights

    def __len__(self):
        return len(self.members)


class TaggedBatch:
    """Draw batch whose rows belong to (possibly different) ensemble members.

    Stored as per-member sub-batches plus the member id of each row, in draw
    order, so slicing preserves the sampling sequence (needed by the
    antithetic half split of the multilevel estimator).
    """

    def __init__(self, member_ids, sub_batches):
        self.member_ids = np.asarray(member_ids, dtype=int)
        self.sub = dict(sub_batches)  # member id -> DrawBatch, rows in draw order
        self._row_in_sub = np.empty(len(self.member_ids), dtype=int)
        for k in np.unique(self.member_ids):
            idx = np.nonzero(self.member_ids == k)[0]
            self._row_in_sub[idx] = np.arange(idx.size)

    def __len__(self):
        return len(self.member_ids)

    def positions(self, k):
        """Row indices of member ``k``'s draws within the batch order."""
        return np.nonzero(self.member_ids == k)[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            ids = self.member_ids[i]
            offset = range(*i.indices(len(self)))
            subs = {}
            for k in np.unique(ids):
                rows = [self._row_in_sub[j] for j in offset if self.member_ids[j] == k]
                b = self.sub[k]
                subs[k] = DrawBatch(b.beta[rows], b.phi[rows])
            return TaggedBatch(ids, subs)
        k = self.member_ids[i]
        return k, self.sub[k][self._row_in_sub[i]]

    def halves(self):
        m = len(self)
        if m % 2 != 0:
            raise ValueError("cannot halve a batch of odd size %d" % m)
        return self[: m // 2], self[m // 2 :]


class MixtureBackend:
    """Draw (member, parameters) pairs: member from the weights, parameters
    from that member's own backend."""

    def __init__(self, ensemble: ModelEnsemble):
        self.ensemble = ensemble

    def draw(self, count, rng):
        ids = rng.choice(len(self.ensemble), size=count, p=self.ensemble.weights)
        subs = {}
        for k in np.unique(ids):
            n_k = int((ids == k).sum())
            subs[int(k)] = self.ensemble.members[k].backend.draw(n_k, rng)
        return TaggedBatch(ids, subs)


class MixtureLikelihood:
    """Dispatch likelihood evaluations to the member that produced each draw."""

    def __init__(self, ensemble: ModelEnsemble, dim):
        self.ensemble = ensemble
        self.dim = int(dim)

    def _dispatch(self, method, x, y, tagged: TaggedBatch, width=None):
        m = len(tagged)
        out = np.empty(m) if width is None else np.empty((m, width))
        y_arr = np.broadcast_to(np.asarray(y, dtype=float), (m,))
        for k, sub in tagged.sub.items():
            pos = tagged.positions(k)
            fn = getattr(self.ensemble.members[k].likelihood, method)
            out[pos] = fn(x, y_arr[pos], sub)
        return out

    def loglik(self, x, y, tagged):
        return self._dispatch("loglik", x, y, tagged)

    def score_x(self, x, y, tagged):
        return self._dispatch("score_x", x, y, tagged, width=self.dim)

    def sample_y(self, x, tagged, rng):
        m = len(tagged)
        out = np.empty(m)
        for k, sub in tagged.sub.items():
            pos = tagged.positions(k)
            out[pos] = self.ensemble.members[k].likelihood.sample_y(x, sub, rng)
        return out


def bma_ppd_draw(ensemble: ModelEnsemble, x, rng):
    """One draw from the model-averaged predictive at ``x``.

    Returns ``(member_index, ParamDraw, y)``: the member sampled from the
    ensemble weights, the parameter draw from its posterior, and the outcome
    from its likelihood.
    """
    k = int(rng.choice(len(ensemble), p=ensemble.weights))
    member = ensemble.members[k]
    draw = member.backend.draw(1, rng)[0]
    y = member.likelihood.sample_y(np.asarray(x, dtype=float), draw, rng)
    return k, ParamDraw(beta=draw.beta, phi=draw.phi), float(np.asarray(y).reshape(-1)[0])


def graybox_views(ensemble: ModelEnsemble, dim):
    """The (likelihood, backend) pair that routes attacks through the ensemble."""
    return MixtureLikelihood(ensemble, dim), MixtureBackend(ensemble)


def graybox_point_attack(prob: PointAttackProblem, ensemble: ModelEnsemble, rng):
    """Run the point attack against the attacker's model-averaged view.

    The returned trace's iterates/objectives reflect the attacker's beliefs;
    evaluate the final point against the defender separately.
    """
    likelihood, backend = graybox_views(ensemble, prob.feasible.dim)
    attacker_prob = PointAttackProblem(
        g=prob.g, g_star=prob.g_star, model=likelihood, feasible=prob.feasible,
        eta=prob.eta, T=prob.T, N=prob.N, M=prob.M, eta_decay=prob.eta_decay,
        early_stop_tol=prob.early_stop_tol, smooth_window=prob.smooth_window,
    )
    return run_point_attack(attacker_prob, backend, rng)


def graybox_ppd_attack(appd, config, ensemble: ModelEnsemble, rng):
    """Run the distribution attack against the attacker's model-averaged view."""
    likelihood, backend = graybox_views(ensemble, config.feasible.dim)
    return run_ppd_attack(likelihood, appd, config, backend, rng)


def graybox_attack(prob_or_appd, ensemble: ModelEnsemble, rng, config=None):
    """Dispatch to the point or distribution gray-box attack.

    Pass a :class:`PointAttackProblem`, or an adversarial predictive target
    together with an :class:`~ppdattack.attacks.ppd.MlmcConfig` as ``config``.
    """
    if isinstance(prob_or_appd, PointAttackProblem):
        return graybox_point_attack(prob_or_appd, ensemble, rng)
    if config is None:
        raise ValueError("distribution attacks need an MlmcConfig as config=")
    return graybox_ppd_attack(prob_or_appd, config, ensemble, rng)
