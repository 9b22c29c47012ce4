"""Toy-scale predictive-entropy attacks on a softmax classifier.

The testbed is a 2-D Gaussian-blob classification problem: one blob per class
arranged on a circle, plus out-of-distribution (OOD) blobs placed further out
between the class directions.  A linear softmax classifier gets a Gaussian
prior on its weights and a random-walk Metropolis posterior, frozen into a
``SampleBank``.

Attacks reuse the point-attack machinery with the one-hot functional, whose
predictive expectation is the vector of posterior-predictive class
probabilities:

* entropy inflation on in-distribution points targets the uniform vector
  (1/p, ..., 1/p);
* entropy deflation on OOD points targets the one-hot vector of the clean
  modal class.

``entropy_experiment`` emits per-instance predictive-entropy records along
the epsilon grid and a selective-prediction accuracy curve (retain the
fraction ``f`` of lowest-entropy inputs, score accuracy; OOD inputs count as
errors whenever retained).  The epsilon = 0 column doubles as the clean
baseline.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp, xlogy

from ..attacks.feasible import FeasibleSet
from ..attacks.functionals import onehot_functional
from ..attacks.point import PointAttackProblem, run_point_attack
from ..bayes.backends import McmcChain
from ..bayes.likelihoods import CategoricalSoftmax
from .config import EntropySpec
from .sep import SepRecord


def class_directions(n_classes, rotation_deg=0.0):
    """Unit vectors at evenly spaced angles in the plane."""
    angles = 2.0 * np.pi * np.arange(n_classes) / n_classes
    angles = angles + np.deg2rad(rotation_deg)
    return np.stack([np.cos(angles), np.sin(angles)], axis=1)


def make_blob_data(spec: EntropySpec, rng):
    """Training covariates and labels: one Gaussian blob per class."""
    dirs = class_directions(spec.n_classes)
    X, y = [], []
    for k in range(spec.n_classes):
        center = np.zeros(spec.dim)
        center[:2] = spec.blob_radius * dirs[k]
        X.append(center + spec.blob_sd * rng.standard_normal((spec.n_per_class, spec.dim)))
        y.append(np.full(spec.n_per_class, k))
    return np.concatenate(X), np.concatenate(y).astype(int)


def make_eval_points(spec: EntropySpec, rng):
    """Held-out labelled ID points and unlabelled OOD points."""
    dirs_id = class_directions(spec.n_classes)
    dirs_ood = class_directions(spec.n_classes, rotation_deg=spec.ood_rotation_deg)
    X_id = np.empty((spec.n_id, spec.dim))
    y_id = np.empty(spec.n_id, dtype=int)
    for i in range(spec.n_id):
        k = i % spec.n_classes
        center = np.zeros(spec.dim)
        center[:2] = spec.blob_radius * dirs_id[k]
        X_id[i] = center + spec.blob_sd * rng.standard_normal(spec.dim)
        y_id[i] = k
    X_ood = np.empty((spec.n_ood, spec.dim))
    for i in range(spec.n_ood):
        k = i % spec.n_classes
        center = np.zeros(spec.dim)
        center[:2] = spec.ood_radius * dirs_ood[k]
        X_ood[i] = center + spec.blob_sd * rng.standard_normal(spec.dim)
    return X_id, y_id, X_ood


def fit_softmax_bank(spec: EntropySpec, X, y, rng):
    """Random-walk Metropolis posterior over flattened softmax weights.

    The log posterior is computed with one matrix product per proposal rather
    than through the per-draw likelihood API, which matters at chain length.
    """
    n_classes, dim = spec.n_classes, spec.dim
    Xt = np.asarray(X, dtype=float).T  # (dim, n)
    y = np.asarray(y, dtype=int)
    idx = np.arange(y.size)
    inv_two_var = 0.5 / spec.prior_sd**2

    def log_post(w):
        W = w.reshape(n_classes, dim)
        logits = W @ Xt  # (n_classes, n)
        ll = logits[y, idx] - logsumexp(logits, axis=0)
        return float(ll.sum()) - inv_two_var * float(w @ w)

    chain = McmcChain(
        log_post, np.zeros(n_classes * dim), step=spec.chain_step,
        burn_in=spec.chain_burn_in, thin=spec.chain_thin,
    )
    bank = chain.to_bank(spec.bank_size, rng)
    return bank, chain.last_accept_rate


def predictive_probs(model, backend, x, n, rng):
    """Monte-Carlo posterior-predictive class probabilities at ``x``."""
    batch = backend.draw(n, rng)
    return model.class_probs(x, batch).mean(axis=0)


def entropy_of(probs):
    """Shannon entropy in nats, with 0 * log 0 = 0."""
    return float(-xlogy(probs, probs).sum())


def selective_accuracy(entropies, correct, retention):
    """Accuracy over the ``retention`` fraction of lowest-entropy inputs."""
    entropies = np.asarray(entropies, dtype=float)
    correct = np.asarray(correct, dtype=float)
    k = max(1, int(np.ceil(retention * entropies.size)))
    order = np.argsort(entropies, kind="stable")
    return float(correct[order[:k]].mean())


def _attack_to_target(spec, model, backend, x0, target, eps, rng):
    if eps == 0.0:  # the feasible set is the singleton {x0}
        return np.asarray(x0, dtype=float).copy()
    prob = PointAttackProblem(
        g=onehot_functional(spec.n_classes), g_star=target, model=model,
        feasible=FeasibleSet(center=x0, epsilon=eps, norm=spec.norm),
        eta=spec.eta, T=spec.T, N=spec.N, M=spec.M, eta_decay=spec.eta_decay,
    )
    return run_point_attack(prob, backend, rng).final_x


class EntropyResult:
    def __init__(self, records, id_mean_entropy, ood_mean_entropy, selective,
                 ln_p, accept_rate, eps_grid):
        self.records = records
        self.id_mean_entropy = id_mean_entropy    # eps -> mean ID entropy
        self.ood_mean_entropy = ood_mean_entropy  # eps -> mean OOD entropy
        self.selective = selective                # (eps, retention) -> accuracy
        self.ln_p = ln_p
        self.accept_rate = accept_rate
        self.eps_grid = eps_grid


def entropy_experiment(spec: EntropySpec) -> EntropyResult:
    """Run inflation/deflation attacks along the epsilon grid and score them."""
    model = CategoricalSoftmax(spec.dim, spec.n_classes)
    ss = np.random.SeedSequence((int(spec.seed), 5150))
    rng_data, rng_eval_pts, rng_chain, rng_modal = (
        np.random.default_rng(c) for c in ss.spawn(4)
    )
    X, y = make_blob_data(spec, rng_data)
    X_id, y_id, X_ood = make_eval_points(spec, rng_eval_pts)
    bank, accept_rate = fit_softmax_bank(spec, X, y, rng_chain)

    p = spec.n_classes
    uniform = np.full(p, 1.0 / p)
    # Deflation target per OOD point: one-hot of its clean modal class.
    ood_targets = []
    for i in range(spec.n_ood):
        probs = predictive_probs(model, bank, X_ood[i], spec.entropy_draws, rng_modal)
        onehot = np.zeros(p)
        onehot[int(np.argmax(probs))] = 1.0
        ood_targets.append(onehot)

    grid = [float(e) for e in spec.eps_grid]
    records = []
    id_mean, ood_mean, selective = {}, {}, {}
    for ei, eps in enumerate(grid):
        pool_entropy, pool_correct = [], []
        id_vals, ood_vals = [], []
        for i in range(spec.n_id):
            task = np.random.SeedSequence((int(spec.seed), 31337, ei, 0, i))
            rng_a, rng_e = (np.random.default_rng(c) for c in task.spawn(2))
            x_adv = _attack_to_target(spec, model, bank, X_id[i], uniform, eps, rng_a)
            probs = predictive_probs(model, bank, x_adv, spec.entropy_draws, rng_e)
            h = entropy_of(probs)
            id_vals.append(h)
            records.append(SepRecord(eps, i, "sgd", "predictive-entropy-id", h))
            pool_entropy.append(h)
            pool_correct.append(1.0 if int(np.argmax(probs)) == int(y_id[i]) else 0.0)
        for i in range(spec.n_ood):
            task = np.random.SeedSequence((int(spec.seed), 31337, ei, 1, i))
            rng_a, rng_e = (np.random.default_rng(c) for c in task.spawn(2))
            x_adv = _attack_to_target(spec, model, bank, X_ood[i], ood_targets[i], eps, rng_a)
            probs = predictive_probs(model, bank, x_adv, spec.entropy_draws, rng_e)
            h = entropy_of(probs)
            ood_vals.append(h)
            records.append(SepRecord(eps, i, "sgd", "predictive-entropy-ood", h))
            pool_entropy.append(h)
            pool_correct.append(0.0)  # an accepted OOD input is always an error
        id_mean[eps] = float(np.mean(id_vals))
        ood_mean[eps] = float(np.mean(ood_vals))
        for f in spec.retention_grid:
            acc = selective_accuracy(pool_entropy, pool_correct, float(f))
            selective[(eps, float(f))] = acc
            records.append(SepRecord(eps, 0, "sgd", "selective-accuracy-%g" % f, acc))

    return EntropyResult(
        records=records, id_mean_entropy=id_mean, ood_mean_entropy=ood_mean,
        selective=selective, ln_p=float(np.log(p)), accept_rate=accept_rate,
        eps_grid=grid,
    )
