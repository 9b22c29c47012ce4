"""Gradient-estimator validation against closed-form oracles.

On the conjugate Gaussian testbed every gradient the attack loops consume has
an analytic counterpart:

* point objective J(x) = (E[y|x] - G*)^2 with E[y|x] = x @ mu_n, so
  grad J = 2 (x @ mu_n - G*) mu_n;
* cross-entropy objective -E_{pi_A}[log ppd(y|x)], whose gradient equals the
  closed-form gradient of KL(pi_A || ppd(x)).

``validate_gradients`` replicates each stochastic estimator many times, forms
per-coordinate z-scores of the replicate mean against the oracle, and reports
pass/fail at a configurable |z| threshold.  A deliberately biased variant
(the two factors of the product estimator fed from one shared batch, at a
small batch size) serves as a negative control: validation only counts if the
broken estimator is actually flagged.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from ..analytic import kl_normal_ppd_grad
from ..attacks.feasible import FeasibleSet
from ..attacks.functionals import response_functional
from ..attacks.point import (
    PointAttackProblem,
    estimate_mu,
    grad_J,
    reparam_grad_mu,
)
from ..attacks.ppd import MlmcConfig, NormalAppd, mlmc_grad
from ..bayes.backends import ExactConjugate
from ..bayes.conjugate import gaussian_update, ppd_normal_params
from ..bayes.likelihoods import GaussianLinear
from .config import GradCheckSpec
from .data import gen_synthetic

POSITIVE_ESTIMATORS = ("score", "reparam", "mlmc")
CONTROL_ESTIMATOR = "score-shared-batch"


def _fmt(v):
    return repr(float(v))


@dataclass(frozen=True)
class EstimatorCheck:
    """z-test of one estimator's replicate mean against one oracle coordinate."""

    estimator: str
    role: str  # "positive" or "control"
    coordinate: int
    replicates: int
    mean: float
    analytic: float
    se: float
    z: float
    within_threshold: bool


@dataclass
class GradCheckReport:
    checks: list
    z_threshold: float
    samples: dict  # estimator -> (replicates, dim) array of gradient draws
    oracles: dict  # estimator -> (dim,) analytic gradient
    control_included: bool

    @property
    def positives_ok(self):
        return all(c.within_threshold for c in self.checks if c.role == "positive")

    @property
    def control_detected(self):
        control = [c for c in self.checks if c.role == "control"]
        if not control:
            return None
        return any(not c.within_threshold for c in control)

    @property
    def passed(self):
        if not self.positives_ok:
            return False
        if self.control_included and self.control_detected is not True:
            return False
        return True


def _checks_for(estimator, role, draws, oracle, threshold):
    reps = draws.shape[0]
    mean = draws.mean(axis=0)
    se = draws.std(axis=0, ddof=1) / np.sqrt(reps)
    out = []
    for j in range(draws.shape[1]):
        sj = float(se[j])
        zj = (float(mean[j]) - float(oracle[j])) / sj if sj > 0 else np.inf
        out.append(
            EstimatorCheck(
                estimator=estimator, role=role, coordinate=j, replicates=reps,
                mean=float(mean[j]), analytic=float(oracle[j]), se=sj, z=float(zj),
                within_threshold=bool(abs(zj) <= threshold),
            )
        )
    return out


def _grad_J_reparam(prob, x, backend, rng):
    mu_hat = estimate_mu(prob, x, backend, rng)
    grad_mu = reparam_grad_mu(prob, x, backend, rng)
    return 2.0 * (mu_hat - prob.g_star) @ grad_mu


def build_testbed(spec: GradCheckSpec, data_rng):
    """Fit the known-variance posterior and aim the probe covariate."""
    train = gen_synthetic(spec.n, spec.beta, spec.sigma2, data_rng)
    dim = len(spec.beta)
    post = gaussian_update(
        np.zeros(dim), spec.prior_precision * np.eye(dim), spec.sigma2, train.X, train.y
    )
    mu = post.mu_n
    x0 = (spec.clean_mean / float(mu @ mu)) * mu
    return post, x0


def validate_gradients(spec: GradCheckSpec) -> GradCheckReport:
    """Replicate every estimator on the conjugate testbed and z-test the means."""
    ss = np.random.SeedSequence((int(spec.seed), 90210))
    rng_data, rng_score, rng_reparam, rng_mlmc, rng_control = (
        np.random.default_rng(c) for c in ss.spawn(5)
    )
    post, x0 = build_testbed(spec, rng_data)
    dim = x0.size
    model = GaussianLinear(dim)
    backend = ExactConjugate(post)
    feasible = FeasibleSet(center=x0, epsilon=1.0, norm="l2")

    m0, v0 = ppd_normal_params(post, x0)
    point_oracle = 2.0 * (m0 - spec.target) * post.mu_n
    appd = NormalAppd(mean=m0, var=spec.appd_var_factor * v0)
    mlmc_oracle = kl_normal_ppd_grad(appd, post, x0)

    prob = PointAttackProblem(
        g=response_functional(), g_star=np.array([spec.target]), model=model,
        feasible=feasible, N=spec.N, M=spec.M,
    )
    m = spec.mlmc
    cfg_m = MlmcConfig(
        feasible=feasible, M0=m.M0, tau=m.tau, R=m.R, Lmax=m.Lmax, B=m.B,
        untruncated=m.untruncated, record_objective=False,
    )

    reps = spec.replicates
    samples = {
        "score": np.stack([grad_J(prob, x0, backend, rng_score) for _ in range(reps)]),
        "reparam": np.stack([_grad_J_reparam(prob, x0, backend, rng_reparam) for _ in range(reps)]),
        "mlmc": np.stack([mlmc_grad(model, x0, appd, cfg_m, backend, rng_mlmc) for _ in range(reps)]),
    }
    oracles = {"score": point_oracle, "reparam": point_oracle, "mlmc": mlmc_oracle}

    checks = []
    for name in POSITIVE_ESTIMATORS:
        checks.extend(_checks_for(name, "positive", samples[name], oracles[name], spec.z_threshold))

    if spec.include_control:
        prob_ctrl = PointAttackProblem(
            g=response_functional(), g_star=np.array([spec.target]), model=model,
            feasible=feasible, N=spec.control_batch, M=spec.control_batch,
        )
        ctrl = np.stack(
            [grad_J(prob_ctrl, x0, backend, rng_control, shared_batch=True) for _ in range(reps)]
        )
        samples[CONTROL_ESTIMATOR] = ctrl
        oracles[CONTROL_ESTIMATOR] = point_oracle
        checks.extend(_checks_for(CONTROL_ESTIMATOR, "control", ctrl, point_oracle, spec.z_threshold))

    return GradCheckReport(
        checks=checks, z_threshold=spec.z_threshold, samples=samples,
        oracles=oracles, control_included=spec.include_control,
    )


def write_gradcheck_csv(report: GradCheckReport, path):
    """Summary table: estimator, role, coordinate, replicates, mean, analytic, se, z, within_threshold."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["estimator", "role", "coordinate", "replicates", "mean",
                    "analytic", "se", "z", "within_threshold"])
        for c in report.checks:
            w.writerow([c.estimator, c.role, c.coordinate, c.replicates, _fmt(c.mean),
                        _fmt(c.analytic), _fmt(c.se), _fmt(c.z), int(c.within_threshold)])


def write_gradcheck_samples_csv(report: GradCheckReport, path):
    """Histogram data: one row per (estimator, replicate, coordinate) gradient sample.

    The matching analytic value is repeated per row so a plotting script can
    draw the reference line without joining against the summary table.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["estimator", "replicate", "coordinate", "value", "analytic"])
        for name, arr in report.samples.items():
            oracle = report.oracles[name]
            for r in range(arr.shape[0]):
                for j in range(arr.shape[1]):
                    w.writerow([name, r, j, _fmt(arr[r, j]), _fmt(oracle[j])])


def run_gradcheck(spec: GradCheckSpec, write_samples=True):
    """Validate, write ``gradcheck.csv`` (and samples CSV) into the output dir."""
    report = validate_gradients(spec)
    os.makedirs(spec.output_dir, exist_ok=True)
    write_gradcheck_csv(report, os.path.join(spec.output_dir, "gradcheck.csv"))
    if write_samples:
        write_gradcheck_samples_csv(
            report, os.path.join(spec.output_dir, "gradcheck_samples.csv")
        )
    return report
