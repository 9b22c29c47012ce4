"""Security evaluation sweeps: attack strength vs defender-evaluated damage.

``run_sep`` executes a grid of (epsilon, repetition, strategy) attack tasks and
records defender-evaluated metrics as flat records; aggregation to
mean +/- 2*SE bands is an independent pass over the records.  Every task seeds
its own generator from (seed, epsilon index, repetition, strategy index), so
the grid is order-independent, reproducible bit-for-bit, and safe to
parallelise externally.

Failures of a single task (e.g. a strategy that does not apply to the model)
are recorded as missing cells with a warning, never as an aborted sweep.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from ..analytic import (
    analytic_point_l2,
    analytic_point_linf,
    gaussian_kl,
    minimize_kl_multistart,
)
from ..attacks.baselines import fgsm_like
from ..attacks.feasible import FeasibleSet
from ..attacks.functionals import response_functional
from ..attacks.point import PointAttackProblem, grad_J, run_point_attack
from ..attacks.ppd import MlmcConfig, NormalAppd, mlmc_grad, run_ppd_attack
from ..bayes.conjugate import GaussianPosterior, NigPosterior
from .config import ExperimentConfig
from .data import gen_synthetic, load_dataset
from .predictor import BayesPredictor, fit_predictor


def _fmt(v):
    return repr(float(v))


@dataclass(frozen=True)
class SepRecord:
    """One defender-evaluated metric value for one attack task."""

    epsilon: float
    rep: int
    strategy: str
    metric: str
    value: float


@dataclass(frozen=True)
class SepAggregate:
    strategy: str
    metric: str
    epsilon: float
    n: int
    mean: float
    se: float
    two_se: float


def aggregate(records):
    """Mean and standard error per (strategy, metric, epsilon) cell.

    SE is the standard deviation over repetitions divided by sqrt(n); a single
    repetition gives SE = 0.
    """
    cells = {}
    for r in records:
        cells.setdefault((r.strategy, r.metric, r.epsilon), []).append(r.value)
    out = []
    for (strategy, metric, eps), vals in sorted(cells.items()):
        vals = np.asarray(vals, dtype=float)
        n = vals.size
        se = float(vals.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        out.append(
            SepAggregate(
                strategy=strategy, metric=metric, epsilon=eps, n=n,
                mean=float(vals.mean()), se=se, two_se=2.0 * se,
            )
        )
    return out


def write_sep_csv(records, path):
    """Raw records: columns epsilon, rep, strategy, metric, value."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epsilon", "rep", "strategy", "metric", "value"])
        for r in records:
            w.writerow([_fmt(r.epsilon), r.rep, r.strategy, r.metric, _fmt(r.value)])


def write_sep_summary_csv(aggregates, path):
    """Aggregated curve: columns strategy, metric, epsilon, n, mean, se, two_se."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["strategy", "metric", "epsilon", "n", "mean", "se", "two_se"])
        for a in aggregates:
            w.writerow(
                [a.strategy, a.metric, _fmt(a.epsilon), a.n, _fmt(a.mean), _fmt(a.se), _fmt(a.two_se)]
            )


def _task_rngs(seed, eps_idx, rep, strat_idx):
    ss = np.random.SeedSequence((int(seed), int(eps_idx), int(rep), int(strat_idx)))
    attack_ss, eval_ss = ss.spawn(2)
    return np.random.default_rng(attack_ss), np.random.default_rng(eval_ss)


def _clean_normal_params(defender: BayesPredictor, x):
    """(mean, variance) of the defender's predictive at x, exact when conjugate."""
    post = defender.posterior
    if isinstance(post, GaussianPosterior):
        return defender.predictive_normal_params(x)
    if isinstance(post, NigPosterior):
        t = defender.predictive_t(x)
        return t.loc, t.variance()
    raise TypeError("defender must carry a conjugate posterior")


def _instances(cfg: ExperimentConfig, defender, test):
    mode = cfg.attack.x0_mode
    if mode == "explicit":
        return [np.asarray(cfg.attack.x0, dtype=float)]
    if mode == "clean_mean":
        mu = defender.posterior.mu_n
        nrm2 = float(mu @ mu)
        if nrm2 == 0.0:
            raise ValueError("posterior mean is zero; cannot aim an instance")
        return [(cfg.attack.x0_value / nrm2) * mu]
    if test is None or test.n == 0:
        raise ValueError("x0_mode='test_sample' needs a test split")
    k = min(cfg.attack.x0_count, test.n)
    return [test.X[i].copy() for i in range(k)]


def _point_target(cfg: ExperimentConfig, train):
    if cfg.attack.target_mode == "times_mean_response":
        return float(cfg.attack.target) * float(train.y.mean())
    return float(cfg.attack.target)


def _point_problem(cfg, defender, feasible, g_star):
    opt = cfg.attack.optimizer
    return PointAttackProblem(
        g=response_functional(), g_star=np.array([g_star]), model=defender.likelihood,
        feasible=feasible, eta=opt.eta, T=opt.T, N=opt.N, M=opt.M, eta_decay=opt.eta_decay,
    )


def _mlmc_config(cfg, feasible, record_objective=False):
    m = cfg.attack.mlmc
    return MlmcConfig(
        feasible=feasible, eta=m.eta, T=m.T, M0=m.M0, tau=m.tau, R=m.R, Lmax=m.Lmax,
        B=m.B, untruncated=m.untruncated, eta_decay=m.eta_decay,
        record_objective=record_objective,
    )


def _attack_point_instance(strategy, cfg, defender, x0, g_star, eps, rng):
    if eps == 0.0:  # the feasible set is the singleton {x0}
        return np.asarray(x0, dtype=float).copy()
    feasible = FeasibleSet(center=x0, epsilon=eps, norm=cfg.attack.norm)
    if strategy == "analytic":
        if defender.posterior is None:
            raise TypeError("analytic strategy needs a conjugate defender")
        mu = defender.posterior.mu_n
        if cfg.attack.norm == "l2":
            return analytic_point_l2(mu, x0, g_star, eps).x_star
        if cfg.attack.norm == "linf":
            return analytic_point_linf(mu, x0, g_star, eps).x_star
        raise ValueError("no analytic point solution for norm %r" % cfg.attack.norm)
    prob = _point_problem(cfg, defender, feasible, g_star)
    if strategy == "sgd":
        return run_point_attack(prob, defender.backend, rng).final_x
    if strategy == "fgsm":
        gJ = grad_J(prob, x0, defender.backend, rng)
        return fgsm_like(x0, gJ, eps, norm=cfg.attack.norm)
    raise ValueError("unknown strategy %r" % strategy)


def _point_mean(defender, cfg, x, rng):
    if cfg.attack.metric_mode == "exact" and defender.posterior is not None:
        return _clean_normal_params(defender, x)[0]
    return defender.predictive_mean_mc(x, cfg.attack.n_eval, rng)


def _attack_ppd_instance(strategy, cfg, defender, x0, appd, eps, rng):
    if eps == 0.0:  # the feasible set is the singleton {x0}
        return np.asarray(x0, dtype=float).copy()
    feasible = FeasibleSet(center=x0, epsilon=eps, norm=cfg.attack.norm)
    if strategy == "analytic":
        if not isinstance(defender.posterior, GaussianPosterior):
            raise TypeError("deterministic KL benchmark needs a known-variance posterior")
        return minimize_kl_multistart(appd, defender.posterior, feasible, rng).x
    cfg_m = _mlmc_config(cfg, feasible)
    if strategy == "sgd":
        return run_ppd_attack(defender.likelihood, appd, cfg_m, defender.backend, rng).final_x
    if strategy == "fgsm":
        g = mlmc_grad(defender.likelihood, x0, appd, cfg_m, defender.backend, rng)
        return fgsm_like(x0, g, eps, norm=cfg.attack.norm)
    raise ValueError("unknown strategy %r" % strategy)


def _ppd_metrics(defender, cfg, x, appd, clean_params, rng):
    post = defender.posterior
    if isinstance(post, GaussianPosterior):
        m, v = defender.predictive_normal_params(x)
        kl_appd = gaussian_kl(appd.mean, appd.var, m, v)
        kl_clean = gaussian_kl(m, v, clean_params[0], clean_params[1])
        return {"kl-to-appd": kl_appd, "kl-to-clean-ppd": kl_clean, "pred-var": v}
    if isinstance(post, NigPosterior):
        induced = defender.predictive_t(x)
        clean = clean_params
        ys = appd.sample(cfg.attack.n_eval, rng)
        kl_appd = float(np.mean(appd.logpdf(ys) - induced.logpdf(ys)))
        ys2 = induced.sample(cfg.attack.n_eval, rng)
        kl_clean = float(np.mean(induced.logpdf(ys2) - clean.logpdf(ys2)))
        return {"kl-to-appd": kl_appd, "kl-to-clean-ppd": kl_clean,
                "pred-var": induced.variance()}
    raise TypeError("defender must carry a conjugate posterior")


@dataclass
class SepResult:
    records: list
    aggregates: list
    instances: list
    defender: BayesPredictor
    clean_targets: list  # per instance: g_star (point) or (appd, clean_params) (ppd)


def prepare_experiment(cfg: ExperimentConfig):
    """Build data, defender, attacked instances and targets for a config."""
    data_rng = np.random.default_rng(np.random.SeedSequence((int(cfg.seed), 771)))
    test = None
    if cfg.dataset.kind == "synthetic":
        train = gen_synthetic(
            cfg.dataset.n, cfg.dataset.beta, cfg.dataset.sigma2, data_rng,
            mode=cfg.dataset.mode, mixing=cfg.dataset.mixing,
        )
        if cfg.dataset.n_test:
            test = gen_synthetic(
                cfg.dataset.n_test, cfg.dataset.beta, cfg.dataset.sigma2, data_rng,
                mode=cfg.dataset.mode, mixing=cfg.dataset.mixing,
            )
    else:
        loaded = load_dataset(
            cfg.dataset.path, cfg.dataset.response, split=cfg.dataset.split,
            standardize=cfg.dataset.standardize, rng=data_rng,
        )
        train, test = loaded.train, loaded.test
    defender = fit_predictor(cfg.model, train)
    instances = _instances(cfg, defender, test)

    targets = []
    for x0 in instances:
        if cfg.attack.type == "point":
            targets.append(_point_target(cfg, train))
        else:
            m, v = _clean_normal_params(defender, x0)
            appd = NormalAppd(mean=m + cfg.attack.appd_mean_shift,
                              var=cfg.attack.appd_var_factor * v)
            targets.append((appd, (m, v)))
    return train, test, defender, instances, targets


def run_sep(cfg: ExperimentConfig) -> SepResult:
    """Run the full (epsilon x repetition x strategy) sweep for a config."""
    train, _, defender, instances, targets = prepare_experiment(cfg)
    grid = [float(e) for e in cfg.attack.eps_grid]
    records = []
    for ei, eps in enumerate(grid):
        for rep in range(cfg.attack.repeats):
            for si, strategy in enumerate(cfg.attack.strategies):
                rng_attack, rng_eval = _task_rngs(cfg.seed, ei, rep, si)
                try:
                    metrics = _run_task(cfg, defender, instances, targets, strategy,
                                        eps, rng_attack, rng_eval)
                except Exception as err:  # record a missing cell, keep sweeping
                    warnings.warn(
                        "strategy %r failed at eps=%g rep=%d: %s" % (strategy, eps, rep, err),
                        RuntimeWarning,
                    )
                    continue
                for metric, value in metrics.items():
                    records.append(SepRecord(eps, rep, strategy, metric, float(value)))
    return SepResult(
        records=records, aggregates=aggregate(records), instances=instances,
        defender=defender, clean_targets=targets,
    )


def _run_task(cfg, defender, instances, targets, strategy, eps, rng_attack, rng_eval):
    if cfg.attack.type == "point":
        residuals = []
        for x0, g_star in zip(instances, targets):
            x_adv = _attack_point_instance(strategy, cfg, defender, x0, g_star, eps, rng_attack)
            mean = _point_mean(defender, cfg, x_adv, rng_eval)
            residuals.append(mean - g_star)
        residuals = np.asarray(residuals)
        if len(instances) == 1:
            return {"residual2": float(residuals[0] ** 2)}
        return {"rmse-to-target": float(np.sqrt(np.mean(residuals**2)))}

    out = {}
    for i, (x0, (appd, clean_params)) in enumerate(zip(instances, targets)):
        x_adv = _attack_ppd_instance(strategy, cfg, defender, x0, appd, eps, rng_attack)
        metrics = _ppd_metrics(defender, cfg, x_adv, appd, clean_params, rng_eval)
        if len(instances) == 1:
            return metrics
        for k, v in metrics.items():
            out.setdefault(k, []).append(v)
    return {k: float(np.mean(v)) for k, v in out.items()}


def compare_graybox_residuals(seeds, eps_grid=(0.3, 0.5), n=1000, n_attacker=10,
                              beta=(-1.0, 2.0), sigma2=1.0, attacker_prior_precision=2.0,
                              clean_mean=-0.5, target=3.0, eta=0.05, T=400, N=64, M=64):
    """Paired white-box vs gray-box point attacks, defender-evaluated.

    Per seed, a defender posterior is fit on ``n`` points and an attacker
    posterior on a disjoint ``n_attacker``-point set from the same generator
    under a tighter prior.  Both attacks run the same stochastic optimizer;
    residuals are the defender's exact predictive means against the target.
    Returns one dict per (seed, epsilon) with both residuals.
    """
    from ..attacks.graybox import EnsembleMember, ModelEnsemble, graybox_point_attack
    from ..bayes.backends import ExactConjugate
    from ..bayes.conjugate import gaussian_update
    from ..bayes.likelihoods import GaussianLinear

    beta = np.asarray(beta, dtype=float)
    dim = beta.size
    model = GaussianLinear(dim)
    rows = []
    for seed in seeds:
        rng = np.random.default_rng(np.random.SeedSequence((int(seed), 33)))
        defender_data = gen_synthetic(n, beta, sigma2, rng)
        attacker_data = gen_synthetic(n_attacker, beta, sigma2, rng)
        post = gaussian_update(np.zeros(dim), np.eye(dim), sigma2,
                               defender_data.X, defender_data.y)
        post_attacker = gaussian_update(
            np.zeros(dim), attacker_prior_precision * np.eye(dim), sigma2,
            attacker_data.X, attacker_data.y,
        )
        mu = post.mu_n
        x0 = (clean_mean / float(mu @ mu)) * mu
        ensemble = ModelEnsemble([EnsembleMember(model, ExactConjugate(post_attacker))])
        for eps in eps_grid:
            prob = PointAttackProblem(
                g=response_functional(), g_star=np.array([float(target)]), model=model,
                feasible=FeasibleSet(center=x0, epsilon=float(eps), norm="l2"),
                eta=eta, T=T, N=N, M=M, eta_decay=True,
            )
            trace_white = run_point_attack(prob, ExactConjugate(post), rng)
            trace_gray = graybox_point_attack(prob, ensemble, rng)
            rows.append({
                "seed": int(seed), "epsilon": float(eps),
                "residual_white": abs(float(trace_white.final_x @ mu) - float(target)),
                "residual_gray": abs(float(trace_gray.final_x @ mu) - float(target)),
            })
    return rows


def compare_norm_sparsity(seeds, dim=8, n=400, eps=0.25, target_shift=2.0,
                          eta=0.02, T=300, N=64, M=64, zero_tol=1e-6):
    """Run the same point attack under L1 and L2 balls and count zeroed coordinates.

    For each seed a fresh synthetic regression problem is built; the report
    lists, per seed, how many perturbation coordinates stayed below
    ``zero_tol`` in absolute value under each geometry.  L1 projections zero
    coordinates exactly; L2 projections generically touch all of them.
    """
    reports = []
    for seed in seeds:
        rng = np.random.default_rng(np.random.SeedSequence((int(seed), 4242)))
        beta = np.linspace(0.2, 2.0, dim) * np.where(np.arange(dim) % 2 == 0, 1.0, -1.0)
        train = gen_synthetic(n, beta, 1.0, rng)
        from .config import ModelSpec

        defender = fit_predictor(ModelSpec(kind="gaussian_linear", sigma2=1.0), train)
        x0 = rng.standard_normal(dim) * 0.5
        m0, _ = defender.predictive_normal_params(x0)
        g_star = m0 + target_shift
        counts = {}
        for norm in ("l1", "l2"):
            feasible = FeasibleSet(center=x0, epsilon=eps, norm=norm)
            prob = PointAttackProblem(
                g=response_functional(), g_star=np.array([g_star]),
                model=defender.likelihood, feasible=feasible,
                eta=eta, T=T, N=N, M=M, eta_decay=True,
            )
            trace = run_point_attack(prob, defender.backend, rng)
            delta = trace.final_x - x0
            counts[norm] = int(np.sum(np.abs(delta) < zero_tol))
        reports.append({"seed": int(seed), "zeros_l1": counts["l1"], "zeros_l2": counts["l2"]})
    return reports
