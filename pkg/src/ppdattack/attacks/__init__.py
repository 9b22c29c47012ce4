"""Attack algorithms: point-functional, full-distribution, baselines, gray-box."""

from .baselines import fgsm_like
from .feasible import FeasibleSet, project, project_l1_ball
from .functionals import Functional, covariate_functional, onehot_functional, response_functional
from .graybox import (
    EnsembleMember,
    MixtureBackend,
    MixtureLikelihood,
    ModelEnsemble,
    TaggedBatch,
    bma_ppd_draw,
    graybox_attack,
    graybox_point_attack,
    graybox_ppd_attack,
    graybox_views,
)
from .point import (
    PointAttackProblem,
    estimate_grad_mu,
    estimate_mu,
    grad_J,
    gradient_samples,
    reparam_grad_mu,
    run_point_attack,
    run_point_attack_reparam,
)
from .ppd import (
    CategoricalAppd,
    MlmcConfig,
    NormalAppd,
    StudentTAppd,
    delta_level,
    expected_samples_per_iter,
    level_weights,
    mlmc_grad,
    ratio_grad,
    run_ppd_attack,
    simulate_sample_cost,
)
from .trace import AttackTrace

__all__ = [
    "AttackTrace",
    "CategoricalAppd",
    "EnsembleMember",
    "FeasibleSet",
    "Functional",
    "MixtureBackend",
    "MixtureLikelihood",
    "MlmcConfig",
    "ModelEnsemble",
    "NormalAppd",
    "PointAttackProblem",
    "StudentTAppd",
    "TaggedBatch",
    "bma_ppd_draw",
    "covariate_functional",
    "delta_level",
    "estimate_grad_mu",
    "estimate_mu",
    "expected_samples_per_iter",
    "fgsm_like",
    "grad_J",
    "gradient_samples",
    "graybox_attack",
    "graybox_point_attack",
    "graybox_ppd_attack",
    "graybox_views",
    "level_weights",
    "mlmc_grad",
    "onehot_functional",
    "project",
    "project_l1_ball",
    "ratio_grad",
    "reparam_grad_mu",
    "response_functional",
    "run_point_attack",
    "run_point_attack_reparam",
    "run_ppd_attack",
    "simulate_sample_cost",
]
