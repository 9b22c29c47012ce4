"""Bayesian core: conjugate posteriors, likelihood families, draw backends."""

from .backends import ExactConjugate, McmcChain, SampleBank, adaptive_rwm, draw_params
from .conjugate import (
    GaussianPosterior,
    NigPosterior,
    NigPrior,
    TPredictive,
    gaussian_update,
    nig_update,
    ppd_normal_params,
    ppd_t_params,
    spd_inverse,
    spd_solve,
)
from .data import Dataset
from .draws import DrawBatch, ParamDraw, as_batch
from .likelihoods import (
    BernoulliLogit,
    CategoricalSoftmax,
    FeatureSubsetModel,
    GaussianLinear,
    SmallBnn,
    loglik,
    pdf_grad_x,
    sample_predictive,
    score_x,
)

__all__ = [
    "BernoulliLogit",
    "CategoricalSoftmax",
    "Dataset",
    "DrawBatch",
    "ExactConjugate",
    "FeatureSubsetModel",
    "GaussianLinear",
    "GaussianPosterior",
    "McmcChain",
    "NigPosterior",
    "NigPrior",
    "ParamDraw",
    "SampleBank",
    "SmallBnn",
    "TPredictive",
    "adaptive_rwm",
    "as_batch",
    "draw_params",
    "gaussian_update",
    "loglik",
    "nig_update",
    "pdf_grad_x",
    "ppd_normal_params",
    "ppd_t_params",
    "sample_predictive",
    "score_x",
    "spd_inverse",
    "spd_solve",
]
