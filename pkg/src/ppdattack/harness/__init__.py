"""Experiment harness: configs, data, drivers, CSV emission, and the CLI."""

from .config import (
    AttackSpec,
    DatasetSpec,
    EntropySpec,
    ExperimentConfig,
    GradCheckSpec,
    MlmcSpec,
    ModelSpec,
    OptimizerSpec,
)
from .data import LoadedData, gen_synthetic, load_dataset, write_dataset_csv
from .entropy import (
    EntropyResult,
    entropy_experiment,
    entropy_of,
    predictive_probs,
    selective_accuracy,
)
from .gradcheck import (
    EstimatorCheck,
    GradCheckReport,
    run_gradcheck,
    validate_gradients,
    write_gradcheck_csv,
    write_gradcheck_samples_csv,
)
from .predictor import BayesPredictor, fit_predictor
from .sep import (
    SepAggregate,
    SepRecord,
    SepResult,
    aggregate,
    compare_graybox_residuals,
    compare_norm_sparsity,
    prepare_experiment,
    run_sep,
    write_sep_csv,
    write_sep_summary_csv,
)

__all__ = [
    "AttackSpec",
    "BayesPredictor",
    "DatasetSpec",
    "EntropyResult",
    "EntropySpec",
    "EstimatorCheck",
    "ExperimentConfig",
    "GradCheckReport",
    "GradCheckSpec",
    "LoadedData",
    "MlmcSpec",
    "ModelSpec",
    "OptimizerSpec",
    "SepAggregate",
    "SepRecord",
    "SepResult",
    "aggregate",
    "compare_graybox_residuals",
    "compare_norm_sparsity",
    "entropy_experiment",
    "entropy_of",
    "fit_predictor",
    "gen_synthetic",
    "load_dataset",
    "predictive_probs",
    "prepare_experiment",
    "run_gradcheck",
    "run_sep",
    "selective_accuracy",
    "validate_gradients",
    "write_dataset_csv",
    "write_gradcheck_csv",
    "write_gradcheck_samples_csv",
    "write_sep_csv",
    "write_sep_summary_csv",
]
