"""Experiment configuration: JSON documents mapped onto validated dataclasses.

Each CLI subcommand takes a single JSON config file; ``--seed`` on the command
line overrides the ``seed`` field.  Unknown keys are rejected so typos fail
loudly instead of silently running defaults.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from ..attacks.feasible import NORMS


def _from_dict(cls, data, path):
    if not isinstance(data, dict):
        raise ValueError("config section '%s' must be an object" % path)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ValueError("unknown config keys in '%s': %s" % (path or "<root>", ", ".join(unknown)))
    return data


@dataclass
class DatasetSpec:
    """Where the data comes from: a synthetic generator or a CSV file."""

    kind: str = "synthetic"  # synthetic | csv
    n: int = 1000
    n_test: int = 0
    beta: tuple = (-1.0, 2.0)
    sigma2: float = 1.0
    mode: str = "independent"  # independent | correlated
    mixing: tuple = ((1.0, 2.0), (3.0, 4.0))  # covariate covariance is A^T A
    path: str = None
    response: str = None
    split: float = 0.7
    standardize: bool = False

    def validate(self):
        if self.kind not in ("synthetic", "csv"):
            raise ValueError("dataset.kind must be 'synthetic' or 'csv'")
        if self.kind == "synthetic":
            if self.n < 1:
                raise ValueError("dataset.n must be >= 1")
            if self.sigma2 <= 0:
                raise ValueError("dataset.sigma2 must be positive")
            if self.mode not in ("independent", "correlated"):
                raise ValueError("dataset.mode must be 'independent' or 'correlated'")
        else:
            if not self.path:
                raise ValueError("dataset.path is required for kind='csv'")
            if not self.response:
                raise ValueError("dataset.response is required for kind='csv'")
            if not 0.0 < self.split < 1.0:
                raise ValueError("dataset.split must be in (0, 1)")

    @classmethod
    def from_dict(cls, data, path="dataset"):
        spec = cls(**_from_dict(cls, data, path))
        spec.validate()
        return spec


@dataclass
class ModelSpec:
    """Defender/attacker model family and prior."""

    kind: str = "gaussian_linear"  # gaussian_linear | nig_linear
    sigma2: float = 1.0  # known noise variance (gaussian_linear)
    prior_mean: float = 0.0  # scalar broadcast over coefficients
    prior_precision: float = 1.0  # c: prior precision is c * I
    a0: float = 2.0
    b0: float = 2.0

    def validate(self):
        if self.kind not in ("gaussian_linear", "nig_linear"):
            raise ValueError("model.kind must be 'gaussian_linear' or 'nig_linear'")
        if self.sigma2 <= 0 or self.prior_precision <= 0:
            raise ValueError("model.sigma2 and model.prior_precision must be positive")
        if self.a0 <= 0 or self.b0 <= 0:
            raise ValueError("model.a0 and model.b0 must be positive")

    @classmethod
    def from_dict(cls, data, path="model"):
        spec = cls(**_from_dict(cls, data, path))
        spec.validate()
        return spec


@dataclass
class OptimizerSpec:
    """Projected-SGD settings for the point attack."""

    eta: float = 0.05
    T: int = 500
    N: int = 64
    M: int = 64
    eta_decay: bool = True

    def validate(self):
        if self.eta <= 0 or min(self.T, self.N, self.M) < 1:
            raise ValueError("optimizer needs eta > 0 and T, N, M >= 1")

    @classmethod
    def from_dict(cls, data, path="attack.optimizer"):
        spec = cls(**_from_dict(cls, data, path))
        spec.validate()
        return spec


@dataclass
class MlmcSpec:
    """Multilevel gradient settings for the distribution attack."""

    eta: float = 0.05
    T: int = 300
    M0: int = 8
    tau: float = 1.5
    R: int = 2
    Lmax: int = 6
    B: int = 1
    untruncated: bool = False
    eta_decay: bool = True

    def validate(self):
        if self.tau <= 1.0:
            raise ValueError("mlmc.tau must exceed 1 (finite expected cost)")
        if min(self.M0, self.R, self.B, self.T) < 1 or self.Lmax < 0:
            raise ValueError("mlmc sizes must be positive")

    @classmethod
    def from_dict(cls, data, path="attack.mlmc"):
        spec = cls(**_from_dict(cls, data, path))
        spec.validate()
        return spec


@dataclass
class AttackSpec:
    """What to attack and how to sweep it."""

    type: str = "point"  # point | ppd
    norm: str = "l2"
    eps_grid: tuple = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
    epsilon: float = None  # single-run intensity; defaults to max(eps_grid)
    repeats: int = 10
    target: float = 3.0  # point target G*
    target_mode: str = "absolute"  # absolute | times_mean_response
    appd_mean_shift: float = 0.0  # ppd target mean = clean mean + shift
    appd_var_factor: float = 4.0  # ppd target variance = factor * clean variance
    x0: tuple = None  # explicit attacked covariate vector
    x0_mode: str = "explicit"  # explicit | clean_mean | test_sample
    x0_value: float = -0.5  # clean predictive mean to aim the instance at
    x0_count: int = 5  # instances when x0_mode == test_sample
    strategies: tuple = ("analytic", "sgd", "fgsm")
    n_eval: int = 512
    metric_mode: str = "mc"  # mc | exact
    optimizer: OptimizerSpec = field(default_factory=OptimizerSpec)
    mlmc: MlmcSpec = field(default_factory=MlmcSpec)

    def validate(self):
        if self.type not in ("point", "ppd"):
            raise ValueError("attack.type must be 'point' or 'ppd'")
        if self.norm not in NORMS:
            raise ValueError("attack.norm must be one of %s" % (NORMS,))
        grid = tuple(float(e) for e in self.eps_grid)
        if not grid or any(e < 0 for e in grid) or list(grid) != sorted(grid):
            raise ValueError("attack.eps_grid must be a nondecreasing grid of nonnegative values")
        if self.repeats < 1:
            raise ValueError("attack.repeats must be >= 1")
        if self.x0_mode not in ("explicit", "clean_mean", "test_sample"):
            raise ValueError("attack.x0_mode must be explicit | clean_mean | test_sample")
        if self.x0_mode == "explicit" and self.x0 is None:
            raise ValueError("attack.x0 is required when x0_mode='explicit'")
        if self.target_mode not in ("absolute", "times_mean_response"):
            raise ValueError("attack.target_mode must be absolute | times_mean_response")
        if self.metric_mode not in ("mc", "exact"):
            raise ValueError("attack.metric_mode must be 'mc' or 'exact'")
        if self.n_eval < 2:
            raise ValueError("attack.n_eval must be >= 2")
        unknown = set(self.strategies) - {"analytic", "sgd", "fgsm"}
        if unknown:
            raise ValueError("unknown strategies: %s" % sorted(unknown))

    @classmethod
    def from_dict(cls, data, path="attack"):
        data = dict(_from_dict(cls, data, path))
        if "optimizer" in data:
            data["optimizer"] = OptimizerSpec.from_dict(data["optimizer"])
        if "mlmc" in data:
            data["mlmc"] = MlmcSpec.from_dict(data["mlmc"])
        spec = cls(**data)
        spec.validate()
        return spec


@dataclass
class ExperimentConfig:
    """Top-level config for the ``attack``, ``sweep`` and ``synth`` subcommands."""

    seed: int = 0
    output_dir: str = "."
    dataset: DatasetSpec = field(default_factory=DatasetSpec)
    model: ModelSpec = field(default_factory=ModelSpec)
    attack: AttackSpec = field(default_factory=AttackSpec)

    @classmethod
    def from_dict(cls, data):
        data = dict(_from_dict(cls, data, ""))
        if "dataset" in data:
            data["dataset"] = DatasetSpec.from_dict(data["dataset"])
        if "model" in data:
            data["model"] = ModelSpec.from_dict(data["model"])
        if "attack" in data:
            data["attack"] = AttackSpec.from_dict(data["attack"])
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class GradCheckSpec:
    """Config for the ``validate-gradients`` subcommand."""

    seed: int = 0
    output_dir: str = "."
    replicates: int = 10000
    n: int = 1000
    beta: tuple = (-1.0, 2.0)
    sigma2: float = 1.0
    prior_precision: float = 1.0
    clean_mean: float = -0.5
    target: float = 3.0
    N: int = 64
    M: int = 64
    appd_var_factor: float = 4.0
    control_batch: int = 4
    z_threshold: float = 4.0
    include_control: bool = True
    mlmc: MlmcSpec = field(default_factory=MlmcSpec)

    def validate(self):
        if self.replicates < 100:
            raise ValueError("gradcheck needs at least 100 replicates")
        if min(self.N, self.M, self.control_batch) < 2:
            raise ValueError("batch sizes must be >= 2")
        if self.z_threshold <= 0:
            raise ValueError("z_threshold must be positive")

    @classmethod
    def from_dict(cls, data):
        data = dict(_from_dict(cls, data, ""))
        if "mlmc" in data:
            data["mlmc"] = MlmcSpec.from_dict(data["mlmc"])
        spec = cls(**data)
        spec.validate()
        return spec

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class EntropySpec:
    """Config for the ``entropy`` subcommand (toy classifier experiment)."""

    seed: int = 0
    output_dir: str = "."
    n_classes: int = 3
    dim: int = 2
    n_per_class: int = 25
    blob_radius: float = 1.2
    blob_sd: float = 0.45
    ood_radius: float = 4.0
    ood_rotation_deg: float = 60.0
    n_id: int = 16
    n_ood: int = 16
    eps_grid: tuple = (0.0, 0.5, 1.0, 2.0)
    norm: str = "l2"
    prior_sd: float = 1.2
    chain_burn_in: int = 2000
    chain_thin: int = 5
    bank_size: int = 1200
    chain_step: float = 0.2
    eta: float = 0.3
    T: int = 300
    N: int = 192
    M: int = 192
    eta_decay: bool = False
    entropy_draws: int = 512
    retention_grid: tuple = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)

    def validate(self):
        if self.n_classes < 2 or self.dim < 2:
            raise ValueError("need n_classes >= 2 and dim >= 2")
        if self.norm not in NORMS:
            raise ValueError("entropy.norm must be one of %s" % (NORMS,))
        grid = tuple(float(e) for e in self.eps_grid)
        if not grid or grid[0] != 0.0 or list(grid) != sorted(grid):
            raise ValueError("entropy.eps_grid must start at 0 and be nondecreasing")
        if any(not 0 < f <= 1 for f in self.retention_grid):
            raise ValueError("retention fractions must lie in (0, 1]")

    @classmethod
    def from_dict(cls, data):
        spec = cls(**_from_dict(cls, data, ""))
        spec.validate()
        return spec

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
