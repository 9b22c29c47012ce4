"""Dataset container used by the conjugate updates and the experiment harness."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Dataset:
    """A supervised dataset: covariate matrix ``X`` (n, p) and responses ``y`` (n,).

    Entries must be finite; shapes must agree.  ``column_names`` is optional
    metadata carried through from CSV ingestion.
    """

    X: np.ndarray
    y: np.ndarray
    column_names: tuple = field(default=())

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2:
            raise ValueError("X must be 2-D, got shape %s" % (X.shape,))
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError(
                "y must be 1-D with one row per X row (X %s vs y %s)" % (X.shape, y.shape)
            )
        if X.size and not np.all(np.isfinite(X)):
            raise ValueError("non-finite entries in X")
        if y.size and not np.all(np.isfinite(y)):
            raise ValueError("non-finite entries in y")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]
