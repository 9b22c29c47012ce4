"""One-shot sign-step baseline attack."""

from __future__ import annotations

import warnings

import numpy as np

from .feasible import FeasibleSet


def fgsm_like(x, grad, eps, norm="linf"):
    """Single sign step ``x - eps * sign(grad)``, projected onto the ball.

    Under L-infinity the sign step already lies in the ball and the projection
    is the identity; under L2/L1 the step is projected back (radial scaling /
    sorted-threshold projection).  A zero gradient produces no movement and a
    warning, since the sign direction is undefined.
    """
    x = np.asarray(x, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if grad.shape != x.shape:
        raise ValueError("grad must have the same shape as x")
    if not np.all(np.isfinite(grad)):
        raise ValueError("non-finite gradient")
    if not np.any(grad):
        warnings.warn("zero gradient: sign step is undefined, returning x unchanged",
                      RuntimeWarning)
        return x.copy()
    feasible = FeasibleSet(center=x, epsilon=float(eps), norm=norm)
    return feasible.project(x - eps * np.sign(grad))
