"""Prevalence-weighted error objectives and their analytic gradients.

Three pieces:

* ``empirical_error`` -- the raw prevalence-weighted misclassification rate,
  (q / n_p) * #{positives classified 0} + ((1-q) / n_n) * #{negatives
  classified 1}; piecewise constant in the parameters.
* ``smoothed_loss`` -- the same sum with the step function replaced by
  H(value / sigma^2), H(x) = 0.5 * (1 + tanh x). NOTE: the smoothing scale
  divides the boundary value as sigma^2, not sigma; this is easy to get wrong.
* ``scale_regularizer`` -- (mean-square boundary value over both classes - 1)^2,
  which pins the scale degree of freedom of the quadric so that sigma^2 alone
  controls the smoothing.

``total_loss`` is their sum (smoothed + scale); the regularizer is active at
every homotopy stage. Gradients are analytic (finite differences are
test-only oracles). All functions are pure; summation order is fixed, so
results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .boundary import BoundaryClassifier, QuadricParams, classify_batch
from .errors import DimensionMismatch
from .model import TrainingPopulation

__all__ = [
    "SIGMA2_FLOOR",
    "ObjectiveConfig",
    "TrainingDesign",
    "empirical_error",
    "smoothed_loss",
    "scale_regularizer",
    "total_loss",
    "total_loss_grad",
]

SIGMA2_FLOOR = 1e-8


@dataclass(frozen=True)
class ObjectiveConfig:
    """Prevalence weight q in [0, 1] and smoothing scale sigma2 (floored at 1e-8)."""

    q: float
    sigma2: float

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {self.q}")
        if not np.isfinite(self.sigma2) or self.sigma2 <= 0.0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if self.sigma2 < SIGMA2_FLOOR:
            object.__setattr__(self, "sigma2", SIGMA2_FLOOR)


class TrainingDesign:
    """Cached packed feature rows of a training population.

    Building the feature matrices once per population keeps repeated loss and
    gradient evaluations (the optimizer's inner loop) down to matrix-vector
    work in the kernel backend.
    """

    def __init__(self, pop: TrainingPopulation):
        self.dim = pop.dim
        self.n_negative = pop.n_negative
        self.n_positive = pop.n_positive
        self.Zn = kernels.design_matrix(pop.negatives)
        self.Zp = kernels.design_matrix(pop.positives)

    def check_params(self, phi: QuadricParams) -> None:
        if phi.dim != self.dim:
            raise DimensionMismatch(
                f"boundary has m={phi.dim} but population has m={self.dim}"
            )

    def risk_terms(self, params: np.ndarray, q: float, sigma2: float):
        return kernels.risk_terms(self.Zp, self.Zn, params, q, sigma2)

    def loss_and_grad(self, params: np.ndarray, q: float, sigma2: float):
        """Total loss (smoothed risk + scale regularizer) and its gradient."""
        risk, risk_grad, msq, msq_grad = self.risk_terms(params, q, sigma2)
        v = msq - 1.0
        return risk + v * v, risk_grad + (2.0 * v) * msq_grad


def empirical_error(clf: BoundaryClassifier, pop: TrainingPopulation, q: float) -> float:
    """Prevalence-weighted misclassification rate of the classifier on ``pop``."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    pos_wrong = int(np.sum(classify_batch(clf, pop.positives) == 0))
    neg_wrong = int(np.sum(classify_batch(clf, pop.negatives) == 1))
    return (q / pop.n_positive) * pos_wrong + ((1.0 - q) / pop.n_negative) * neg_wrong


def smoothed_loss(
    phi: QuadricParams, pop: TrainingPopulation, cfg: ObjectiveConfig
) -> float:
    """tanh-smoothed prevalence-weighted error at smoothing scale cfg.sigma2."""
    design = TrainingDesign(pop)
    design.check_params(phi)
    risk, _, _, _ = design.risk_terms(phi.params, cfg.q, cfg.sigma2)
    return risk


def scale_regularizer(phi: QuadricParams, pop: TrainingPopulation) -> float:
    """(sum of per-class mean-square boundary values - 1)^2."""
    design = TrainingDesign(pop)
    design.check_params(phi)
    _, _, msq, _ = design.risk_terms(phi.params, 0.5, 1.0)
    return (msq - 1.0) ** 2


def total_loss(
    phi: QuadricParams, pop: TrainingPopulation, cfg: ObjectiveConfig
) -> float:
    """smoothed_loss + scale_regularizer."""
    design = TrainingDesign(pop)
    design.check_params(phi)
    value, _ = design.loss_and_grad(phi.params, cfg.q, cfg.sigma2)
    return value


def total_loss_grad(
    phi: QuadricParams, pop: TrainingPopulation, cfg: ObjectiveConfig
) -> np.ndarray:
    """Analytic gradient of total_loss w.r.t. the packed parameters."""
    design = TrainingDesign(pop)
    design.check_params(phi)
    _, grad = design.loss_and_grad(phi.params, cfg.q, cfg.sigma2)
    return grad
