"""Class-agnostic prevalence estimation and the two-pass test-data workflow.

The estimator needs only indicator rates over a fixed region D (here the
positive side of a fitted boundary): with Q~ the fraction of test samples in
D and N~, P~ the fractions of negative/positive training samples in D,

    q_hat = (Q~ - N~) / (P~ - N~).

No test sample is ever classified to produce q_hat; D merely has to separate
the class measures. The two-pass workflow fits a boundary at q = 1/2 to get
D, estimates q_hat, then refits at q = q_hat with the same initial point and
schedule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .boundary import BoundaryClassifier, classify_batch, hyperplane_init
from .errors import DegenerateSeparation
from .model import TestPopulation, TrainingPopulation, validate_population
from .optimizer import (
    DEFAULT_STAGES,
    HomotopyResult,
    homotopy_run,
    sigma_schedule_from_data,
)

__all__ = [
    "IndicatorRates",
    "PrevalenceEstimate",
    "indicator_rates",
    "estimate_prevalence",
    "two_pass_classify",
]


class IndicatorRates(NamedTuple):
    """Fractions classified positive: test samples, negatives, positives."""

    q_tilde: float
    n_tilde: float
    p_tilde: float


@dataclass(frozen=True)
class PrevalenceEstimate:
    """Estimated prevalence plus the indicator rates that produced it."""

    q_hat: float
    rates: IndicatorRates
    clamped: bool


def indicator_rates(
    clf: BoundaryClassifier, pop: TrainingPopulation, test: TestPopulation
) -> IndicatorRates:
    """Fraction of each sample set on the positive side of the boundary."""
    q_tilde = float(np.mean(classify_batch(clf, test.samples)))
    n_tilde = float(np.mean(classify_batch(clf, pop.negatives)))
    p_tilde = float(np.mean(classify_batch(clf, pop.positives)))
    return IndicatorRates(q_tilde, n_tilde, p_tilde)


def estimate_prevalence(rates: IndicatorRates) -> PrevalenceEstimate:
    """Invert the total-probability identity Q = q P_D + (1-q) N_D.

    The raw estimate is clamped to [0, 1] with ``clamped`` set: finite-sample
    rates legitimately produce values slightly outside.

    Raises
    ------
    DegenerateSeparation
        |p_tilde - n_tilde| <= 1e-12; the region cannot distinguish classes.
    """
    q_tilde, n_tilde, p_tilde = rates
    denom = p_tilde - n_tilde
    if abs(denom) <= 1e-12:
        raise DegenerateSeparation(
            f"indicator rates are equal (P~={p_tilde}, N~={n_tilde})"
        )
    raw = (q_tilde - n_tilde) / denom
    if raw < 0.0:
        return PrevalenceEstimate(0.0, rates, True)
    if raw > 1.0:
        return PrevalenceEstimate(1.0, rates, True)
    return PrevalenceEstimate(raw, rates, False)


def two_pass_classify(
    pop: TrainingPopulation,
    test: TestPopulation,
    K: int = DEFAULT_STAGES,
) -> tuple[PrevalenceEstimate, HomotopyResult]:
    """Estimate test prevalence, then refit the boundary at that prevalence.

    Pass 1 runs the homotopy at q = 1/2 from the hyperplane initializer; the
    positive side of its boundary is the region D for the rate estimates.
    Pass 2 reruns the homotopy at q = q_hat with the same initial point and
    schedule and its result is returned alongside the estimate.
    """
    validate_population(pop)
    phi0 = hyperplane_init(pop)
    schedule = sigma_schedule_from_data(pop, K)
    pass1 = homotopy_run(pop, 0.5, phi0, schedule)
    rates = indicator_rates(BoundaryClassifier(pass1.final_params), pop, test)
    estimate = estimate_prevalence(rates)
    pass2 = homotopy_run(pop, estimate.q_hat, phi0, schedule)
    return estimate, pass2
