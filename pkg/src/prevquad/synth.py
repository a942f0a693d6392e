"""Synthetic 2-D data with a known quadratic optimal boundary, and the
seeded Monte-Carlo study of boundary recovery versus sample size.

The two conditional densities share a standard-normal x marginal; the
vertical residual u = y - x^2 is standard normal around 0 for positives and
around -3 for negatives. Neither density is multivariate Gaussian, yet the
density ratio depends only on u, so every optimal boundary is the parabola

    y = x^2 - 1.5 - ln(q / (1 - q)) / 3,

and the prevalence function at a point is 1 / (1 + exp(3 u + 4.5)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boundary import QuadricParams
from .model import TestPopulation, TrainingPopulation
from .optimizer import SigmaSchedule, homotopy_run

__all__ = [
    "ConvergenceReport",
    "sample_parabolic",
    "parabolic_population",
    "parabolic_test_population",
    "true_boundary",
    "analytic_prevalence_function",
    "align_scale",
    "convergence_study",
]

VERTICAL_GAP = 3.0  # negatives sit at u = -3

# schedule used throughout the recovery study: 10^-1 .. 10^-5
STUDY_SCHEDULE = SigmaSchedule(values=10.0 ** -np.arange(1.0, 6.0))


def sample_parabolic(n: int, label: int, seed) -> np.ndarray:
    """Draw n measurements from the class-conditional parabolic density.

    x and the vertical residual are independent standard normals; negatives
    (label 0) are shifted down by 3 in the residual. ``seed`` may be an int
    or a numpy Generator.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    x = rng.standard_normal(n)
    u = rng.standard_normal(n)
    y = u + x**2 - (VERTICAL_GAP if label == 0 else 0.0)
    return np.column_stack([x, y])


def parabolic_population(n_n: int, n_p: int, seed) -> TrainingPopulation:
    """Labeled training population with n_n negatives and n_p positives."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return TrainingPopulation(
        negatives=sample_parabolic(n_n, 0, rng),
        positives=sample_parabolic(n_p, 1, rng),
    )


def parabolic_test_population(s: int, q: float, seed) -> TestPopulation:
    """Test population of size s with iid class labels drawn at prevalence q."""
    if s < 1:
        raise ValueError("s must be >= 1")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    labels = (rng.random(s) < q).astype(int)
    x = rng.standard_normal(s)
    u = rng.standard_normal(s)
    y = u + x**2 - VERTICAL_GAP * (labels == 0)
    return TestPopulation(samples=np.column_stack([x, y]), true_labels=labels)


def true_boundary(q: float) -> QuadricParams:
    """Packed quadric of the optimal boundary at prevalence weight q.

    Zero set y = x^2 - 1.5 - ln(q / (1-q)) / 3, signed so the region of
    larger vertical residual (the positive class side) has value > 0.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie strictly inside (0, 1), got {q}")
    c = 1.5 + np.log(q / (1.0 - q)) / VERTICAL_GAP
    A = np.array(
        [
            [-1.0, 0.0, 0.0],
            [0.0, 0.0, 0.5],
            [0.0, 0.5, c],
        ]
    )
    return QuadricParams.from_matrix(A)


def analytic_prevalence_function(r) -> float:
    """Exact prevalence-function value N/(N+P) at a point (test oracle)."""
    r = np.asarray(r, dtype=float).reshape(-1)
    u = r[1] - r[0] ** 2
    return 1.0 / (1.0 + np.exp(VERTICAL_GAP * u + 4.5))


def align_scale(target: np.ndarray, estimate: np.ndarray) -> np.ndarray:
    """Rescale ``estimate`` by the real scalar minimizing the Frobenius distance.

    Quadrics are defined only up to scale (and overall sign); the optimal
    scalar c = <target, estimate> / <estimate, estimate> absorbs both before
    matrices are compared entrywise.
    """
    denom = float(np.sum(estimate * estimate))
    if denom == 0.0:
        return estimate.copy()
    c = float(np.sum(target * estimate)) / denom
    return c * estimate


@dataclass(frozen=True)
class ConvergenceReport:
    """Mean squared Frobenius recovery error per sample size, with the
    fitted log-log slope."""

    sample_sizes: np.ndarray
    mean_sq_frobenius: np.ndarray
    replicates: int
    slope: float


def convergence_study(k_max: int, M: int, seed) -> ConvergenceReport:
    """Boundary recovery error versus sample size S = 200 * 2^k, k = 0..k_max.

    For each size, M replicate datasets (n_n = n_p = S/2) are drawn from
    independent child streams of the master seed; each is fitted at q = 1/2
    by the homotopy starting from the true boundary with the fixed
    10^-1..10^-5 schedule. The squared Frobenius distance between the true
    matrix and the scale-aligned estimate is averaged per size, and a
    least-squares line through (log S, log mean) gives the slope.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if M < 2:
        raise ValueError("M must be >= 2")
    target_params = true_boundary(0.5)
    target = target_params.matrix()
    sizes = 200 * 2 ** np.arange(k_max + 1)
    master = np.random.SeedSequence(seed)
    streams = master.spawn(len(sizes) * M)
    means = np.empty(len(sizes))
    for i, S in enumerate(sizes):
        half = int(S) // 2
        norms = np.empty(M)
        for rep in range(M):
            rng = np.random.default_rng(streams[i * M + rep])
            pop = parabolic_population(half, half, rng)
            result = homotopy_run(pop, 0.5, target_params, STUDY_SCHEDULE)
            estimate = align_scale(target, result.final_params.matrix())
            norms[rep] = float(np.sum((target - estimate) ** 2))
        means[i] = norms.mean()
    slope = float(np.polyfit(np.log(sizes), np.log(means), 1)[0])
    return ConvergenceReport(
        sample_sizes=sizes,
        mean_sq_frobenius=means,
        replicates=M,
        slope=slope,
    )
