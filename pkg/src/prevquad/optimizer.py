"""Inner quasi-Newton minimizer and the outer homotopy driver.

The smoothing scale is walked down a strictly decreasing schedule; each
stage's minimizer seeds the next. The inner solver is a dense BFGS with
backtracking line search (sufficient-decrease condition): exact Hessians of
the tanh loss are ill-conditioned at small smoothing scales, and accepted
steps are monotone by construction, so the returned point never has higher
loss than the start.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boundary import QuadricParams, hyperplane_init
from .errors import NonFiniteLoss
from .model import TrainingPopulation, validate_population
from .objective import SIGMA2_FLOOR, TrainingDesign

__all__ = [
    "SigmaSchedule",
    "MinimizeResult",
    "HomotopyResult",
    "sigma_schedule_from_data",
    "minimize",
    "homotopy_run",
]

DEFAULT_STAGES = 7  # schedule exponent range 0..K
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 500
BACKTRACK_FACTOR = 0.5
SUFFICIENT_DECREASE = 1e-4
MAX_BACKTRACKS = 60


@dataclass(frozen=True)
class SigmaSchedule:
    """Strictly decreasing smoothing scales, each at least the 1e-8 floor."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float).reshape(-1)
        if arr.size == 0:
            raise ValueError("schedule must contain at least one value")
        if np.any(arr < SIGMA2_FLOOR):
            raise ValueError(f"schedule values must be >= {SIGMA2_FLOOR}")
        if np.any(np.diff(arr) >= 0.0):
            raise ValueError("schedule must be strictly decreasing")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size


def sigma_schedule_from_data(pop: TrainingPopulation, K: int = DEFAULT_STAGES) -> SigmaSchedule:
    """Schedule |nu| * 10^-j for j = 0..K, clamped at the 1e-8 floor.

    |nu| is the distance between the class means, the characteristic length
    scale of the measurement space. Clamped entries are deduplicated so the
    schedule stays strictly decreasing.
    """
    validate_population(pop)
    if K < 0:
        raise ValueError("K must be >= 0")
    nu = pop.positives.mean(axis=0) - pop.negatives.mean(axis=0)
    length = float(np.linalg.norm(nu))
    if length < 1e-12:
        from .errors import DegenerateMeans

        raise DegenerateMeans("class means coincide (|mu_p - mu_n| < 1e-12)")
    values = np.maximum(length * 10.0 ** (-np.arange(K + 1.0)), SIGMA2_FLOOR)
    keep = np.concatenate([[True], np.diff(values) < 0.0])
    return SigmaSchedule(values=values[keep])


@dataclass
class MinimizeResult:
    x: np.ndarray
    fun: float
    grad_norm: float
    iterations: int
    converged: bool


def minimize(
    fun_and_grad,
    x0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    ftol: float | None = None,
) -> MinimizeResult:
    """BFGS with backtracking line search on ``fun_and_grad(x) -> (f, g)``.

    Stops when the gradient 2-norm drops to ``tol`` or after ``max_iter``
    accepted steps; accepted steps strictly decrease the objective, so
    ``result.fun <= f(x0)`` always. On a failed line search the inverse
    Hessian approximation is reset to the identity once; a second failure
    ends the run at the best iterate with ``converged=False``, unless the
    failure was caused by non-finite objective values, which raises
    NonFiniteLoss.

    ``ftol``, when given, adds a relative progress exit: three consecutive
    accepted steps each improving the objective by less than
    ``ftol * max(1, |f|)`` end the run early (used for heavily penalized
    problems whose gradient norm cannot reach ``tol``).
    """
    x = np.array(x0, dtype=float).reshape(-1)
    f, g = fun_and_grad(x)
    g = np.asarray(g, dtype=float)
    if not (np.isfinite(f) and np.isfinite(g).all()):
        raise NonFiniteLoss("objective is not finite at the starting point")

    n = x.size
    H = np.eye(n)
    reset_used = False
    iterations = 0
    slow_steps = 0

    while iterations < max_iter:
        grad_norm = float(np.linalg.norm(g))
        if grad_norm <= tol:
            return MinimizeResult(x, f, grad_norm, iterations, True)

        d = -H @ g
        dg = float(d @ g)
        if dg >= 0.0:
            # H lost positive definiteness; fall back to steepest descent
            H = np.eye(n)
            d = -g
            dg = -grad_norm**2

        step = 1.0
        accepted = False
        saw_nonfinite = False
        for _ in range(MAX_BACKTRACKS):
            x_new = x + step * d
            f_new, g_new = fun_and_grad(x_new)
            if not np.isfinite(f_new):
                saw_nonfinite = True
            # strict decrease on top of the Armijo bound: once the bound
            # rounds to f itself no step can make measurable progress, and
            # accepting f_new == f would stall the iteration
            elif f_new < f and f_new <= f + SUFFICIENT_DECREASE * step * dg:
                accepted = True
                break
            step *= BACKTRACK_FACTOR

        if not accepted:
            if not reset_used:
                reset_used = True
                H = np.eye(n)
                continue
            if saw_nonfinite:
                raise NonFiniteLoss(
                    "objective returned NaN/Inf during line search after reset"
                )
            return MinimizeResult(x, f, float(np.linalg.norm(g)), iterations, False)

        g_new = np.asarray(g_new, dtype=float)
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-10 * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
            Hy = H @ y
            H += ((sy + float(y @ Hy)) / sy**2) * np.outer(s, s)
            H -= (np.outer(Hy, s) + np.outer(s, Hy)) / sy
        progress = f - f_new
        x, f, g = x_new, f_new, g_new
        iterations += 1
        if ftol is not None:
            if progress < ftol * max(1.0, abs(f)):
                slow_steps += 1
                if slow_steps >= 3:
                    return MinimizeResult(
                        x, f, float(np.linalg.norm(g)), iterations, False
                    )
            else:
                slow_steps = 0

    grad_norm = float(np.linalg.norm(g))
    return MinimizeResult(x, f, grad_norm, iterations, grad_norm <= tol)


@dataclass
class HomotopyResult:
    """Per-stage minimizers, losses, and convergence flags of a homotopy run."""

    final_params: QuadricParams
    stage_params: list[QuadricParams] = field(default_factory=list)
    stage_losses: list[float] = field(default_factory=list)
    converged: list[bool] = field(default_factory=list)


def homotopy_run(
    pop: TrainingPopulation,
    q: float,
    phi0: QuadricParams,
    schedule: SigmaSchedule,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> HomotopyResult:
    """Minimize the scale-regularized smoothed loss down the schedule.

    Stage j minimizes at schedule.values[j] starting from the previous
    stage's minimizer (stage 0 from ``phi0``); deterministic for identical
    inputs.
    """
    validate_population(pop)
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    design = TrainingDesign(pop)
    design.check_params(phi0)

    x = phi0.params.copy()
    stage_params: list[QuadricParams] = []
    stage_losses: list[float] = []
    converged: list[bool] = []
    for sigma2 in schedule.values:
        result = minimize(
            lambda p: design.loss_and_grad(p, q, float(sigma2)),
            x,
            tol=tol,
            max_iter=max_iter,
        )
        x = result.x
        stage_params.append(QuadricParams(params=x.copy(), dim=pop.dim))
        stage_losses.append(result.fun)
        converged.append(result.converged)
    return HomotopyResult(
        final_params=stage_params[-1],
        stage_params=stage_params,
        stage_losses=stage_losses,
        converged=converged,
    )


def fit_boundary(
    pop: TrainingPopulation,
    q: float,
    K: int = DEFAULT_STAGES,
    phi0: QuadricParams | None = None,
    schedule: SigmaSchedule | None = None,
) -> HomotopyResult:
    """Convenience wrapper: homotopy from the hyperplane initializer.

    The schedule defaults to the data-driven one (|nu| * 10^-j, j = 0..K).
    """
    if phi0 is None:
        phi0 = hyperplane_init(pop)
    if schedule is None:
        schedule = sigma_schedule_from_data(pop, K)
    return homotopy_run(pop, q, phi0, schedule)
