"""Monotone families of boundaries over a prevalence grid and pointwise UQ.

Boundaries fitted independently at different prevalence weights can cross,
which makes pointwise class-probability statements inconsistent. The family
fit here adds a squared-hinge penalty that forces the boundary values at a
set of auxiliary "shadow" points to be non-decreasing along the grid, so the
assigned class at any point switches from 0 to 1 at most once as the
prevalence weight grows. The switch location brackets the underlying
prevalence function value at that point, and local accuracy follows from the
bracket by a closed-form identity.

Value-monotonicity at finitely many shadow points does not by itself
guarantee classifier monotonicity everywhere, so the fit also runs an
explicit post-fit class-switch check on a dense grid and surfaces failures
instead of silently trusting the penalty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .boundary import QuadricParams, hyperplane_init, quadric_eval_batch
from .errors import (
    BothZero,
    ConstraintNotSatisfied,
    DimensionMismatch,
    IndeterminateAccuracy,
    NonMonotoneFamily,
)
from .model import (
    TrainingPopulation,
    as_measurement,
    as_measurement_matrix,
    validate_population,
)
from .objective import TrainingDesign
from .optimizer import SigmaSchedule, homotopy_run, minimize

__all__ = [
    "LevelSetFamily",
    "UncertaintyBracket",
    "DEFAULT_Q_GRID",
    "shadow_grid",
    "monotonicity_penalty",
    "fit_levelsets",
    "classifier_monotonicity_violations",
    "prevalence_function_query",
    "local_accuracy_bracket",
    "prevalence_function_oracle",
    "local_accuracy",
]

VIOLATION_TOL = 1e-8
PENALTY_START = 1.0
PENALTY_GROWTH = 10.0
# residual violation of the squared-hinge penalty scales like 1/weight, and
# active constraints routinely need weights around 1e7-1e9 to squeeze the
# violation below VIOLATION_TOL, so the escalation budget sits well above that
PENALTY_MAX = 1e12
# smoothing scale of the joint polish: at fully annealed scales the risk
# terms are saturated (zero gradient almost everywhere) and the penalty can
# relocate boundaries freely, so the polish runs at a scale where the risk
# still anchors every boundary to the data; boundary values are pinned to
# unit mean square by the scale regularizer, so an absolute floor works
POLISH_SIGMA2 = 1e-3
CHECK_GRID_SIZE = 50
MAX_AUGMENT_ROUNDS = 6

# 19 levels, 0.05 .. 0.95 in steps of 0.05
DEFAULT_Q_GRID = np.round(np.arange(1, 20) * 0.05, 10)


@dataclass(frozen=True)
class LevelSetFamily:
    """Fitted boundaries indexed by a strictly increasing prevalence grid."""

    q_grid: np.ndarray
    params: list[QuadricParams]
    shadow_points: np.ndarray
    constraint_violation: float

    def __post_init__(self):
        grid = np.asarray(self.q_grid, dtype=float).reshape(-1)
        if grid.size == 0:
            raise ValueError("q_grid must be non-empty")
        if np.any(grid <= 0.0) or np.any(grid >= 1.0):
            raise ValueError("q_grid values must lie strictly inside (0, 1)")
        if np.any(np.diff(grid) <= 0.0):
            raise ValueError("q_grid must be strictly increasing")
        if len(self.params) != grid.size:
            raise ValueError("one parameter set per grid value is required")
        object.__setattr__(self, "q_grid", grid)
        object.__setattr__(
            self, "shadow_points", as_measurement_matrix(self.shadow_points)
        )

    @property
    def dim(self) -> int:
        return self.params[0].dim

    def boundary_values(self, r) -> np.ndarray:
        """Boundary value at ``r`` for every level, in grid order."""
        r = as_measurement(r)
        return np.array([float(quadric_eval_batch(p, r[None, :])[0]) for p in self.params])

    def classes(self, r) -> np.ndarray:
        """Assigned class at ``r`` for every level (value >= 0 means 1)."""
        return (self.boundary_values(r) >= 0.0).astype(int)


@dataclass(frozen=True)
class UncertaintyBracket:
    """Grid bracket [q_l, q_h] of the class switch, plus optional Z bounds."""

    q_l: float
    q_h: float
    z_low: float | None = None
    z_high: float | None = None


def shadow_grid(
    pop: TrainingPopulation, count_per_dim: int, extra=()
) -> np.ndarray:
    """Uniform grid over the training bounding box inflated by 10% per side.

    ``count_per_dim`` = 1 yields the single box center. ``extra`` points are
    appended verbatim (useful to pin down regions the uniform grid misses).
    """
    validate_population(pop)
    if count_per_dim < 1:
        raise ValueError("count_per_dim must be >= 1")
    data = pop.all_samples()
    lo = data.min(axis=0)
    hi = data.max(axis=0)
    span = hi - lo
    lo = lo - 0.1 * span
    hi = hi + 0.1 * span
    if count_per_dim == 1:
        axes = [np.array([(l + h) / 2.0]) for l, h in zip(lo, hi)]
    else:
        axes = [np.linspace(l, h, count_per_dim) for l, h in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.column_stack([ax.ravel() for ax in mesh])
    extra = list(extra)
    if extra:
        extra_arr = as_measurement_matrix(extra)
        if extra_arr.shape[1] != pop.dim:
            raise DimensionMismatch(
                f"extra shadow points have m={extra_arr.shape[1]}, expected {pop.dim}"
            )
        grid = np.vstack([grid, extra_arr])
    return grid


def monotonicity_penalty(
    params: list[QuadricParams] | np.ndarray, shadow: np.ndarray
) -> tuple[float, np.ndarray, float]:
    """Squared-hinge penalty on decreasing boundary values at shadow points.

    Returns the penalty value, its gradient as a (theta, P) array, and the
    largest single violation.
    """
    if isinstance(params, np.ndarray):
        Phi = np.atleast_2d(np.asarray(params, dtype=float))
    else:
        Phi = np.vstack([p.params for p in params])
    shadow = as_measurement_matrix(shadow)
    Zs = kernels.design_matrix(shadow) if shadow.size else np.zeros((0, Phi.shape[1]))
    return kernels.hinge_penalty(Zs, Phi)


def _joint_objective(design: TrainingDesign, q_grid, sigma2, Zs, lam):
    theta = len(q_grid)
    P = design.Zp.shape[1]

    def fun_and_grad(flat):
        Phi = flat.reshape(theta, P)
        total = 0.0
        grad = np.empty_like(Phi)
        for j in range(theta):
            risk, risk_grad, msq, msq_grad = design.risk_terms(
                Phi[j], float(q_grid[j]), sigma2
            )
            v = msq - 1.0
            total += risk + v * v
            grad[j] = risk_grad + (2.0 * v) * msq_grad
        pen, pen_grad, _ = kernels.hinge_penalty(Zs, Phi)
        total += lam * pen
        grad += lam * pen_grad
        return total, grad.ravel()

    return fun_and_grad


def _escalate_penalty(design, q_grid, sigma2, Zs, flat, lam, penalty_max):
    """Escalate the hinge weight tenfold until the worst violation is within
    tolerance; returns the polished parameters, violation, and final weight."""
    theta = len(q_grid)
    while True:
        result = minimize(
            _joint_objective(design, q_grid, sigma2, Zs, lam),
            flat,
            max_iter=2000,
            ftol=1e-14,
        )
        flat = result.x
        _, _, violation = kernels.hinge_penalty(Zs, flat.reshape(theta, -1))
        if violation <= VIOLATION_TOL:
            return flat, violation, lam
        if lam >= penalty_max:
            raise ConstraintNotSatisfied(violation)
        lam *= PENALTY_GROWTH


def fit_levelsets(
    pop: TrainingPopulation,
    q_grid,
    shadow,
    schedule: SigmaSchedule,
    phi0: QuadricParams | None = None,
    penalty_max: float = PENALTY_MAX,
    check_grid: int = CHECK_GRID_SIZE,
) -> LevelSetFamily:
    """Fit one boundary per grid prevalence, jointly constrained to be monotone.

    Each level is first fitted by an independent homotopy run (from ``phi0``,
    default the hyperplane initializer). A joint polish then minimizes the
    summed scale-regularized losses plus the shadow-point penalty, with the
    penalty weight escalated tenfold from 1 until the largest violation is
    at most 1e-8. The polish runs at the schedule's final smoothing scale
    floored at POLISH_SIGMA2: fully saturated risk terms exert no pull on
    the boundaries, which lets the penalty relocate them arbitrarily.

    Value ordering at finitely many shadow points can still leave class
    flips between them, so the polished family is checked for class
    monotonicity on a dense ``check_grid^m`` grid; any flipped grid points
    are appended to the shadow set and the polish reruns, up to a few
    rounds. The returned family records the augmented shadow set.

    Raises
    ------
    ConstraintNotSatisfied
        Escalation reached ``penalty_max`` with residual violation.
    NonMonotoneFamily
        Class flips survived the augmentation rounds (checked only when
        ``check_grid`` > 0).
    """
    validate_population(pop)
    q_grid = np.asarray(q_grid, dtype=float).reshape(-1)
    if q_grid.size == 0:
        raise ValueError("q_grid must be non-empty")
    theta = q_grid.size

    if phi0 is None:
        phi0 = hyperplane_init(pop)

    stage_results = [
        homotopy_run(pop, float(qj), phi0, schedule) for qj in q_grid
    ]
    shadow = as_measurement_matrix(shadow)
    if theta == 1:
        # constraint set is vacuous; the family is the single homotopy result
        return LevelSetFamily(
            q_grid=q_grid,
            params=[stage_results[0].final_params],
            shadow_points=shadow,
            constraint_violation=0.0,
        )
    if shadow.shape[0] == 0:
        raise ValueError("shadow points are required when fitting several levels")
    if shadow.shape[1] != pop.dim:
        raise DimensionMismatch(
            f"shadow points have m={shadow.shape[1]}, expected {pop.dim}"
        )

    design = TrainingDesign(pop)
    sigma2_polish = max(float(schedule.values[-1]), POLISH_SIGMA2)
    flat = np.vstack([res.final_params.params for res in stage_results]).ravel()

    if check_grid:
        axes = [
            np.linspace(shadow[:, i].min(), shadow[:, i].max(), check_grid)
            for i in range(pop.dim)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        eval_points = np.column_stack([ax.ravel() for ax in mesh])
    else:
        eval_points = None

    lam = PENALTY_START
    for round_idx in range(MAX_AUGMENT_ROUNDS):
        Zs = kernels.design_matrix(shadow)
        flat, violation, lam = _escalate_penalty(
            design, q_grid, sigma2_polish, Zs, flat, lam, penalty_max
        )
        family = LevelSetFamily(
            q_grid=q_grid,
            params=[
                QuadricParams(params=row.copy(), dim=pop.dim)
                for row in flat.reshape(theta, -1)
            ],
            shadow_points=shadow,
            constraint_violation=float(violation),
        )
        if eval_points is None:
            return family
        flipped = _class_flip_points(family, eval_points)
        if flipped.shape[0] == 0:
            return family
        # class flips between shadow points: enforce ordering there too and
        # rerun the polish from where it stands, resuming near the reached
        # penalty weight
        shadow = np.vstack([shadow, flipped])
        lam = max(PENALTY_START, lam / 100.0)

    raise NonMonotoneFamily(
        f"assigned class decreases with q at {flipped.shape[0]} of "
        f"{eval_points.shape[0]} grid points after {MAX_AUGMENT_ROUNDS} "
        "augmentation rounds"
    )


def _class_flip_points(family: LevelSetFamily, R: np.ndarray) -> np.ndarray:
    """Points of ``R`` whose assigned class decreases along the grid."""
    values = np.column_stack([quadric_eval_batch(p, R) for p in family.params])
    classes = values >= 0.0
    drops = classes[:, :-1] & ~classes[:, 1:]
    return R[np.any(drops, axis=1)]


def classifier_monotonicity_violations(family: LevelSetFamily, R) -> int:
    """Count points whose assigned class ever decreases along the grid."""
    R = as_measurement_matrix(R)
    values = np.column_stack(
        [quadric_eval_batch(p, R) for p in family.params]
    )
    classes = values >= 0.0
    drops = classes[:, :-1] & ~classes[:, 1:]
    return int(np.any(drops, axis=1).sum())


def prevalence_function_query(family: LevelSetFamily, r) -> UncertaintyBracket:
    """Bracket the prevalence at which the assigned class at ``r`` switches.

    Scans the grid: q_l is the largest grid value still assigning class 0 and
    q_h the smallest assigning class 1. If every level assigns class 1 the
    bracket is (0, q_1); if every level assigns class 0 it is (q_theta, 1).
    On a monotone family the switch is unique; a decreasing class sequence
    raises NonMonotoneFamily.
    """
    classes = family.classes(r)
    if np.any(np.diff(classes) < 0):
        raise NonMonotoneFamily(
            "assigned class decreases along the prevalence grid at this point"
        )
    if classes[0] == 1:
        return UncertaintyBracket(q_l=0.0, q_h=float(family.q_grid[0]))
    if classes[-1] == 0:
        return UncertaintyBracket(q_l=float(family.q_grid[-1]), q_h=1.0)
    switch = int(np.argmax(classes == 1))
    return UncertaintyBracket(
        q_l=float(family.q_grid[switch - 1]), q_h=float(family.q_grid[switch])
    )


def local_accuracy(q: float, q_point: float, assigned_class: int) -> float:
    """Probability the assignment at a point with switch level ``q_point`` is right.

    Z = [q (1 - q_point) 1{class=1} + (1 - q) q_point 1{class=0}]
        / [q (1 - q_point) + (1 - q) q_point].

    Raises IndeterminateAccuracy when the denominator vanishes (q_point at an
    extreme with q at the matching extreme).
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie strictly inside (0, 1), got {q}")
    if not 0.0 <= q_point <= 1.0:
        raise ValueError(f"q_point must lie in [0, 1], got {q_point}")
    if assigned_class not in (0, 1):
        raise ValueError(f"assigned_class must be 0 or 1, got {assigned_class}")
    pos_mass = q * (1.0 - q_point)
    neg_mass = (1.0 - q) * q_point
    denom = pos_mass + neg_mass
    if denom == 0.0:
        raise IndeterminateAccuracy(
            f"local accuracy is 0/0 at q={q}, q_point={q_point}"
        )
    return (pos_mass if assigned_class == 1 else neg_mass) / denom


def local_accuracy_bracket(
    family: LevelSetFamily, r, q: float
) -> UncertaintyBracket:
    """Class-switch bracket at ``r`` plus local-accuracy bounds at prevalence ``q``.

    The assigned class is read off the grid level nearest to ``q`` (ties go
    to the lower level); the Z bounds evaluate the local-accuracy identity at
    both bracket ends.
    """
    bracket = prevalence_function_query(family, r)
    j = int(np.argmin(np.abs(family.q_grid - q)))
    assigned = int(family.classes(r)[j])
    z_at = [
        local_accuracy(q, bracket.q_l, assigned),
        local_accuracy(q, bracket.q_h, assigned),
    ]
    return UncertaintyBracket(
        q_l=bracket.q_l,
        q_h=bracket.q_h,
        z_low=min(z_at),
        z_high=max(z_at),
    )


def prevalence_function_oracle(N_density: float, P_density: float) -> float:
    """N / (N + P): the prevalence at which a point with these conditional
    densities sits exactly on the optimal boundary. Test-side oracle for
    synthetic data where the densities are known."""
    if N_density < 0.0 or P_density < 0.0:
        raise ValueError("densities must be non-negative")
    if N_density == 0.0 and P_density == 0.0:
        raise BothZero("both conditional densities are zero")
    return N_density / (N_density + P_density)
