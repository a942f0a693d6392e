"""Quadric boundary functions and the weighted-hyperplane initializer.

A boundary is the zero set of chi^T A chi with chi = (r, 1) and A a symmetric
(m+1) x (m+1) matrix. Parameters are stored as the packed upper triangle of A
(row-major), which enforces symmetry by construction and removes the
duplicated off-diagonal degrees of freedom. The value is linear in the packed
parameters, so the gradient w.r.t. them is just the packed feature row.

Sign convention: value > 0 means class 1 (positive); value == 0 is assigned
class 1 (the step function at 0 is fixed to 1 so tests are deterministic).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DegenerateMeans, DimensionMismatch, InsufficientSamples
from .model import TrainingPopulation, as_measurement, validate_population

__all__ = [
    "QuadricParams",
    "BoundaryClassifier",
    "packed_length",
    "quadric_eval",
    "quadric_eval_batch",
    "quadric_grad",
    "classify",
    "classify_batch",
    "hyperplane_init",
]


def packed_length(m: int) -> int:
    """Number of packed parameters for dimension m: (m+1)(m+2)/2."""
    return (m + 1) * (m + 2) // 2


@dataclass(frozen=True)
class QuadricParams:
    """Packed symmetric-matrix parameters of one quadric boundary."""

    params: np.ndarray
    dim: int

    def __post_init__(self):
        arr = np.ascontiguousarray(self.params, dtype=float).reshape(-1)
        object.__setattr__(self, "params", arr)
        if arr.shape[0] != packed_length(self.dim):
            raise DimensionMismatch(
                f"packed length {arr.shape[0]} does not match dimension "
                f"{self.dim} (expected {packed_length(self.dim)})"
            )

    @classmethod
    def from_matrix(cls, A) -> "QuadricParams":
        """Pack a square coefficient matrix (symmetrized as (A + A^T)/2)."""
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
        A = 0.5 * (A + A.T)
        d = A.shape[0]
        idx = np.triu_indices(d)
        return cls(params=A[idx], dim=d - 1)

    def matrix(self) -> np.ndarray:
        """Expand to the full symmetric (m+1) x (m+1) matrix."""
        d = self.dim + 1
        A = np.zeros((d, d))
        idx = np.triu_indices(d)
        A[idx] = self.params
        A.T[idx] = self.params
        return A

    def scaled(self, c: float) -> "QuadricParams":
        return QuadricParams(params=c * self.params, dim=self.dim)


@dataclass(frozen=True)
class BoundaryClassifier:
    """A quadric boundary with the fixed value>0 => class 1 convention."""

    quadric: QuadricParams

    @property
    def dim(self) -> int:
        return self.quadric.dim

    def classify(self, r) -> int:
        return classify(self, r)

    def classify_batch(self, R) -> np.ndarray:
        return classify_batch(self, R)


def _check_point(phi: QuadricParams, r) -> np.ndarray:
    r = as_measurement(r)
    if r.shape[0] != phi.dim:
        raise DimensionMismatch(
            f"measurement has m={r.shape[0]} but boundary expects m={phi.dim}"
        )
    return r


def quadric_eval(phi: QuadricParams, r) -> float:
    """Boundary value chi^T A chi at a single measurement."""
    r = _check_point(phi, r)
    z = kernels.design_matrix(r[None, :])
    return float(z[0] @ phi.params)


def quadric_eval_batch(phi: QuadricParams, R) -> np.ndarray:
    """Boundary values at each row of an (n, m) measurement matrix."""
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if R.shape[1] != phi.dim:
        raise DimensionMismatch(
            f"measurements have m={R.shape[1]} but boundary expects m={phi.dim}"
        )
    return kernels.eval_batch(kernels.design_matrix(R), phi.params)


def quadric_grad(phi: QuadricParams, r) -> np.ndarray:
    """Gradient of the boundary value w.r.t. the packed parameters.

    The value is linear in the packed parameters, so this is the packed
    feature row: chi_i^2 for diagonal entries, 2 chi_i chi_j off-diagonal.
    """
    r = _check_point(phi, r)
    return kernels.design_matrix(r[None, :])[0].copy()


def classify(clf: BoundaryClassifier, r) -> int:
    """1 if the boundary value is >= 0 (step at 0 fixed to 1), else 0."""
    return 1 if quadric_eval(clf.quadric, r) >= 0.0 else 0


def classify_batch(clf: BoundaryClassifier, R) -> np.ndarray:
    return (quadric_eval_batch(clf.quadric, R) >= 0.0).astype(int)


def hyperplane_init(pop: TrainingPopulation) -> QuadricParams:
    """Separating hyperplane through a covariance-weighted center of the classes.

    The normal is the difference of class means nu = mu_p - mu_n; the origin
    sits at mu_n + w_n / (w_n + w_p) * nu where w_k = sqrt(nu^T Cov_k nu)
    measures each class's spread along nu. The quadratic block of the
    returned parameters is exactly zero and the positive-class mean is on the
    value > 0 side.

    Raises
    ------
    InsufficientSamples
        Fewer than two samples in a class (covariance undefined).
    DegenerateMeans
        |nu| below 1e-12.
    """
    validate_population(pop)
    if pop.n_negative < 2 or pop.n_positive < 2:
        raise InsufficientSamples(
            "need at least two samples per class for covariance weights"
        )
    mu_n = pop.negatives.mean(axis=0)
    mu_p = pop.positives.mean(axis=0)
    nu = mu_p - mu_n
    if float(np.linalg.norm(nu)) < 1e-12:
        raise DegenerateMeans("class means coincide (|mu_p - mu_n| < 1e-12)")
    cov_n = np.cov(pop.negatives, rowvar=False, ddof=1).reshape(pop.dim, pop.dim)
    cov_p = np.cov(pop.positives, rowvar=False, ddof=1).reshape(pop.dim, pop.dim)
    w_n = float(np.sqrt(max(nu @ cov_n @ nu, 0.0)))
    w_p = float(np.sqrt(max(nu @ cov_p @ nu, 0.0)))
    if w_n + w_p <= 0.0:
        # both classes are point masses along nu; fall back to the midpoint
        frac = 0.5
    else:
        frac = w_n / (w_n + w_p)
    nu0 = mu_n + frac * nu
    m = pop.dim
    A = np.zeros((m + 1, m + 1))
    A[:m, m] = nu / 2.0
    A[m, :m] = nu / 2.0
    A[m, m] = -float(nu @ nu0)
    phi = QuadricParams.from_matrix(A)
    if quadric_eval(phi, mu_p) < 0.0:
        phi = phi.scaled(-1.0)
    return phi
