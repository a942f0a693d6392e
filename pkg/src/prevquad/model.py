"""Core data model: measurements, labeled training populations, test populations.

A measurement is a point in R^m (post-transform assay units). Coordinates are
stored as plain float64 arrays; the two training classes are kept in separate
arrays so the error objectives can iterate each class independently.
All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyClass, NonFiniteCoordinate

__all__ = [
    "LabeledSample",
    "TrainingPopulation",
    "TestPopulation",
    "as_measurement",
    "as_measurement_matrix",
    "validate_population",
]

NEGATIVE = 0
POSITIVE = 1


def as_measurement(r) -> np.ndarray:
    """Coerce a single measurement to a 1-D float64 vector."""
    arr = np.atleast_1d(np.asarray(r, dtype=float))
    if arr.ndim != 1:
        raise DimensionMismatch(f"a measurement must be a vector, got shape {arr.shape}")
    return arr


def as_measurement_matrix(rows) -> np.ndarray:
    """Coerce a sequence of measurements to an (n, m) float64 matrix.

    An empty sequence yields a (0, 0) matrix; ragged rows raise
    DimensionMismatch.
    """
    seq = list(rows) if not isinstance(rows, np.ndarray) else rows
    if len(seq) == 0:
        return np.empty((0, 0), dtype=float)
    try:
        arr = np.asarray(seq, dtype=float)
    except (ValueError, TypeError) as exc:
        raise DimensionMismatch(f"measurements have inconsistent shapes: {exc}") from exc
    arr = np.atleast_2d(arr)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected an (n, m) array, got shape {arr.shape}")
    return arr


class LabeledSample(NamedTuple):
    """A measurement together with its true class (0 negative, 1 positive)."""

    r: np.ndarray
    label: int


@dataclass(frozen=True)
class TrainingPopulation:
    """Labeled samples split by class: ``negatives`` (n_n, m), ``positives`` (n_p, m)."""

    negatives: np.ndarray
    positives: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "negatives", as_measurement_matrix(self.negatives))
        object.__setattr__(self, "positives", as_measurement_matrix(self.positives))

    @property
    def dim(self) -> int:
        if self.negatives.shape[0] > 0:
            return self.negatives.shape[1]
        return self.positives.shape[1]

    @property
    def n_negative(self) -> int:
        return self.negatives.shape[0]

    @property
    def n_positive(self) -> int:
        return self.positives.shape[0]

    def all_samples(self) -> np.ndarray:
        """Both classes stacked, negatives first."""
        return np.vstack([self.negatives, self.positives])

    @classmethod
    def from_labeled(cls, samples: Sequence[LabeledSample]) -> "TrainingPopulation":
        neg = [s.r for s in samples if s.label == NEGATIVE]
        pos = [s.r for s in samples if s.label == POSITIVE]
        return cls(negatives=neg, positives=pos)


@dataclass(frozen=True)
class TestPopulation:
    """Unlabeled samples (s, m); ``true_labels`` is optional, for validation only."""

    samples: np.ndarray
    true_labels: np.ndarray | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "samples", as_measurement_matrix(self.samples))
        if self.true_labels is not None:
            labels = np.asarray(self.true_labels, dtype=int)
            if labels.shape != (self.samples.shape[0],):
                raise DimensionMismatch(
                    f"true_labels length {labels.shape} does not match "
                    f"{self.samples.shape[0]} samples"
                )
            object.__setattr__(self, "true_labels", labels)

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]


def validate_population(pop: TrainingPopulation) -> None:
    """Check the training-population invariants, raising on the first violation.

    Raises
    ------
    EmptyClass
        One of the classes has no samples.
    DimensionMismatch
        The classes disagree on the measurement dimension m.
    NonFiniteCoordinate
        Any coordinate is NaN or infinite.
    """
    if pop.n_negative == 0 or pop.n_positive == 0:
        raise EmptyClass(
            f"both classes need samples (got {pop.n_negative} negative, "
            f"{pop.n_positive} positive)"
        )
    if pop.negatives.shape[1] != pop.positives.shape[1]:
        raise DimensionMismatch(
            f"negatives have m={pop.negatives.shape[1]} but positives have "
            f"m={pop.positives.shape[1]}"
        )
    if pop.dim < 1:
        raise DimensionMismatch("measurements must have at least one coordinate")
    for name, arr in (("negatives", pop.negatives), ("positives", pop.positives)):
        if not np.isfinite(arr).all():
            raise NonFiniteCoordinate(f"non-finite coordinate in {name}")
