"""Data ingestion, the assay log-shift transform, and model persistence.

CSV files are UTF-8 with a header row; every non-label column must be
numeric and becomes one measurement coordinate, in header order. Models are
stored as versioned JSON; Python float repr round-trips bit-exactly, so a
write/read cycle preserves every value.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryClassifier, QuadricParams, quadric_eval_batch
from .errors import (
    DimensionMismatch,
    EmptyClass,
    IoError,
    NonFiniteCoordinate,
    ParseError,
    UnknownLabelValue,
    UnsupportedDimension,
)
from .levelset import LevelSetFamily
from .model import TestPopulation, TrainingPopulation, as_measurement
from .optimizer import SigmaSchedule

__all__ = [
    "LogShiftTransform",
    "ModelFile",
    "fit_transform",
    "apply_transform",
    "apply_transform_matrix",
    "read_csv",
    "write_csv",
    "write_model",
    "read_model",
    "export_boundary_contour",
]

MODEL_FORMAT = "prevquad-model"
MODEL_VERSION = 1
LOG_SHIFT_EPSILON = 0.01


@dataclass(frozen=True)
class LogShiftTransform:
    """Coordinate-wise x -> ln(epsilon + x - min), with per-coordinate minima
    taken over the negative training measurements and epsilon fixed at 0.01."""

    mins: np.ndarray
    epsilon: float = LOG_SHIFT_EPSILON

    def __post_init__(self):
        object.__setattr__(
            self, "mins", np.asarray(self.mins, dtype=float).reshape(-1)
        )


def fit_transform(pop: TrainingPopulation) -> LogShiftTransform:
    """Per-coordinate minima over the negative training samples."""
    if pop.n_negative == 0:
        raise EmptyClass("transform requires negative training samples")
    return LogShiftTransform(mins=pop.negatives.min(axis=0))


def apply_transform(t: LogShiftTransform, r) -> np.ndarray:
    """ln(epsilon + x_i - min_i) per coordinate of a single measurement."""
    r = as_measurement(r)
    if r.shape[0] != t.mins.shape[0]:
        raise DimensionMismatch(
            f"measurement has m={r.shape[0]} but transform expects m={t.mins.shape[0]}"
        )
    arg = t.epsilon + r - t.mins
    if np.any(arg <= 0.0):
        raise NonFiniteCoordinate(
            "log-shift argument <= 0; coordinate below the training minimum "
            f"by more than {t.epsilon}"
        )
    return np.log(arg)


def apply_transform_matrix(t: LogShiftTransform, R) -> np.ndarray:
    """Transform every row of an (n, m) measurement matrix."""
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if R.shape[1] != t.mins.shape[0]:
        raise DimensionMismatch(
            f"measurements have m={R.shape[1]} but transform expects m={t.mins.shape[0]}"
        )
    arg = t.epsilon + R - t.mins
    if np.any(arg <= 0.0):
        raise NonFiniteCoordinate(
            "log-shift argument <= 0 for at least one row"
        )
    return np.log(arg)


def _parse_cell(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(
            f"non-numeric cell {text!r} at row {row}, column {column!r}"
        ) from None
    return value


def read_csv(path, label_column: str | None = None):
    """Load measurements from a headed CSV file.

    With ``label_column`` naming an integer 0/1 column, rows are split into a
    TrainingPopulation; without it the file yields a TestPopulation.
    """
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file (header row required)") from None
        header = [h.strip() for h in header]
        label_idx = None
        if label_column is not None:
            if label_column not in header:
                raise ParseError(
                    f"{path}: label column {label_column!r} not in header {header}"
                )
            label_idx = header.index(label_column)
        feature_columns = [
            (i, name) for i, name in enumerate(header) if i != label_idx
        ]

        rows: list[list[float]] = []
        labels: list[int] = []
        for row_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: row {row_number} has {len(row)} cells, expected "
                    f"{len(header)}"
                )
            rows.append(
                [_parse_cell(row[i], row_number, name) for i, name in feature_columns]
            )
            if label_idx is not None:
                text = row[label_idx].strip()
                if text not in ("0", "1"):
                    raise UnknownLabelValue(
                        f"{path}: row {row_number} label {text!r} is not 0 or 1"
                    )
                labels.append(int(text))

    data = np.asarray(rows, dtype=float) if rows else np.empty((0, len(feature_columns)))
    if label_idx is None:
        return TestPopulation(samples=data)
    labels_arr = np.asarray(labels, dtype=int)
    return TrainingPopulation(
        negatives=data[labels_arr == 0].reshape(-1, len(feature_columns)),
        positives=data[labels_arr == 1].reshape(-1, len(feature_columns)),
    )


def write_csv(path, pop, label_column: str = "label", feature_names=None) -> None:
    """Write a training or test population with full-precision floats.

    Training populations always carry the label column; test populations
    carry it only when true labels are present.
    """
    if isinstance(pop, TrainingPopulation):
        data = pop.all_samples()
        labels = np.concatenate(
            [np.zeros(pop.n_negative, dtype=int), np.ones(pop.n_positive, dtype=int)]
        )
    elif isinstance(pop, TestPopulation):
        data = pop.samples
        labels = pop.true_labels
    else:
        raise TypeError(f"cannot write object of type {type(pop).__name__}")
    m = data.shape[1]
    if feature_names is None:
        feature_names = [f"x{i}" for i in range(m)]
    header = list(feature_names) + ([label_column] if labels is not None else [])
    try:
        handle = open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    with handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for i in range(data.shape[0]):
            row = [repr(float(v)) for v in data[i]]
            if labels is not None:
                row.append(str(int(labels[i])))
            writer.writerow(row)


@dataclass(frozen=True)
class ModelFile:
    """Everything needed to classify new data: dimension, optional transform,
    the prevalence weight used for fitting, the fitted boundary, the schedule,
    and (optionally) a fitted level-set family."""

    dim: int
    q: float
    params: QuadricParams
    sigma_schedule: SigmaSchedule
    transform: LogShiftTransform | None = None
    levelsets: LevelSetFamily | None = None


def _model_to_dict(model: ModelFile) -> dict:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "dim": model.dim,
        "q": model.q,
        "params": model.params.params.tolist(),
        "sigma_schedule": model.sigma_schedule.values.tolist(),
        "transform": None,
        "levelsets": None,
    }
    if model.transform is not None:
        doc["transform"] = {
            "mins": model.transform.mins.tolist(),
            "epsilon": model.transform.epsilon,
        }
    if model.levelsets is not None:
        fam = model.levelsets
        doc["levelsets"] = {
            "q_grid": fam.q_grid.tolist(),
            "params": [p.params.tolist() for p in fam.params],
            "shadow_points": fam.shadow_points.tolist(),
            "constraint_violation": fam.constraint_violation,
        }
    return doc


def _model_from_dict(doc: dict, path) -> ModelFile:
    if doc.get("format") != MODEL_FORMAT:
        raise ParseError(f"{path}: not a {MODEL_FORMAT} file")
    if doc.get("version") != MODEL_VERSION:
        raise ParseError(f"{path}: unsupported model version {doc.get('version')}")
    dim = int(doc["dim"])
    transform = None
    if doc.get("transform") is not None:
        transform = LogShiftTransform(
            mins=doc["transform"]["mins"], epsilon=float(doc["transform"]["epsilon"])
        )
    levelsets = None
    if doc.get("levelsets") is not None:
        ls = doc["levelsets"]
        shadow = ls["shadow_points"]
        levelsets = LevelSetFamily(
            q_grid=np.asarray(ls["q_grid"], dtype=float),
            params=[QuadricParams(params=p, dim=dim) for p in ls["params"]],
            shadow_points=np.asarray(shadow, dtype=float).reshape(-1, dim)
            if len(shadow)
            else np.empty((0, dim)),
            constraint_violation=float(ls["constraint_violation"]),
        )
    return ModelFile(
        dim=dim,
        q=float(doc["q"]),
        params=QuadricParams(params=doc["params"], dim=dim),
        sigma_schedule=SigmaSchedule(values=np.asarray(doc["sigma_schedule"])),
        transform=transform,
        levelsets=levelsets,
    )


def write_model(path, model: ModelFile) -> None:
    """Serialize a model as versioned JSON (floats round-trip bit-exactly)."""
    doc = _model_to_dict(model)
    try:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(doc, handle, indent=2)
            handle.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_model(path) -> ModelFile:
    try:
        with open(path, encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    return _model_from_dict(doc, path)


def export_boundary_contour(
    clf: BoundaryClassifier, bbox, resolution: int, path
) -> None:
    """Sample boundary values on a uniform 2-D grid and write (x, y, value) CSV.

    ``bbox`` is (xmin, xmax, ymin, ymax); the zero level set can then be
    contoured externally. Only defined for m = 2.
    """
    if clf.dim != 2:
        raise UnsupportedDimension(
            f"contour export requires m=2, model has m={clf.dim}"
        )
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    xmin, xmax, ymin, ymax = (float(v) for v in bbox)
    xs = np.linspace(xmin, xmax, resolution)
    ys = np.linspace(ymin, ymax, resolution)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    points = np.column_stack([gx.ravel(), gy.ravel()])
    values = quadric_eval_batch(clf.quadric, points)
    try:
        handle = open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    with handle:
        writer = csv.writer(handle)
        writer.writerow(["x", "y", "boundary_value"])
        for (x, y), v in zip(points, values):
            writer.writerow([repr(float(x)), repr(float(y)), repr(float(v))])
