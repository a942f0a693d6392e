"""Command-line front end.

Subcommands:

* ``synth``      generate labeled synthetic CSV data with a curved optimal boundary
* ``train``      fit a boundary at a given (or training) prevalence weight
* ``classify``   apply a stored model to a test CSV
* ``prevalence`` two-pass prevalence estimation plus refit
* ``levelsets``  fit a monotone boundary family over a prevalence grid
* ``converge``   boundary-recovery error versus sample size

All randomness flows from ``--seed``; runs with fixed seeds and inputs are
reproducible bit for bit. Exit codes: 0 success, 1 module error (the error
type is printed to stderr), 2 flag errors.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import pipeline
from .boundary import BoundaryClassifier, hyperplane_init, quadric_eval_batch
from .errors import PrevquadError, UnsupportedDimension
from .levelset import (
    DEFAULT_Q_GRID,
    fit_levelsets,
    local_accuracy_bracket,
    shadow_grid,
)
from .model import TestPopulation, TrainingPopulation, validate_population
from .objective import empirical_error
from .optimizer import DEFAULT_STAGES, homotopy_run, sigma_schedule_from_data
from .prevalence import two_pass_classify
from .synth import convergence_study, parabolic_test_population
from .pipeline import ModelFile

__all__ = ["run", "main"]


def _parse_q_grid(spec: str) -> np.ndarray:
    """Parse 'start:stop:step' or a comma-separated list of levels."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid spec {spec!r} must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        count = int(round((stop - start) / step)) + 1
        grid = start + step * np.arange(count)
        grid = grid[(grid > 0.0) & (grid < 1.0)]
        return np.round(grid, 12)
    return np.asarray([float(p) for p in spec.split(",")], dtype=float)


def _parse_points(spec: str) -> list[list[float]]:
    """Parse 'x,y;x,y;...' into a list of points."""
    points = []
    for chunk in spec.split(";"):
        chunk = chunk.strip()
        if chunk:
            points.append([float(v) for v in chunk.split(",")])
    return points


def _load_training(args) -> TrainingPopulation:
    pop = pipeline.read_csv(args.train, label_column=args.label)
    if isinstance(pop, TestPopulation):
        raise PrevquadError("training file needs a label column (--label)")
    validate_population(pop)
    return pop


def _maybe_transform(pop, args):
    """Fit/apply the log-shift transform when --log-shift is given."""
    if not getattr(args, "log_shift", False):
        return pop, None
    transform = pipeline.fit_transform(pop)
    transformed = TrainingPopulation(
        negatives=pipeline.apply_transform_matrix(transform, pop.negatives),
        positives=pipeline.apply_transform_matrix(transform, pop.positives),
    )
    return transformed, transform


def _cmd_synth(args) -> int:
    test = parabolic_test_population(args.n, args.q, args.seed)
    pipeline.write_csv(args.out, test, label_column="label")
    n_pos = int(test.true_labels.sum())
    print(f"wrote {args.n} samples ({n_pos} positive) to {args.out}")
    return 0


def _contour_bbox(pop: TrainingPopulation):
    data = pop.all_samples()
    lo = data.min(axis=0)
    hi = data.max(axis=0)
    span = hi - lo
    lo -= 0.1 * span
    hi += 0.1 * span
    return lo[0], hi[0], lo[1], hi[1]


def _cmd_train(args) -> int:
    pop = _load_training(args)
    pop, transform = _maybe_transform(pop, args)
    q = args.q if args.q is not None else pop.n_positive / (
        pop.n_positive + pop.n_negative
    )
    phi0 = hyperplane_init(pop)
    schedule = sigma_schedule_from_data(pop, args.K)
    result = homotopy_run(pop, q, phi0, schedule)
    err0 = empirical_error(BoundaryClassifier(phi0), pop, q)
    err = empirical_error(BoundaryClassifier(result.final_params), pop, q)
    print(f"prevalence weight: {q:.6f}")
    print(f"initial empirical error: {err0:.6f}")
    print(f"final empirical error: {err:.6f}")
    model = ModelFile(
        dim=pop.dim,
        q=float(q),
        params=result.final_params,
        sigma_schedule=schedule,
        transform=transform,
    )
    pipeline.write_model(args.model, model)
    print(f"model written to {args.model}")
    if args.contour:
        pipeline.export_boundary_contour(
            BoundaryClassifier(result.final_params),
            _contour_bbox(pop),
            args.resolution,
            args.contour,
        )
        print(f"contour written to {args.contour}")
    return 0


def _cmd_classify(args) -> int:
    model = pipeline.read_model(args.model)
    test = pipeline.read_csv(args.test)
    if not isinstance(test, TestPopulation):
        raise PrevquadError("classify expects an unlabeled test CSV")
    samples = test.samples
    if model.transform is not None:
        samples = pipeline.apply_transform_matrix(model.transform, samples)
    clf = BoundaryClassifier(model.params)
    values = quadric_eval_batch(model.params, samples)
    classes = (values >= 0.0).astype(int)

    import csv as _csv

    with open(args.out, "w", newline="", encoding="utf-8") as handle:
        writer = _csv.writer(handle)
        header = ["class", "boundary_value"]
        if model.levelsets is not None:
            header += ["q_low", "q_high", "z_low", "z_high"]
        writer.writerow(header)
        for i in range(samples.shape[0]):
            row = [int(classes[i]), repr(float(values[i]))]
            if model.levelsets is not None:
                bracket = local_accuracy_bracket(
                    model.levelsets, samples[i], model.q
                )
                row += [
                    repr(bracket.q_l),
                    repr(bracket.q_h),
                    repr(bracket.z_low),
                    repr(bracket.z_high),
                ]
            writer.writerow(row)
    print(f"classified {samples.shape[0]} samples -> {args.out}")
    return 0


def _cmd_prevalence(args) -> int:
    pop = _load_training(args)
    pop, transform = _maybe_transform(pop, args)
    test = pipeline.read_csv(args.test)
    samples = test.samples
    if transform is not None:
        samples = pipeline.apply_transform_matrix(transform, samples)
        test = TestPopulation(samples=samples)
    estimate, refit = two_pass_classify(pop, test, K=args.K)
    print(f"estimated prevalence: {estimate.q_hat:.6f}")
    print(
        f"rates: test={estimate.rates.q_tilde:.6f} "
        f"negatives={estimate.rates.n_tilde:.6f} "
        f"positives={estimate.rates.p_tilde:.6f}"
    )
    if estimate.clamped:
        print("note: raw estimate fell outside [0, 1] and was clamped")
    if args.model:
        model = ModelFile(
            dim=pop.dim,
            q=estimate.q_hat,
            params=refit.final_params,
            sigma_schedule=sigma_schedule_from_data(pop, args.K),
            transform=transform,
        )
        pipeline.write_model(args.model, model)
        print(f"model written to {args.model}")
    return 0


def _cmd_levelsets(args) -> int:
    pop = _load_training(args)
    pop, transform = _maybe_transform(pop, args)
    q_grid = _parse_q_grid(args.q_grid) if args.q_grid else DEFAULT_Q_GRID
    extra = _parse_points(args.shadow_extra) if args.shadow_extra else []
    shadow = shadow_grid(pop, args.shadow_count, extra)
    schedule = sigma_schedule_from_data(pop, args.K)
    family = fit_levelsets(pop, q_grid, shadow, schedule)
    print(
        f"fitted {len(family.params)} levels; max shadow violation "
        f"{family.constraint_violation:.3e}"
    )
    q_mid = float(q_grid[len(q_grid) // 2])
    mid_params = family.params[len(q_grid) // 2]
    model = ModelFile(
        dim=pop.dim,
        q=q_mid,
        params=mid_params,
        sigma_schedule=schedule,
        transform=transform,
        levelsets=family,
    )
    pipeline.write_model(args.model, model)
    print(f"model written to {args.model}")
    if args.contour_dir:
        import os

        os.makedirs(args.contour_dir, exist_ok=True)
        bbox = _contour_bbox(pop)
        try:
            for qj, pj in zip(family.q_grid, family.params):
                out = os.path.join(args.contour_dir, f"level_{qj:.2f}.csv")
                pipeline.export_boundary_contour(
                    BoundaryClassifier(pj), bbox, args.resolution, out
                )
            print(f"level contours written to {args.contour_dir}")
        except UnsupportedDimension:
            print("contours skipped (only defined for 2-D data)", file=sys.stderr)
    return 0


def _cmd_converge(args) -> int:
    report = convergence_study(args.k_max, args.replicates, args.seed)
    import csv as _csv

    with open(args.out, "w", newline="", encoding="utf-8") as handle:
        writer = _csv.writer(handle)
        writer.writerow(["S", "mean_sq_frobenius"])
        for s, v in zip(report.sample_sizes, report.mean_sq_frobenius):
            writer.writerow([int(s), repr(float(v))])
    print(f"log-log slope: {report.slope:.4f}")
    print(f"report written to {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prevquad",
        description="Prevalence-weighted quadric boundaries with level-set "
        "uncertainty for diagnostic data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic labeled data")
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--q", type=float, default=0.5, help="true prevalence")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="fit a classification boundary")
    p.add_argument("--train", required=True, help="training CSV")
    p.add_argument("--label", required=True, help="label column name")
    p.add_argument("--q", type=float, default=None, help="prevalence weight")
    p.add_argument("--K", type=int, default=DEFAULT_STAGES, help="schedule depth")
    p.add_argument("--log-shift", action="store_true", help="apply the assay log transform")
    p.add_argument("--model", required=True, help="output model path")
    p.add_argument("--contour", default=None, help="optional boundary contour CSV")
    p.add_argument("--resolution", type=int, default=200, help="contour grid size")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("classify", help="apply a model to test data")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True, help="unlabeled test CSV")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("prevalence", help="two-pass prevalence estimation")
    p.add_argument("--train", required=True)
    p.add_argument("--label", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--K", type=int, default=DEFAULT_STAGES)
    p.add_argument("--log-shift", action="store_true")
    p.add_argument("--model", default=None, help="optional refit model output")
    p.set_defaults(func=_cmd_prevalence)

    p = sub.add_parser("levelsets", help="fit a monotone boundary family")
    p.add_argument("--train", required=True)
    p.add_argument("--label", required=True)
    p.add_argument("--q-grid", default=None, help="start:stop:step or q1,q2,...")
    p.add_argument("--shadow-count", type=int, default=10, help="shadow grid per-axis count")
    p.add_argument("--shadow-extra", default=None, help="extra points 'x,y;x,y'")
    p.add_argument("--K", type=int, default=DEFAULT_STAGES)
    p.add_argument("--log-shift", action="store_true")
    p.add_argument("--model", required=True)
    p.add_argument("--contour-dir", default=None, help="per-level contour directory")
    p.add_argument("--resolution", type=int, default=200)
    p.set_defaults(func=_cmd_levelsets)

    p = sub.add_parser("converge", help="recovery error vs sample size")
    p.add_argument("--k-max", type=int, default=5)
    p.add_argument("--replicates", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_converge)

    return parser


def run(argv=None) -> int:
    """Parse flags and dispatch; returns the process exit code."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PrevquadError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
