"""Command-line interface.

Subcommands: train, predict, cv, grid, staged-curve, boundary, flatten,
ringnorm.  Outputs are CSV files or the versioned model format; on failure
a single-line error is written to stderr and the exit code is nonzero.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import booster, evaluation, flatten, model_io
from .booster import TrainConfig
from .data import (Standardization, align_features, dataset_to_csv, load_csv,
                   load_features_csv, ringnorm2d)
from .errors import BoostnetError, ConfigError, DataError
from .subnet import FitConfig


def _add_data_options(parser):
    parser.add_argument("data", help="input CSV file")
    parser.add_argument("--target-col", default=None,
                        help="target column name (or 0-based index)")
    parser.add_argument("--task", default="auto",
                        choices=["auto", "binary", "multiclass", "regression"])
    parser.add_argument("--no-header", action="store_true",
                        help="the CSV has no header row")
    parser.add_argument("--categorical-cols", default=None,
                        help="comma-separated columns to dummy-code "
                             "(default: auto-detect non-numeric columns)")
    parser.add_argument("--standardize", action="store_true",
                        help="z-score feature columns")


def _add_train_options(parser):
    parser.add_argument("--stages", type=int, default=200, metavar="T",
                        help="number of boosting stages (default 200)")
    parser.add_argument("--units-per-stage", type=int, default=1, metavar="J")
    parser.add_argument("--learning-rate", type=float, default=0.1)
    parser.add_argument("--subsample", type=float, default=1.0)
    parser.add_argument("--max-iterations", type=int, default=200,
                        help="per-stage sub-network iteration budget")
    parser.add_argument("--tolerance", type=float, default=1e-5,
                        help="per-stage relative improvement stop")
    parser.add_argument("--activation", default="tanh",
                        choices=["tanh", "logistic", "relu"])
    parser.add_argument("--init-scale", type=float, default=1.0)
    parser.add_argument("--rho-on-subsample", action="store_true",
                        help="compute the stage line search on the subsample "
                             "instead of the full training set")
    parser.add_argument("--patience", type=int, default=None,
                        help="stop after this many stages without improvement")
    parser.add_argument("--seed", type=int, default=0)


def _column_key(value):
    if value is None:
        return None
    try:
        return int(value)
    except ValueError:
        return value


def _column_list(value):
    if value is None:
        return None
    return [_column_key(item.strip()) for item in value.split(",") if item.strip()]


def _load_dataset(args):
    if args.target_col is None:
        raise ConfigError("--target-col is required for this command")
    return load_csv(args.data, _column_key(args.target_col), task=args.task,
                    header=not args.no_header,
                    categorical_columns=_column_list(args.categorical_cols),
                    standardize=args.standardize)


def _train_config(args, task, units=None, stages=None):
    return TrainConfig(
        n_stages=stages if stages is not None else args.stages,
        units_per_stage=units if units is not None else args.units_per_stage,
        learning_rate=args.learning_rate,
        subsample=args.subsample,
        task=task,
        fit=FitConfig(max_iterations=args.max_iterations,
                      tolerance=args.tolerance,
                      activation=args.activation,
                      init_scale=args.init_scale),
        seed=args.seed,
        rho_on_subsample=args.rho_on_subsample,
        patience=args.patience,
    )


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="ascii") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def _standardization_fields(dataset):
    if dataset.standardization is None:
        return None
    return (dataset.standardization.mean, dataset.standardization.scale)


def cmd_train(args):
    dataset = _load_dataset(args)
    config = _train_config(args, dataset.task)
    model = booster.train(dataset.features, dataset.targets, config)
    model_io.save(model, args.out,
                  standardization=_standardization_fields(dataset),
                  feature_names=dataset.feature_names,
                  class_labels=dataset.class_labels)
    print(f"trained {config.task} model: {model.n_stages} stages x "
          f"{config.units_per_stage} unit(s), final train loss "
          f"{model.training_log[-1]:.6g} -> {args.out}")
    return 0


def _active_stage_count(model, units_per_stage, active_units):
    if active_units is None:
        return None
    if active_units < 0 or active_units % units_per_stage != 0:
        raise ConfigError(f"--active-units must be a multiple of "
                          f"units_per_stage={units_per_stage}, got {active_units}")
    return active_units // units_per_stage


def _encode_prediction_features(args, loaded):
    drop = [] if args.target_col is None else [_column_key(args.target_col)]
    matrix, names, _ = load_features_csv(
        args.data, header=not args.no_header,
        categorical_columns=_column_list(args.categorical_cols),
        drop_columns=drop)
    if loaded.feature_names is not None:
        matrix = align_features(matrix, names, loaded.feature_names)
    expected = loaded.model.n_features
    if matrix.shape[1] != expected:
        raise DataError(f"encoded features have width {matrix.shape[1]}, "
                        f"model expects {expected}")
    if loaded.standardization is not None:
        mean, scale = loaded.standardization
        matrix = Standardization(mean, scale).apply(matrix)
    return matrix


def _model_predictions(loaded, X, active_units):
    model = loaded.model
    if isinstance(model, flatten.FlatNetwork):
        m = _active_stage_count(model, model.units_per_stage, active_units)
        net = model if m is None else flatten.set_active_stages(model, m)
        return flatten.forward(net, X), model.task
    m = _active_stage_count(model, model.config.units_per_stage, active_units)
    return booster.predict(model, X, m), model.config.task


def cmd_predict(args):
    loaded = model_io.load(args.model)
    X = _encode_prediction_features(args, loaded)
    predictions, task = _model_predictions(loaded, X, args.active_units)

    if task == "regression":
        header = ["prediction"]
        rows = [[p] for p in predictions[:, 0]]
    else:
        labels = loaded.class_labels
        if labels is None:
            labels = tuple(f"class{i}" for i in range(
                2 if task == "binary" else predictions.shape[1]))
        if task == "binary":
            proba = np.column_stack([1.0 - predictions[:, 0], predictions[:, 0]])
        else:
            proba = predictions
        header = [f"p_{label}" for label in labels] + ["prediction"]
        decided = np.argmax(proba, axis=1)
        rows = [list(proba[i]) + [labels[decided[i]]] for i in range(proba.shape[0])]
    _write_csv(args.out, header, rows)
    print(f"wrote {len(rows)} prediction(s) -> {args.out}")
    return 0


def cmd_cv(args):
    dataset = _load_dataset(args)
    config = _train_config(args, dataset.task)
    report = evaluation.kfold_cv(dataset, config, folds=args.folds, seed=args.seed)
    print(f"{report.metric}: mean {report.mean:.6g} std {report.std:.6g} "
          f"over {len(report.fold_values)} folds ({report.wall_time:.1f}s)")
    if args.out:
        rows = [[i, v] for i, v in enumerate(report.fold_values)]
        rows.append(["mean", report.mean])
        rows.append(["std", report.std])
        _write_csv(args.out, ["fold", report.metric], rows)
    return 0


def _float_list(value):
    return tuple(float(v) for v in value.split(",") if v.strip())


def _int_list(value):
    return tuple(int(v) for v in value.split(",") if v.strip())


def cmd_grid(args):
    dataset = _load_dataset(args)
    base_grid = evaluation.default_grid(dataset.task)
    grid = evaluation.GridSpec(
        learning_rates=_float_list(args.learning_rates)
        if args.learning_rates else base_grid.learning_rates,
        subsamples=_float_list(args.subsamples)
        if args.subsamples else base_grid.subsamples,
        units_values=_int_list(args.units)
        if args.units else base_grid.units_values,
        n_stages=args.stages,
        folds=args.folds,
        fixed_total_units=args.fixed_total_units,
    )
    base_config = _train_config(args, dataset.task)
    results = evaluation.evaluate_grid(dataset, grid, base_config, seed=args.seed)
    best_config, best_report = evaluation.select_best(results, dataset.task)
    metric = best_report.metric
    print(f"best: learning_rate={best_config.learning_rate} "
          f"subsample={best_config.subsample} "
          f"units_per_stage={best_config.units_per_stage} "
          f"n_stages={best_config.n_stages} "
          f"{metric} {best_report.mean:.6g} (std {best_report.std:.6g})")
    if args.out:
        rows = [[c.learning_rate, c.subsample, c.units_per_stage, c.n_stages,
                 r.mean, r.std] for c, r in results]
        _write_csv(args.out, ["learning_rate", "subsample", "units_per_stage",
                              "n_stages", f"mean_{metric}", f"std_{metric}"], rows)
    return 0


def cmd_staged_curve(args):
    loaded = model_io.load(args.model)
    model = loaded.model
    if isinstance(model, flatten.FlatNetwork):
        raise ConfigError("staged-curve needs an ensemble model file")
    dataset = _load_dataset(args)
    if dataset.task != model.config.task:
        raise ConfigError(f"data task {dataset.task!r} does not match "
                          f"model task {model.config.task!r}")
    X = dataset.raw_features
    if loaded.feature_names is not None:
        X = align_features(X, dataset.feature_names, loaded.feature_names)
    if loaded.standardization is not None:
        X = Standardization(*loaded.standardization).apply(X)
    rows = evaluation.staged_curve(model, X, dataset.targets)
    metric = evaluation.metric_name(model.config.task)
    _write_csv(args.out, ["stages", "active_units", f"test_{metric}", "train_loss"],
               rows)
    print(f"wrote staged curve with {len(rows)} row(s) -> {args.out}")
    return 0


def cmd_boundary(args):
    loaded = model_io.load(args.model)
    model = loaded.model
    if isinstance(model, flatten.FlatNetwork):
        raise ConfigError("boundary needs an ensemble model file")
    if loaded.standardization is not None:
        raise ConfigError("boundary rasters expect a model trained on raw "
                          "2-D coordinates")
    m = _active_stage_count(model, model.config.units_per_stage, args.active_units)
    xs, ys, grid = evaluation.boundary_raster(
        model, (args.xmin, args.xmax, args.ymin, args.ymax),
        args.resolution, n_stages=m)
    rows = [[xs[j], ys[i], grid[i, j]]
            for i in range(len(ys)) for j in range(len(xs))]
    _write_csv(args.out, ["x", "y", "p_positive"], rows)
    print(f"wrote {len(rows)} raster point(s) -> {args.out}")
    return 0


def cmd_flatten(args):
    loaded = model_io.load(args.model)
    if isinstance(loaded.model, flatten.FlatNetwork):
        raise ConfigError("model file already holds a flat network")
    net = flatten.flatten(loaded.model)
    m = _active_stage_count(net, net.units_per_stage, args.active_units)
    if m is not None:
        net = flatten.set_active_stages(net, m)
    model_io.save(net, args.out, standardization=loaded.standardization,
                  feature_names=loaded.feature_names,
                  class_labels=loaded.class_labels)
    print(f"flattened to {net.n_stages * net.units_per_stage} hidden unit(s), "
          f"{net.active_units} active -> {args.out}")
    return 0


def cmd_ringnorm(args):
    dataset = ringnorm2d(args.n, seed=args.seed)
    dataset_to_csv(dataset, args.out)
    print(f"wrote {dataset.n_instances} instances -> {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="boostnet",
        description="Train a single shallow neural network by sequential "
                    "gradient boosting; flatten it; truncate it at inference.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train an ensemble on a CSV")
    _add_data_options(p)
    _add_train_options(p)
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict with a saved model")
    p.add_argument("model", help="model file (ensemble or flat network)")
    _add_data_options(p)
    p.add_argument("--active-units", type=int, default=None,
                   help="evaluate only the first m hidden units")
    p.add_argument("--out", required=True, help="predictions CSV to write")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cv", help="k-fold cross-validation of one configuration")
    _add_data_options(p)
    _add_train_options(p)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--out", default=None, help="per-fold report CSV")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("grid", help="exhaustive hyper-parameter grid search")
    _add_data_options(p)
    _add_train_options(p)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--learning-rates", default=None,
                   help="comma-separated values (default: task grid)")
    p.add_argument("--subsamples", default=None)
    p.add_argument("--units", default=None,
                   help="comma-separated units-per-stage values")
    p.add_argument("--fixed-total-units", action="store_true",
                   help="keep stages*units constant: each cell trains "
                        "stages // units stages")
    p.add_argument("--out", default=None, help="all-cells report CSV")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("staged-curve",
                       help="test metric and train loss per truncation level")
    p.add_argument("model", help="ensemble model file")
    _add_data_options(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_staged_curve)

    p = sub.add_parser("boundary", help="probability raster over a 2-D box")
    p.add_argument("model", help="ensemble model file (binary, 2-D)")
    p.add_argument("--xmin", type=float, required=True)
    p.add_argument("--xmax", type=float, required=True)
    p.add_argument("--ymin", type=float, required=True)
    p.add_argument("--ymax", type=float, required=True)
    p.add_argument("--resolution", type=int, default=100)
    p.add_argument("--active-units", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("flatten", help="rewrite an ensemble as a flat network")
    p.add_argument("model", help="ensemble model file")
    p.add_argument("--active-units", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_flatten)

    p = sub.add_parser("ringnorm", help="emit the 2-D two-Gaussian toy dataset")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ringnorm)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BoostnetError as exc:
        message = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        message = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
