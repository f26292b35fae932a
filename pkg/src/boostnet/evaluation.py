"""Cross-validation, grid search, staged curves and boundary rasters.

Evaluation follows the usual protocol for tabular experiments: stratified
k-fold for classification (plain shuffled folds for regression), accuracy
or RMSE as the metric, and feature standardization refit inside each
training fold so test-fold statistics never leak into scaling.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .booster import TrainConfig, iter_staged_margins, predict, train
from .data import Standardization
from .errors import ConfigError
from .numerics import RandomStream, child_seed, permutation


@dataclass(frozen=True)
class GridSpec:
    """Hyper-parameter search space: the product of the listed values.

    n_stages is the stage count used by every cell; with fixed_total_units
    set, each cell instead trains n_stages // units_per_stage stages so the
    final network size stays constant across the grid.
    """

    learning_rates: tuple = (0.1,)
    subsamples: tuple = (1.0,)
    units_values: tuple = (1,)
    n_stages: int = 200
    folds: int = 10
    fixed_total_units: bool = False


# Search spaces that work well for 200-unit networks on small tabular data.
BINARY_GRID = GridSpec(learning_rates=(0.1, 0.25, 0.5, 1.0),
                       subsamples=(0.5, 0.75, 1.0),
                       units_values=(1, 2, 3))
MULTICLASS_GRID = GridSpec(learning_rates=(0.025, 0.05, 0.1, 0.5, 1.0),
                           subsamples=(0.25, 0.5, 0.75, 1.0),
                           units_values=(1, 2, 3, 4))
REGRESSION_GRID = MULTICLASS_GRID


def default_grid(task):
    return BINARY_GRID if task == "binary" else MULTICLASS_GRID


@dataclass(frozen=True)
class CVReport:
    """Per-fold metric values and their summary for one configuration."""

    metric: str
    fold_values: tuple
    mean: float
    std: float
    config: TrainConfig
    wall_time: float

    @classmethod
    def from_folds(cls, metric, fold_values, config, wall_time):
        values = np.asarray(fold_values, dtype=np.float64)
        return cls(metric=metric, fold_values=tuple(float(v) for v in values),
                   mean=float(values.mean()), std=float(values.std()),
                   config=config, wall_time=float(wall_time))


def metric_name(task):
    return "accuracy" if task in ("binary", "multiclass") else "rmse"


def evaluate_predictions(task, predictions, encoded_targets):
    """Accuracy (argmax / 0.5-threshold rule) or RMSE against encoded targets."""
    y = np.asarray(encoded_targets, dtype=np.float64)
    p = np.asarray(predictions, dtype=np.float64)
    if task == "binary":
        decided = np.where(p[:, 0] > 0.5, 1.0, -1.0)
        return float(np.mean(decided == y[:, 0]))
    if task == "multiclass":
        return float(np.mean(np.argmax(p, axis=1) == np.argmax(y, axis=1)))
    return float(np.sqrt(np.mean((p[:, 0] - y[:, 0]) ** 2)))


def _class_indices(targets, task):
    if task == "binary":
        return [np.nonzero(targets[:, 0] == -1.0)[0],
                np.nonzero(targets[:, 0] == 1.0)[0]]
    return [np.nonzero(targets[:, k] == 1.0)[0] for k in range(targets.shape[1])]


def fold_assignment(dataset, folds, seed):
    """Fold index per instance: stratified for classification, plain otherwise.

    Stratification keeps each class's fold counts within one of each other;
    classes smaller than the fold count trigger a warning and a fallback to
    plain shuffled folds.
    """
    n = dataset.n_instances
    stream = RandomStream(child_seed(seed, 101))
    assignment = np.empty(n, dtype=int)
    if dataset.task in ("binary", "multiclass"):
        groups = _class_indices(dataset.targets, dataset.task)
        if min(len(g) for g in groups) >= folds:
            for c, members in enumerate(groups):
                shuffled = members[permutation(len(members), stream)]
                for i, row in enumerate(shuffled):
                    assignment[row] = (i + c) % folds
            return assignment
        warnings.warn("a class has fewer members than folds; "
                      "using plain (unstratified) folds", stacklevel=2)
    order = permutation(n, stream)
    for fold, chunk in enumerate(np.array_split(order, folds)):
        assignment[chunk] = fold
    return assignment


def kfold_cv(dataset, config, folds=10, seed=0):
    """k-fold cross-validation of one configuration; returns a CVReport.

    When the dataset was loaded with standardization, scaling is refit on
    each training fold and applied to its test fold.
    """
    n = dataset.n_instances
    if folds < 2:
        raise ConfigError(f"folds must be >= 2, got {folds}")
    if n < folds:
        raise ConfigError(f"need at least {folds} instances for {folds} folds, got {n}")
    if dataset.task != config.task:
        raise ConfigError(f"dataset task {dataset.task!r} does not match "
                          f"config task {config.task!r}")
    started = time.perf_counter()
    assignment = fold_assignment(dataset, folds, seed)
    values = []
    for fold in range(folds):
        test_mask = assignment == fold
        train_idx = np.nonzero(~test_mask)[0]
        test_idx = np.nonzero(test_mask)[0]
        X_train = dataset.raw_features[train_idx]
        X_test = dataset.raw_features[test_idx]
        if dataset.standardization is not None:
            scaler = Standardization.fit(X_train)
            X_train = scaler.apply(X_train)
            X_test = scaler.apply(X_test)
        model = train(X_train, dataset.targets[train_idx], config)
        predictions = predict(model, X_test)
        values.append(evaluate_predictions(dataset.task, predictions,
                                           dataset.targets[test_idx]))
    return CVReport.from_folds(metric_name(dataset.task), values, config,
                               time.perf_counter() - started)


def _grid_cells(grid):
    for learning_rate in grid.learning_rates:
        for subsample in grid.subsamples:
            for units in grid.units_values:
                stages = grid.n_stages
                if grid.fixed_total_units:
                    stages = max(1, grid.n_stages // units)
                yield learning_rate, subsample, units, stages


def evaluate_grid(dataset, grid, base_config=None, inner_folds=None, seed=0):
    """Cross-validate every grid cell; returns a list of (config, report)."""
    if base_config is None:
        base_config = TrainConfig(task=dataset.task, seed=seed)
    folds = grid.folds if inner_folds is None else inner_folds
    results = []
    for learning_rate, subsample, units, stages in _grid_cells(grid):
        config = replace(base_config, task=dataset.task,
                         learning_rate=learning_rate, subsample=subsample,
                         units_per_stage=units, n_stages=stages)
        results.append((config, kfold_cv(dataset, config, folds, seed)))
    if not results:
        raise ConfigError("empty hyper-parameter grid")
    return results


def select_best(results, task):
    """Pick the winning (config, report) from grid results.

    Best = highest mean accuracy (classification) or lowest mean RMSE
    (regression); exact ties go to the simpler model: smaller learning
    rate, then fewer units per stage, then smaller subsample.  The rule is
    a total order, so the winner does not depend on enumeration order.
    """
    sign = -1.0 if metric_name(task) == "accuracy" else 1.0

    def sort_key(item):
        config, report = item
        return (sign * report.mean, config.learning_rate,
                config.units_per_stage, config.subsample)

    return min(results, key=sort_key)


def grid_search(dataset, grid, base_config=None, inner_folds=None, seed=0):
    """Exhaustive search over the grid; returns (best config, its CVReport)."""
    results = evaluate_grid(dataset, grid, base_config, inner_folds, seed)
    return select_best(results, dataset.task)


def staged_curve(model, features, encoded_targets):
    """Test metric and training loss per truncation level.

    One row per stage count m = 0..n_stages:
    (stages, active hidden units, test metric, training loss).
    """
    loss = model.loss_model()
    task = model.config.task
    units = model.config.units_per_stage
    y = np.asarray(encoded_targets, dtype=np.float64)
    rows = []
    for m, margin in iter_staged_margins(model, features):
        value = evaluate_predictions(task, loss.output_transform(margin), y)
        rows.append((m, m * units, value, model.training_log[m]))
    return rows


def boundary_raster(model, bounds, resolution, n_stages=None):
    """Probability raster of a 2-D binary model over a bounding box.

    bounds is (x_min, x_max, y_min, y_max).  Returns (xs, ys, P) where
    P[i, j] is the positive-class probability at (xs[j], ys[i]).
    """
    if model.config.task != "binary":
        raise ValueError("boundary rasters require a binary model")
    if model.n_features != 2:
        raise ValueError(f"boundary rasters require 2-D features, "
                         f"model expects {model.n_features}")
    if resolution < 2:
        raise ConfigError(f"resolution must be >= 2, got {resolution}")
    x_min, x_max, y_min, y_max = bounds
    xs = np.linspace(x_min, x_max, resolution)
    ys = np.linspace(y_min, y_max, resolution)
    grid_x, grid_y = np.meshgrid(xs, ys)
    points = np.column_stack([grid_x.ravel(), grid_y.ravel()])
    p = predict(model, points, n_stages)[:, 0]
    return xs, ys, p.reshape(resolution, resolution)
