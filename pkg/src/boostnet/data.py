"""Dataset ingestion and encoding, plus built-in dataset generators.

CSV loading expands categorical feature columns to one-hot dummy columns
(category order = first appearance), drops rows with missing values, and
optionally z-scores each column.  Class labels are ordered
lexicographically; binary targets are encoded -1/+1 in that order and
multi-class targets as one-hot rows.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import ConfigError, DataError, ParseError
from .numerics import RandomStream, as_float_matrix

logger = logging.getLogger(__name__)

_MISSING_TOKENS = ["?", "NA", "N/A", "na", ""]


@dataclass(frozen=True)
class Standardization:
    """Per-column z-score parameters fit on some feature matrix."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, features):
        X = as_float_matrix(features, "features")
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale = np.where(scale == 0.0, 1.0, scale)
        return cls(mean, scale)

    def apply(self, features):
        X = as_float_matrix(features, "features")
        return (X - self.mean) / self.scale


@dataclass
class Dataset:
    """A model-ready dataset.

    features are what models consume (standardized when requested at load
    time); raw_features always hold the unstandardized matrix so resampling
    procedures can refit scaling per training fold without leakage.
    targets are encoded for the task; raw_targets keep the original
    labels/values.
    """

    features: np.ndarray
    targets: np.ndarray
    task: str
    raw_targets: np.ndarray
    raw_features: np.ndarray
    feature_names: tuple
    class_labels: tuple | None = None
    standardization: Standardization | None = None
    n_dropped_rows: int = 0

    @property
    def n_instances(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    @property
    def n_classes(self):
        return None if self.class_labels is None else len(self.class_labels)


def encode_labels(raw_labels, task):
    """Encode raw class labels; returns (targets, ordered label tuple).

    Labels are ordered lexicographically by their string form.  Binary maps
    the first label to -1 and the second to +1; multi-class yields one-hot
    rows in label order.
    """
    strings = np.array([str(v) for v in np.asarray(raw_labels)])
    labels = tuple(sorted(set(strings)))
    if task == "binary":
        if len(labels) != 2:
            raise DataError(f"binary task needs exactly 2 classes, "
                            f"got {len(labels)}: {labels[:5]}")
        targets = np.where(strings == labels[1], 1.0, -1.0).reshape(-1, 1)
        return targets, labels
    if task == "multiclass":
        if len(labels) < 3:
            raise DataError(f"multiclass task needs >= 3 classes, got {len(labels)}")
        index = {label: i for i, label in enumerate(labels)}
        targets = np.zeros((strings.size, len(labels)))
        targets[np.arange(strings.size), [index[s] for s in strings]] = 1.0
        return targets, labels
    raise ConfigError(f"encode_labels does not apply to task {task!r}")


def from_arrays(features, raw_targets, task, standardize=False, feature_names=None):
    """Build a Dataset from in-memory arrays."""
    raw_X = as_float_matrix(features, "features")
    raw_targets = np.asarray(raw_targets)
    if raw_targets.shape[0] != raw_X.shape[0]:
        raise DataError(f"features have {raw_X.shape[0]} rows, "
                        f"targets have {raw_targets.shape[0]}")
    if task == "regression":
        targets = np.asarray(raw_targets, dtype=np.float64).reshape(-1, 1)
        labels = None
    else:
        targets, labels = encode_labels(raw_targets, task)
    standardization = Standardization.fit(raw_X) if standardize else None
    X = standardization.apply(raw_X) if standardization else raw_X
    if feature_names is None:
        feature_names = tuple(f"x{i}" for i in range(raw_X.shape[1]))
    return Dataset(features=X, targets=targets, task=task,
                   raw_targets=raw_targets, raw_features=raw_X,
                   feature_names=tuple(feature_names), class_labels=labels,
                   standardization=standardization, n_dropped_rows=0)


def _resolve_column(columns, key):
    if isinstance(key, int) and key not in columns:
        if not -len(columns) <= key < len(columns):
            raise DataError(f"column index {key} out of range for "
                            f"{len(columns)} columns")
        return columns[key]
    if key not in columns:
        raise DataError(f"column {key!r} not found; available: {list(columns)}")
    return key


def _first_appearance_categories(values):
    seen = []
    known = set()
    for v in values:
        if v not in known:
            known.add(v)
            seen.append(v)
    return seen


def _encode_features(frame, categorical, auto_detect):
    """Turn a string-valued feature frame into (matrix, dummy-expanded names).

    Columns in ``categorical`` are always dummy-coded.  Other columns must
    parse as numbers; when auto_detect is set, a column with any unparseable
    cell becomes categorical instead of raising.
    """
    blocks = []
    names = []
    for column in frame.columns:
        series = frame[column]
        treat_categorical = column in categorical
        if not treat_categorical:
            parsed = pd.to_numeric(series, errors="coerce")
            bad = parsed.isna().to_numpy()
            if not bad.any():
                blocks.append(parsed.to_numpy(dtype=np.float64)[:, None])
                names.append(str(column))
                continue
            if not auto_detect:
                pos = int(np.nonzero(bad)[0][0])
                raise ParseError(f"cannot parse {series.iloc[pos]!r} as a number",
                                 row=int(series.index[pos]), column=str(column))
            treat_categorical = True
        values = series.to_numpy(dtype=str)
        for category in _first_appearance_categories(values):
            blocks.append((values == category).astype(np.float64)[:, None])
            names.append(f"{column}={category}")
    return np.hstack(blocks), tuple(names)


def _parse_numeric_target(series, column):
    parsed = pd.to_numeric(series, errors="coerce")
    bad = parsed.isna().to_numpy()
    if bad.any():
        pos = int(np.nonzero(bad)[0][0])
        raise ParseError(f"cannot parse target {series.iloc[pos]!r} as a number",
                         row=int(series.index[pos]), column=str(column))
    return parsed.to_numpy(dtype=np.float64)


def _infer_task(series):
    numeric = not pd.to_numeric(series, errors="coerce").isna().any()
    if numeric:
        return "regression"
    n_classes = series.nunique()
    if n_classes == 2:
        return "binary"
    if n_classes >= 3:
        return "multiclass"
    raise DataError(f"target has {n_classes} distinct value(s); cannot infer a task")


def _read_string_frame(path, header):
    try:
        frame = pd.read_csv(path, header=0 if header else None, dtype=str,
                            na_values=_MISSING_TOKENS, keep_default_na=True,
                            skipinitialspace=True)
    except pd.errors.ParserError as exc:
        raise ParseError(f"cannot parse CSV {path}: {exc}") from exc
    if frame.shape[0] == 0:
        raise DataError(f"{path} contains no data rows")
    return frame


def _drop_missing(frame):
    mask = frame.notna().all(axis=1).to_numpy()
    n_dropped = int((~mask).sum())
    if n_dropped:
        logger.info("dropped %d row(s) with missing values", n_dropped)
    kept = frame[mask]  # original row index preserved for error addressing
    if kept.shape[0] == 0:
        raise DataError("no rows left after dropping rows with missing values")
    return kept, n_dropped


def load_csv(path, target_column, task="auto", header=True,
             categorical_columns=None, standardize=False):
    """Load a CSV into a Dataset.

    target_column is a name (with header) or 0-based index.  task "auto"
    infers regression for numeric targets and binary/multi-class by class
    count otherwise.  categorical_columns=None auto-detects non-numeric
    feature columns; an explicit list makes every other column strictly
    numeric.  standardize fits per-column z-scores on the loaded data.
    """
    frame = _read_string_frame(path, header)
    target = _resolve_column(list(frame.columns), target_column)
    frame, n_dropped = _drop_missing(frame)

    target_series = frame[target]
    feature_frame = frame.drop(columns=[target])
    if feature_frame.shape[1] == 0:
        raise DataError("no feature columns besides the target")

    auto = categorical_columns is None
    categorical = set() if auto else {
        _resolve_column(list(feature_frame.columns), c) for c in categorical_columns}
    raw_X, names = _encode_features(feature_frame, categorical, auto)

    if task == "auto":
        task = _infer_task(target_series)
    if task == "regression":
        raw_targets = _parse_numeric_target(target_series, target)
        targets = raw_targets.reshape(-1, 1)
        labels = None
    elif task in ("binary", "multiclass"):
        raw_targets = target_series.to_numpy(dtype=str)
        targets, labels = encode_labels(raw_targets, task)
    else:
        raise ConfigError(f"unknown task {task!r}")

    standardization = Standardization.fit(raw_X) if standardize else None
    X = standardization.apply(raw_X) if standardization else raw_X
    return Dataset(features=X, targets=targets, task=task,
                   raw_targets=raw_targets, raw_features=raw_X,
                   feature_names=names, class_labels=labels,
                   standardization=standardization, n_dropped_rows=n_dropped)


def load_features_csv(path, header=True, categorical_columns=None,
                      drop_columns=()):
    """Load a feature-only CSV; returns (matrix, names, n_dropped_rows)."""
    frame = _read_string_frame(path, header)
    for column in drop_columns:
        frame = frame.drop(columns=[_resolve_column(list(frame.columns), column)])
    frame, n_dropped = _drop_missing(frame)
    auto = categorical_columns is None
    categorical = set() if auto else {
        _resolve_column(list(frame.columns), c) for c in categorical_columns}
    matrix, names = _encode_features(frame, categorical, auto)
    return matrix, names, n_dropped


def align_features(matrix, names, expected_names):
    """Reorder encoded features to a training-time column layout.

    Dummy columns absent from the new data (category never appears) are
    zero-filled; any other mismatch is an error.
    """
    names = tuple(names)
    expected = tuple(expected_names)
    if names == expected:
        return matrix
    extra = [n for n in names if n not in expected]
    if extra:
        raise DataError(f"feature columns not seen at training time: {extra[:8]}")
    position = {n: i for i, n in enumerate(names)}
    out = np.zeros((matrix.shape[0], len(expected)))
    for j, name in enumerate(expected):
        if name in position:
            out[:, j] = matrix[:, position[name]]
        elif "=" not in name:
            raise DataError(f"missing numeric feature column {name!r}")
    return out


def ringnorm2d(n, seed=0, standardize=False):
    """Two overlapping 2-D Gaussians: a balanced binary toy problem.

    The positive class is centered at the origin with covariance 4*I; the
    negative class sits at (2/sqrt(2), 2/sqrt(2)) with unit covariance.
    Deterministic per seed.
    """
    if n < 2:
        raise ConfigError(f"n must be >= 2, got {n}")
    n_wide = (n + 1) // 2
    n_narrow = n - n_wide
    stream = RandomStream(seed)
    wide = 2.0 * stream.normal((n_wide, 2))
    narrow = stream.normal((n_narrow, 2)) + 2.0 / np.sqrt(2.0)
    X = np.vstack([wide, narrow])
    y = np.concatenate([np.ones(n_wide, dtype=int), -np.ones(n_narrow, dtype=int)])
    return from_arrays(X, y, "binary", standardize=standardize,
                       feature_names=("x1", "x2"))


_TTT_LINES = ((0, 1, 2), (3, 4, 5), (6, 7, 8),
              (0, 3, 6), (1, 4, 7), (2, 5, 8),
              (0, 4, 8), (2, 4, 6))
_TTT_CELLS = ("top-left", "top-middle", "top-right",
              "middle-left", "middle-middle", "middle-right",
              "bottom-left", "bottom-middle", "bottom-right")


def _ttt_winner(board):
    for i, j, k in _TTT_LINES:
        if board[i] != "b" and board[i] == board[j] == board[k]:
            return board[i]
    return None


def tictactoe_endgames(standardize=False):
    """The complete set of distinct legal tic-tac-toe end positions.

    First player is 'x'; play stops at a three-in-a-row or a full board.
    Class 'positive' means 'x' finished with a three-in-a-row.  Yields 958
    boards (626 positive), each encoded as 27 cell-state indicators.
    """
    boards = set()

    def play(board, player):
        if _ttt_winner(board) is not None or "b" not in board:
            boards.add(tuple(board))
            return
        for i in range(9):
            if board[i] == "b":
                board[i] = player
                play(board, "o" if player == "x" else "x")
                board[i] = "b"

    play(["b"] * 9, "x")
    ordered = sorted(boards)

    states = ("x", "o", "b")
    names = tuple(f"{cell}={state}" for cell in _TTT_CELLS for state in states)
    X = np.zeros((len(ordered), 27))
    labels = []
    for row, board in enumerate(ordered):
        for cell in range(9):
            X[row, 3 * cell + states.index(board[cell])] = 1.0
        labels.append("positive" if _ttt_winner(board) == "x" else "negative")
    return from_arrays(X, np.array(labels), "binary", standardize=standardize,
                       feature_names=names)


def dataset_to_csv(dataset, path, target_name="label"):
    """Write raw features and raw targets as a CSV with a header row."""
    frame = pd.DataFrame(dataset.raw_features,
                         columns=[str(n) for n in dataset.feature_names])
    frame[target_name] = dataset.raw_targets
    frame.to_csv(path, index=False)
