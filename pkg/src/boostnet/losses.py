"""Task-specific loss models.

Each loss model supplies the five pieces the boosting loop needs:
the constant initialization of the additive expansion, pseudo-residuals
(negative loss gradients at the current margin), the one-step
Newton-Raphson line-search coefficient for a fitted stage, the per-instance
average loss for reporting, and the map from raw margins to predictions.

Margins and encoded targets are (n_instances, n_outputs) float64 arrays:
n_outputs is 1 for binary classification (targets in {-1,+1}) and for
regression, and equals the class count for multi-class (one-hot targets).
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, DataError
from .numerics import sigmoid, softmax

# Below this curvature magnitude the Newton step is untrustworthy and the
# stage coefficient is forced to zero instead of being clipped.
RHO_DENOMINATOR_FLOOR = 1e-12

# Applied only when reporting loss values, never inside gradients.
PROBABILITY_CLAMP = 1e-12


def _guarded_ratio(numerators, denominators):
    num = np.atleast_1d(np.asarray(numerators, dtype=np.float64))
    den = np.atleast_1d(np.asarray(denominators, dtype=np.float64))
    out = np.zeros_like(num)
    ok = np.abs(den) >= RHO_DENOMINATOR_FLOOR
    out[ok] = num[ok] / den[ok]
    return out


class LossModel:
    """Interface shared by the task-specific loss models."""

    name = ""
    n_outputs = 1

    def init_constant(self, targets):
        """Constant margin minimizing the average loss over ``targets``."""
        raise NotImplementedError

    def pseudo_residuals(self, targets, margin):
        """Negative loss gradient with respect to the margin, per entry."""
        raise NotImplementedError

    def newton_rho(self, targets, margin, h_outputs):
        """One Newton-Raphson step on the per-output line search."""
        raise NotImplementedError

    def loss_value(self, targets, margin):
        """Per-instance average loss (a float >= 0)."""
        raise NotImplementedError

    def output_transform(self, margin):
        """Map raw margins to predictions (probabilities or values)."""
        raise NotImplementedError


class BinaryLogisticLoss(LossModel):
    """Logistic loss ln(1+exp(-2yF)) for targets y in {-1,+1}."""

    name = "binary"
    n_outputs = 1

    def init_constant(self, targets):
        y = np.asarray(targets, dtype=np.float64)
        if not np.all(np.abs(y) == 1.0):
            raise DataError("binary targets must be encoded as -1/+1")
        n_pos = np.count_nonzero(y == 1.0)
        n_neg = y.size - n_pos
        if n_pos == 0 or n_neg == 0:
            raise DataError("binary targets contain a single class; "
                            "the constant log-odds initialization is undefined")
        return np.array([0.5 * np.log(n_pos / n_neg)])

    def pseudo_residuals(self, targets, margin):
        y = np.asarray(targets, dtype=np.float64)
        # 2y / (1 + exp(2yF)) written through the stable logistic map
        return 2.0 * y * sigmoid(-2.0 * y * margin)

    def newton_rho(self, targets, margin, h_outputs):
        y = np.asarray(targets, dtype=np.float64)
        r = self.pseudo_residuals(y, margin)
        num = np.sum(r * h_outputs)
        den = np.sum(r * (2.0 * y - r) * h_outputs * h_outputs)
        return _guarded_ratio(num, den)

    def loss_value(self, targets, margin):
        y = np.asarray(targets, dtype=np.float64)
        return float(np.mean(np.logaddexp(0.0, -2.0 * y * margin)))

    def output_transform(self, margin):
        return sigmoid(2.0 * margin)


class MultiClassCrossEntropyLoss(LossModel):
    """Cross-entropy over softmax margins for one-hot targets, K >= 3."""

    name = "multiclass"

    def __init__(self, n_classes):
        if n_classes < 3:
            raise ConfigError(f"multi-class loss needs >= 3 classes, got "
                              f"{n_classes}; use the binary task for 2")
        self.n_classes = int(n_classes)
        self.n_outputs = self.n_classes

    def _check_targets(self, targets):
        y = np.asarray(targets, dtype=np.float64)
        if y.ndim != 2 or y.shape[1] != self.n_classes:
            raise DataError(f"one-hot targets must have {self.n_classes} "
                            f"columns, got shape {y.shape}")
        one_per_row = np.all(np.sum(y == 1.0, axis=1) == 1)
        if not one_per_row or not np.all((y == 0.0) | (y == 1.0)):
            raise DataError("multi-class targets must be one-hot rows")
        return y

    def init_constant(self, targets):
        self._check_targets(targets)
        return np.zeros(self.n_classes)

    def pseudo_residuals(self, targets, margin):
        y = np.asarray(targets, dtype=np.float64)
        return y - softmax(margin, axis=1)

    def newton_rho(self, targets, margin, h_outputs):
        y = np.asarray(targets, dtype=np.float64)
        p = softmax(margin, axis=1)
        h = np.asarray(h_outputs, dtype=np.float64)
        num = np.sum(h * (y - p), axis=0)
        den = np.sum(h * h * p * (p - 1.0), axis=0)
        return -_guarded_ratio(num, den)

    def loss_value(self, targets, margin):
        y = np.asarray(targets, dtype=np.float64)
        p = np.clip(softmax(margin, axis=1),
                    PROBABILITY_CLAMP, 1.0 - PROBABILITY_CLAMP)
        return float(np.mean(-np.sum(y * np.log(p), axis=1)))

    def output_transform(self, margin):
        return softmax(margin, axis=1)


class SquaredErrorLoss(LossModel):
    """Squared error (y - F)^2 / 2 for real-valued targets."""

    name = "regression"
    n_outputs = 1

    def init_constant(self, targets):
        y = np.asarray(targets, dtype=np.float64)
        if y.size == 0:
            raise DataError("regression targets are empty")
        return np.array([float(np.mean(y))])

    def pseudo_residuals(self, targets, margin):
        return np.asarray(targets, dtype=np.float64) - margin

    def newton_rho(self, targets, margin, h_outputs):
        r = self.pseudo_residuals(targets, margin)
        num = np.sum(r * h_outputs)
        den = np.sum(np.asarray(h_outputs, dtype=np.float64) ** 2)
        return _guarded_ratio(num, den)

    def loss_value(self, targets, margin):
        diff = np.asarray(targets, dtype=np.float64) - margin
        return float(np.mean(0.5 * diff * diff))

    def output_transform(self, margin):
        return np.array(margin, dtype=np.float64, copy=True)


TASKS = ("binary", "multiclass", "regression")


def loss_for_task(task, n_classes=None):
    """Return the loss model for a task name.

    ``n_classes`` is required for (and only used by) the multi-class task.
    """
    if task == "binary":
        return BinaryLogisticLoss()
    if task == "multiclass":
        if n_classes is None:
            raise ConfigError("multiclass task needs n_classes")
        return MultiClassCrossEntropyLoss(n_classes)
    if task == "regression":
        return SquaredErrorLoss()
    raise ConfigError(f"unknown task {task!r}; expected one of {TASKS}")
