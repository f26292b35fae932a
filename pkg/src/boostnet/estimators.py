"""Scikit-learn style estimators wrapping the boosting trainer.

These follow the usual fit/predict contract (get_params, set_params,
clone and grid-search compatible) so the trainer composes with sklearn
pipelines and model selection.  The underlying ensemble is exposed as
``ensemble_`` and can be flattened to a standard single-hidden-layer
network with ``flatten()``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.multiclass import check_classification_targets
from sklearn.utils.validation import check_is_fitted, column_or_1d, validate_data

from . import booster
from .booster import TrainConfig
from .errors import DataError
from .flatten import flatten as flatten_ensemble
from .subnet import FitConfig


class _BaseBoostedNet(BaseEstimator):
    def __init__(self, n_stages=200, units_per_stage=1, learning_rate=0.1,
                 subsample=1.0, max_iterations=200, tolerance=1e-5,
                 activation="tanh", init_scale=1.0, rho_on_subsample=False,
                 patience=None, random_state=0):
        self.n_stages = n_stages
        self.units_per_stage = units_per_stage
        self.learning_rate = learning_rate
        self.subsample = subsample
        self.max_iterations = max_iterations
        self.tolerance = tolerance
        self.activation = activation
        self.init_scale = init_scale
        self.rho_on_subsample = rho_on_subsample
        self.patience = patience
        self.random_state = random_state

    def _train_config(self, task):
        seed = 0 if self.random_state is None else int(self.random_state)
        return TrainConfig(
            n_stages=self.n_stages,
            units_per_stage=self.units_per_stage,
            learning_rate=self.learning_rate,
            subsample=self.subsample,
            task=task,
            fit=FitConfig(max_iterations=self.max_iterations,
                          tolerance=self.tolerance,
                          activation=self.activation,
                          init_scale=self.init_scale),
            seed=seed,
            rho_on_subsample=self.rho_on_subsample,
            patience=self.patience,
        )

    def flatten(self):
        """The trained ensemble rewritten as one standard flat network."""
        check_is_fitted(self, "ensemble_")
        return flatten_ensemble(self.ensemble_)

    @property
    def training_log_(self):
        check_is_fitted(self, "ensemble_")
        return self.ensemble_.training_log


class BoostedNetRegressor(RegressorMixin, _BaseBoostedNet):
    """Shallow network regressor trained stage-wise by gradient boosting.

    Parameters
    ----------
    n_stages : int, default=200
        Number of boosting stages; the flattened network has
        n_stages * units_per_stage hidden units.
    units_per_stage : int, default=1
        Hidden units in each stage's sub-network.
    learning_rate : float, default=0.1
        Shrinkage in (0, 1] applied to every stage coefficient.
    subsample : float, default=1.0
        Fraction of rows each stage's sub-network is fit on.
    max_iterations, tolerance : sub-network training budget and relative
        improvement stop.
    activation : {"tanh", "logistic", "relu"}, default="tanh"
        Hidden activation of every sub-network.
    init_scale : float, default=1.0
        Multiplier on the fan-scaled uniform weight initialization.
    rho_on_subsample : bool, default=False
        Compute the stage line search on the subsample instead of all rows.
    patience : int or None, default=None
        Stop early after this many stages without training-loss improvement.
    random_state : int, default=0
        Master seed; runs are fully reproducible.

    Attributes
    ----------
    ensemble_ : BoostedEnsemble
        The trained additive expansion.
    """

    def fit(self, X, y):
        X, y = validate_data(self, X, y, y_numeric=True)
        y = column_or_1d(y, warn=True).astype(np.float64)
        self.ensemble_ = booster.train(X, y.reshape(-1, 1),
                                       self._train_config("regression"))
        return self

    def predict(self, X, n_stages=None):
        check_is_fitted(self, "ensemble_")
        X = validate_data(self, X, reset=False)
        return booster.predict(self.ensemble_, X, n_stages)[:, 0]

    def staged_predict(self, X):
        """Yield predictions after each boosting stage."""
        check_is_fitted(self, "ensemble_")
        X = validate_data(self, X, reset=False)
        for m, margin in booster.iter_staged_margins(self.ensemble_, X):
            if m > 0:
                yield margin[:, 0].copy()


class BoostedNetClassifier(ClassifierMixin, _BaseBoostedNet):
    """Shallow network classifier trained stage-wise by gradient boosting.

    Two classes use the logistic loss on -1/+1 targets; three or more use
    softmax cross-entropy on one-hot targets with one multi-output
    sub-network per stage.  See BoostedNetRegressor for the parameters.

    Attributes
    ----------
    classes_ : ndarray
        Sorted class labels.
    ensemble_ : BoostedEnsemble
        The trained additive expansion.
    """

    def fit(self, X, y):
        X, y = validate_data(self, X, y)
        check_classification_targets(y)
        y = column_or_1d(y, warn=True)
        self.classes_ = np.unique(y)
        if self.classes_.shape[0] < 2:
            raise DataError("training targets contain a single class")
        if self.classes_.shape[0] == 2:
            task = "binary"
            encoded = np.where(y == self.classes_[1], 1.0, -1.0).reshape(-1, 1)
        else:
            task = "multiclass"
            encoded = (y[:, None] == self.classes_[None, :]).astype(np.float64)
        self.ensemble_ = booster.train(X, encoded, self._train_config(task))
        return self

    def _proba_from_margin_transform(self, transformed):
        if self.ensemble_.config.task == "binary":
            p = transformed[:, 0]
            return np.column_stack([1.0 - p, p])
        return transformed

    def predict_proba(self, X, n_stages=None):
        check_is_fitted(self, "ensemble_")
        X = validate_data(self, X, reset=False)
        return self._proba_from_margin_transform(
            booster.predict(self.ensemble_, X, n_stages))

    def predict(self, X, n_stages=None):
        proba = self.predict_proba(X, n_stages)
        return self.classes_[np.argmax(proba, axis=1)]

    def decision_function(self, X, n_stages=None):
        """Raw additive margins (one column per output)."""
        check_is_fitted(self, "ensemble_")
        X = validate_data(self, X, reset=False)
        margin = booster.staged_margins(self.ensemble_, X, n_stages)
        return margin[:, 0] if margin.shape[1] == 1 else margin

    def staged_predict_proba(self, X):
        """Yield class probabilities after each boosting stage."""
        check_is_fitted(self, "ensemble_")
        X = validate_data(self, X, reset=False)
        transform = self.ensemble_.loss_model().output_transform
        for m, margin in booster.iter_staged_margins(self.ensemble_, X):
            if m > 0:
                yield self._proba_from_margin_transform(transform(margin))

    def staged_predict(self, X):
        """Yield predicted labels after each boosting stage."""
        for proba in self.staged_predict_proba(X):
            yield self.classes_[np.argmax(proba, axis=1)]
