"""The sequential boosting loop.

Starting from the constant stage, each iteration computes pseudo-residuals
at the current margin, fits a small sub-network to them (optionally on a
row subsample), scales it with a one-step Newton-Raphson line-search
coefficient damped by the learning rate, and adds the result to the margin.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .losses import TASKS, loss_for_task
from .numerics import RandomStream, as_float_matrix, child_seed, subsample_indices
from .subnet import FitConfig, SubNetwork, fit_subnetwork


@dataclass(frozen=True)
class TrainConfig:
    """Hyper-parameters of one boosting run.

    n_stages is the number of boosted stages (the flattened network ends up
    with n_stages * units_per_stage hidden units).  learning_rate is the
    shrinkage factor in (0, 1] applied to every stage coefficient.
    subsample is the fraction of rows each stage's sub-network is fit on;
    the line-search coefficient is still computed on all rows unless
    rho_on_subsample is set.  patience, when not None, stops training after
    that many consecutive stages without a training-loss improvement.
    """

    n_stages: int = 200
    units_per_stage: int = 1
    learning_rate: float = 0.1
    subsample: float = 1.0
    task: str = "regression"
    fit: FitConfig = field(default_factory=FitConfig)
    seed: int = 0
    rho_on_subsample: bool = False
    patience: int | None = None

    def __post_init__(self):
        if self.n_stages < 1:
            raise ConfigError(f"n_stages must be >= 1, got {self.n_stages}")
        if self.units_per_stage < 1:
            raise ConfigError(f"units_per_stage must be >= 1, got {self.units_per_stage}")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ConfigError(f"learning_rate must be in (0, 1], got {self.learning_rate}")
        if not 0.0 < self.subsample <= 1.0:
            raise ConfigError(f"subsample must be in (0, 1], got {self.subsample}")
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}; expected one of {TASKS}")
        if self.patience is not None and self.patience < 1:
            raise ConfigError(f"patience must be >= 1 or None, got {self.patience}")


@dataclass(frozen=True)
class StageModel:
    """One trained stage: its sub-network and shrinkage-folded coefficients."""

    net: SubNetwork
    rho_eff: np.ndarray  # (n_outputs,) learning_rate * newton rho


@dataclass(frozen=True)
class BoostedEnsemble:
    """A trained additive expansion: constant stage plus ordered stages.

    training_log[m] is the training loss of the first m stages, so it has
    one more entry than stages.
    """

    f0: np.ndarray
    stages: tuple
    config: TrainConfig
    n_features: int
    training_log: tuple

    @property
    def n_stages(self):
        return len(self.stages)

    @property
    def n_outputs(self):
        return self.f0.shape[0]

    def loss_model(self):
        return loss_for_task(self.config.task, self.n_outputs)


def _encoded_targets(task, targets):
    Y = as_float_matrix(targets, "targets")
    if task in ("binary", "regression") and Y.shape[1] != 1:
        raise ConfigError(f"{task} targets must have one column, got {Y.shape[1]}")
    return Y


def train(features, targets, config):
    """Run the boosting loop and return the trained ensemble.

    features is (n, d); targets are encoded for config.task: a -1/+1 column
    for binary, one-hot rows for multiclass, a real column for regression.
    Deterministic given config.seed.
    """
    X = as_float_matrix(features, "features")
    Y = _encoded_targets(config.task, targets)
    if X.shape[0] != Y.shape[0]:
        raise ValueError(f"features have {X.shape[0]} rows, targets have {Y.shape[0]}")
    if X.shape[0] == 0:
        raise ConfigError("training data is empty")
    n = X.shape[0]

    loss = loss_for_task(config.task, Y.shape[1])
    f0 = loss.init_constant(Y)  # raises DataError for degenerate targets
    margin = np.tile(f0, (n, 1))
    log = [loss.loss_value(Y, margin)]

    stages = []
    best = log[0]
    stale = 0
    for t in range(config.n_stages):
        residuals = loss.pseudo_residuals(Y, margin)
        if config.subsample < 1.0:
            idx = subsample_indices(n, config.subsample,
                                    RandomStream(child_seed(config.seed, t, 0)))
            fit_X, fit_R = X[idx], residuals[idx]
        else:
            idx = None
            fit_X, fit_R = X, residuals
        stage_fit = replace(config.fit, seed=child_seed(config.seed, t, 1))
        net = fit_subnetwork(fit_X, fit_R, config.units_per_stage, stage_fit)

        h = net.predict(X)
        if config.rho_on_subsample and idx is not None:
            rho = loss.newton_rho(Y[idx], margin[idx], h[idx])
        else:
            rho = loss.newton_rho(Y, margin, h)
        rho_eff = config.learning_rate * rho

        margin = margin + rho_eff * h
        stages.append(StageModel(net, rho_eff))
        log.append(loss.loss_value(Y, margin))

        if config.patience is not None:
            if log[-1] < best:
                best = log[-1]
                stale = 0
            else:
                stale += 1
                if stale >= config.patience:
                    break

    return BoostedEnsemble(f0, tuple(stages), config, X.shape[1], tuple(log))


def _checked_features(model, features):
    X = as_float_matrix(features, "features")
    if X.shape[1] != model.n_features:
        raise ValueError(f"features have width {X.shape[1]}, "
                         f"model expects {model.n_features}")
    return X


def staged_margins(model, features, n_stages=None):
    """Margin of the first n_stages stages (all stages when None)."""
    m = model.n_stages if n_stages is None else n_stages
    if not 0 <= m <= model.n_stages:
        raise ValueError(f"n_stages must be in [0, {model.n_stages}], got {m}")
    X = _checked_features(model, features)
    margin = np.tile(model.f0, (X.shape[0], 1))
    for stage in model.stages[:m]:
        margin = margin + stage.rho_eff * stage.net.predict(X)
    return margin


def iter_staged_margins(model, features):
    """Yield (m, margin after m stages) for m = 0..n_stages, incrementally."""
    X = _checked_features(model, features)
    margin = np.tile(model.f0, (X.shape[0], 1))
    yield 0, margin
    for m, stage in enumerate(model.stages, start=1):
        margin = margin + stage.rho_eff * stage.net.predict(X)
        yield m, margin


def predict(model, features, n_stages=None):
    """Predictions (probabilities or values) of the truncated expansion."""
    return model.loss_model().output_transform(
        staged_margins(model, features, n_stages))
