"""Flatten a boosted ensemble into one standard feed-forward network.

The flat network has n_stages * units_per_stage hidden units; stage t's
hidden rows are copied verbatim and its output weights are folded with the
stage coefficient.  Because each stage's contribution to the output bias is
stored separately, the trailing units of any suffix of stages can be
switched off exactly: with m active stages the forward pass touches only
the first m*J hidden units and reproduces the m-stage ensemble prediction.

For binary models the ensemble's probability map 1/(1+exp(-2F)) is absorbed
into the weights (everything, including the constant stage, is doubled), so
the flat network is a conventional plain-sigmoid network.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

from .numerics import as_float_matrix, sigmoid, softmax
from .subnet import ACTIVATIONS

if TYPE_CHECKING:
    from .booster import TrainConfig


@dataclass(frozen=True)
class FlatNetwork:
    """A single-hidden-layer network with per-stage bias bookkeeping.

    hidden_weights: (n_stages*units_per_stage, n_features+1), biases last.
    output_weights: (n_outputs, n_stages*units_per_stage).
    bias_contribs:  (n_outputs, n_stages); column t is stage t's addition to
                    the output bias, so the effective bias with m active
                    stages is base_bias + bias_contribs[:, :m].sum(axis=1).
    active_stages:  how many leading stages the forward pass uses.
    """

    hidden_weights: np.ndarray
    output_weights: np.ndarray
    bias_contribs: np.ndarray
    base_bias: np.ndarray
    activation: str
    task: str
    units_per_stage: int
    active_stages: int
    train_config: TrainConfig | None = None
    training_log: tuple = ()

    @property
    def n_stages(self):
        return self.bias_contribs.shape[1]

    @property
    def n_features(self):
        return self.hidden_weights.shape[1] - 1

    @property
    def n_outputs(self):
        return self.output_weights.shape[0]

    @property
    def active_units(self):
        return self.active_stages * self.units_per_stage


def flatten(model):
    """Rewrite a BoostedEnsemble as an equivalent FlatNetwork."""
    if model.n_stages < 1:
        raise ValueError("cannot flatten an ensemble with no stages")
    factor = 2.0 if model.config.task == "binary" else 1.0

    hidden = np.vstack([stage.net.hidden_weights for stage in model.stages])
    blocks = []
    contribs = []
    for stage in model.stages:
        scale = factor * stage.rho_eff
        blocks.append(scale[:, None] * stage.net.output_weights[:, :-1])
        contribs.append(scale * stage.net.output_weights[:, -1])
    return FlatNetwork(
        hidden_weights=hidden,
        output_weights=np.hstack(blocks),
        bias_contribs=np.column_stack(contribs),
        base_bias=factor * model.f0,
        activation=model.config.fit.activation,
        task=model.config.task,
        units_per_stage=model.config.units_per_stage,
        active_stages=model.n_stages,
        train_config=model.config,
        training_log=tuple(model.training_log),
    )


def set_active_stages(net, n_stages):
    """Copy of ``net`` whose forward pass uses only the first n_stages stages."""
    if not 0 <= n_stages <= net.n_stages:
        raise ValueError(f"active stages must be in [0, {net.n_stages}], got {n_stages}")
    return replace(net, active_stages=n_stages)


def forward(net, features):
    """Predictions of the flat network on ``features``.

    Output is sigmoid / softmax / identity of the affine map, per task.
    Only the first active_stages * units_per_stage hidden units are touched.
    """
    X = as_float_matrix(features, "features")
    if X.shape[1] != net.n_features:
        raise ValueError(f"features have width {X.shape[1]}, "
                         f"network expects {net.n_features}")
    m = net.active_stages
    units = m * net.units_per_stage
    act = ACTIVATIONS[net.activation][0]
    V = net.hidden_weights[:units]
    z = act(X @ V[:, :-1].T + V[:, -1])
    bias = net.base_bias + net.bias_contribs[:, :m].sum(axis=1)
    raw = z @ net.output_weights[:, :units].T + bias
    if net.task == "binary":
        return sigmoid(raw)
    if net.task == "multiclass":
        return softmax(raw, axis=1)
    return raw
