"""Stage sub-network: one hidden layer of J units with linear outputs.

Each boosting stage trains one of these on pseudo-residuals under mean
squared error.  Training is deterministic full-batch quasi-Newton descent
(scipy's L-BFGS-B driven by the analytic gradient below), so a seed fully
reproduces a fit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigError, TrainingDivergedError
from .numerics import RandomStream, as_float_matrix, sigmoid


def _relu(a):
    return np.maximum(a, 0.0)


# activation -> (map, derivative as a function of pre-activation a and output z)
ACTIVATIONS = {
    "tanh": (np.tanh, lambda a, z: 1.0 - z * z),
    "logistic": (sigmoid, lambda a, z: z * (1.0 - z)),
    "relu": (_relu, lambda a, z: (a > 0.0).astype(np.float64)),
}


def hidden_activation(name):
    try:
        return ACTIVATIONS[name][0]
    except KeyError:
        raise ConfigError(f"unknown activation {name!r}; "
                          f"expected one of {sorted(ACTIVATIONS)}") from None


@dataclass(frozen=True)
class FitConfig:
    """Sub-network training budget and initialization.

    tolerance is the relative loss improvement between consecutive
    iterations below which training stops.  init_scale multiplies the
    fan-scaled uniform initialization bound sqrt(6/(fan_in+fan_out)).
    """

    max_iterations: int = 200
    tolerance: float = 1e-5
    activation: str = "tanh"
    init_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.tolerance < 0.0:
            raise ConfigError(f"tolerance must be >= 0, got {self.tolerance}")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}; "
                              f"expected one of {sorted(ACTIVATIONS)}")
        if self.init_scale <= 0.0:
            raise ConfigError(f"init_scale must be > 0, got {self.init_scale}")


@dataclass(frozen=True)
class SubNetwork:
    """Weights of one trained stage.

    hidden_weights has shape (n_hidden, n_features+1) with the hidden biases
    in the last column; output_weights has shape (n_outputs, n_hidden+1)
    with the output biases in the last column.  The output layer is linear.
    """

    hidden_weights: np.ndarray
    output_weights: np.ndarray
    activation: str = "tanh"

    @property
    def n_hidden(self):
        return self.hidden_weights.shape[0]

    @property
    def n_features(self):
        return self.hidden_weights.shape[1] - 1

    @property
    def n_outputs(self):
        return self.output_weights.shape[0]

    def predict(self, features):
        X = as_float_matrix(features, "features")
        if X.shape[1] != self.n_features:
            raise ValueError(f"features have width {X.shape[1]}, "
                             f"network expects {self.n_features}")
        act = ACTIVATIONS[self.activation][0]
        z = act(X @ self.hidden_weights[:, :-1].T + self.hidden_weights[:, -1])
        return z @ self.output_weights[:, :-1].T + self.output_weights[:, -1]


def _unpack(theta, n_features, n_hidden, n_outputs):
    split = n_hidden * (n_features + 1)
    V = theta[:split].reshape(n_hidden, n_features + 1)
    W = theta[split:].reshape(n_outputs, n_hidden + 1)
    return V, W


def mse_and_gradient(theta, X, R, n_hidden, activation):
    """Mean squared error over all output entries and its gradient in theta.

    theta packs the hidden matrix (row-major) followed by the output matrix.
    """
    act, dact = ACTIVATIONS[activation]
    n, d = X.shape
    k = R.shape[1]
    V, W = _unpack(theta, d, n_hidden, k)
    A = X @ V[:, :-1].T + V[:, -1]
    Z = act(A)
    E = Z @ W[:, :-1].T + W[:, -1] - R
    value = float(np.mean(E * E))

    G = (2.0 / E.size) * E
    grad_W = np.concatenate([G.T @ Z, G.sum(axis=0)[:, None]], axis=1)
    dA = (G @ W[:, :-1]) * dact(A, Z)
    grad_V = np.concatenate([dA.T @ X, dA.sum(axis=0)[:, None]], axis=1)
    return value, np.concatenate([grad_V.ravel(), grad_W.ravel()])


def fit_subnetwork(features, residual_targets, n_hidden, config):
    """Fit a SubNetwork to residual targets under mean squared error.

    Deterministic given config.seed.  The returned network never has a
    higher training MSE than its own random initialization.  Raises
    TrainingDivergedError if the loss or weights go non-finite (retry with
    a smaller init_scale).
    """
    X = as_float_matrix(features, "features")
    R = as_float_matrix(residual_targets, "residual_targets")
    if X.shape[0] != R.shape[0]:
        raise ValueError(f"features have {X.shape[0]} rows, "
                         f"residual_targets have {R.shape[0]}")
    if n_hidden < 1:
        raise ConfigError(f"n_hidden must be >= 1, got {n_hidden}")
    n, d = X.shape
    k = R.shape[1]

    stream = RandomStream(config.seed)
    bound_v = np.sqrt(6.0 / (d + n_hidden)) * config.init_scale
    bound_w = np.sqrt(6.0 / (n_hidden + k)) * config.init_scale
    V0 = (2.0 * stream.uniform((n_hidden, d + 1)) - 1.0) * bound_v
    W0 = (2.0 * stream.uniform((k, n_hidden + 1)) - 1.0) * bound_w
    theta0 = np.concatenate([V0.ravel(), W0.ravel()])

    initial_value = mse_and_gradient(theta0, X, R, n_hidden, config.activation)[0]
    if not np.isfinite(initial_value):
        raise TrainingDivergedError("initial loss is not finite")

    result = minimize(
        mse_and_gradient, theta0,
        args=(X, R, n_hidden, config.activation),
        method="L-BFGS-B", jac=True,
        options={"maxiter": config.max_iterations,
                 "ftol": config.tolerance,
                 "gtol": 1e-14},
    )
    theta = result.x
    if not (np.isfinite(result.fun) and np.all(np.isfinite(theta))):
        raise TrainingDivergedError(
            f"sub-network training diverged (loss={result.fun!r})")
    # L-BFGS-B line searches from theta0, so this guard should never fire;
    # it pins the no-worse-than-initialization contract regardless.
    if result.fun > initial_value:
        theta = theta0

    V, W = _unpack(theta, d, n_hidden, k)
    return SubNetwork(V.copy(), W.copy(), config.activation)
