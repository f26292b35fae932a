"""boostnet: train a single shallow neural network by gradient boosting.

The trainer builds the network stage by stage: each stage is a tiny
sub-network fit to the loss pseudo-residuals and scaled by a one-step
Newton-Raphson line search.  The trained stages flatten into one standard
single-hidden-layer network whose trailing units can be switched off at
inference time without retraining.
"""

from .booster import BoostedEnsemble, StageModel, TrainConfig, predict, staged_margins, train
from .data import Dataset, Standardization, from_arrays, load_csv, ringnorm2d, tictactoe_endgames
from .errors import (BoostnetError, ConfigError, DataError, ModelFormatError,
                     ModelVersionError, ParseError, TrainingDivergedError)
from .estimators import BoostedNetClassifier, BoostedNetRegressor
from .evaluation import CVReport, GridSpec, boundary_raster, grid_search, kfold_cv, staged_curve
from .flatten import FlatNetwork, flatten, forward, set_active_stages
from .losses import loss_for_task
from .model_io import FORMAT_VERSION, LoadedModel, load, save
from .numerics import RandomStream, sigmoid, softmax, subsample_indices
from .subnet import FitConfig, SubNetwork, fit_subnetwork

__version__ = "0.1.0"

__all__ = [
    "BoostedEnsemble", "BoostedNetClassifier", "BoostedNetRegressor",
    "BoostnetError", "CVReport", "ConfigError", "DataError", "Dataset",
    "FORMAT_VERSION", "FitConfig", "FlatNetwork", "GridSpec", "LoadedModel",
    "ModelFormatError", "ModelVersionError", "ParseError", "RandomStream",
    "StageModel", "Standardization", "SubNetwork", "TrainConfig",
    "TrainingDivergedError", "boundary_raster", "fit_subnetwork", "flatten",
    "forward", "from_arrays", "grid_search", "kfold_cv", "load", "load_csv",
    "loss_for_task", "predict", "ringnorm2d", "save", "set_active_stages",
    "sigmoid", "softmax", "staged_curve", "staged_margins",
    "subsample_indices", "tictactoe_endgames", "train",
]
