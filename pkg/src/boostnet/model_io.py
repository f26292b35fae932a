"""Versioned, human-inspectable text format for trained models.

Files are JSON documents carrying a format_version, the model kind
("ensemble" or "flat_network"), task and shape metadata, all weights, the
training configuration and the per-stage training-loss log.  Floats are
written in shortest round-trip decimal form, so load(save(x)) reproduces x
bit for bit.  See docs/model_format.md for the field-by-field description.
"""

from __future__ import annotations

import dataclasses
import json

import numpy as np

from .booster import BoostedEnsemble, StageModel, TrainConfig
from .errors import ModelFormatError, ModelVersionError
from .flatten import FlatNetwork
from .subnet import ACTIVATIONS, FitConfig, SubNetwork

FORMAT_VERSION = 1

_KINDS = ("ensemble", "flat_network")


@dataclasses.dataclass(frozen=True)
class LoadedModel:
    """A model file's contents: the model plus optional data-prep metadata."""

    model: object  # BoostedEnsemble or FlatNetwork
    standardization: tuple | None = None  # (mean, scale) per-column vectors
    feature_names: tuple | None = None
    class_labels: tuple | None = None


def _config_to_doc(config):
    return dataclasses.asdict(config)


def _doc_to_config(doc):
    if not isinstance(doc, dict):
        raise ModelFormatError("field 'train_config': expected an object")
    expected = {f.name for f in dataclasses.fields(TrainConfig)}
    got = set(doc)
    if got != expected:
        raise ModelFormatError(
            f"field 'train_config': keys {sorted(got)} do not match "
            f"expected {sorted(expected)}")
    fit_doc = doc["fit"]
    fit_expected = {f.name for f in dataclasses.fields(FitConfig)}
    if not isinstance(fit_doc, dict) or set(fit_doc) != fit_expected:
        raise ModelFormatError(
            f"field 'train_config.fit': keys do not match {sorted(fit_expected)}")
    try:
        fit = FitConfig(**fit_doc)
        return TrainConfig(**{**doc, "fit": fit})
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"field 'train_config': {exc}") from exc


def _array_field(doc, name, shape=None):
    if name not in doc:
        raise ModelFormatError(f"field {name!r}: missing")
    try:
        a = np.asarray(doc[name], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"field {name!r}: not a numeric array ({exc})") from exc
    if shape is not None and a.shape != shape:
        raise ModelFormatError(f"field {name!r}: expected shape {shape}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ModelFormatError(f"field {name!r}: contains non-finite values")
    return a


def _int_field(doc, name, minimum=0):
    if name not in doc:
        raise ModelFormatError(f"field {name!r}: missing")
    value = doc[name]
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ModelFormatError(f"field {name!r}: expected an integer >= {minimum}, "
                               f"got {value!r}")
    return value


def _ensemble_to_doc(model):
    config = model.config
    return {
        "format_version": FORMAT_VERSION,
        "kind": "ensemble",
        "task": config.task,
        "d": model.n_features,
        "K_out": model.n_outputs,
        "T": model.n_stages,
        "J": config.units_per_stage,
        "activation": config.fit.activation,
        "f0": model.f0.tolist(),
        "stages": [
            {"V": stage.net.hidden_weights.tolist(),
             "W_out": stage.net.output_weights.tolist(),
             "rho_eff": stage.rho_eff.tolist()}
            for stage in model.stages
        ],
        "train_config": _config_to_doc(config),
        "training_log": list(model.training_log),
    }


def _flat_to_doc(net):
    return {
        "format_version": FORMAT_VERSION,
        "kind": "flat_network",
        "task": net.task,
        "d": net.n_features,
        "K_out": net.n_outputs,
        "T": net.n_stages,
        "J": net.units_per_stage,
        "activation": net.activation,
        "V": net.hidden_weights.tolist(),
        "Omega": net.output_weights.tolist(),
        "bias_contribs": net.bias_contribs.tolist(),
        "base_bias": net.base_bias.tolist(),
        "active_stages": net.active_stages,
        "train_config": None if net.train_config is None
        else _config_to_doc(net.train_config),
        "training_log": list(net.training_log),
    }


def save(model, path, standardization=None, feature_names=None, class_labels=None):
    """Write an ensemble or flat network to ``path``.

    standardization, when given, is a (mean, scale) pair of per-column
    vectors recorded so prediction can re-apply training-time feature
    scaling; feature_names and class_labels likewise document the encoded
    training columns and the class order behind -1/+1 or one-hot targets.
    """
    if isinstance(model, BoostedEnsemble):
        doc = _ensemble_to_doc(model)
    elif isinstance(model, FlatNetwork):
        doc = _flat_to_doc(model)
    else:
        raise TypeError(f"cannot save objects of type {type(model).__name__}")
    if standardization is None:
        doc["standardization"] = None
    else:
        mean, scale = standardization
        doc["standardization"] = {
            "mean": np.asarray(mean, dtype=np.float64).tolist(),
            "scale": np.asarray(scale, dtype=np.float64).tolist(),
        }
    doc["feature_names"] = None if feature_names is None else [
        str(n) for n in feature_names]
    doc["class_labels"] = None if class_labels is None else [
        str(c) for c in class_labels]
    text = json.dumps(doc, indent=1, allow_nan=False)
    with open(path, "w", encoding="ascii") as handle:
        handle.write(text)
        handle.write("\n")


def _doc_to_ensemble(doc):
    d = _int_field(doc, "d", minimum=1)
    k_out = _int_field(doc, "K_out", minimum=1)
    n_stages = _int_field(doc, "T", minimum=0)
    units = _int_field(doc, "J", minimum=1)
    config = _doc_to_config(doc.get("train_config"))
    if config.task != doc.get("task"):
        raise ModelFormatError("field 'task': does not match train_config.task")
    if config.fit.activation != doc.get("activation"):
        raise ModelFormatError("field 'activation': does not match train_config.fit")
    if config.units_per_stage != units:
        raise ModelFormatError("field 'J': does not match train_config.units_per_stage")
    f0 = _array_field(doc, "f0", shape=(k_out,))
    raw_stages = doc.get("stages")
    if not isinstance(raw_stages, list) or len(raw_stages) != n_stages:
        raise ModelFormatError(f"field 'stages': expected a list of length {n_stages}")
    stages = []
    for index, stage_doc in enumerate(raw_stages):
        if not isinstance(stage_doc, dict):
            raise ModelFormatError(f"field 'stages[{index}]': expected an object")
        V = _array_field(stage_doc, "V", shape=(units, d + 1))
        W = _array_field(stage_doc, "W_out", shape=(k_out, units + 1))
        rho = _array_field(stage_doc, "rho_eff", shape=(k_out,))
        stages.append(StageModel(SubNetwork(V, W, config.fit.activation), rho))
    log = _training_log(doc, n_stages + 1)
    return BoostedEnsemble(f0, tuple(stages), config, d, log)


def _training_log(doc, expected_length):
    log = doc.get("training_log")
    if not isinstance(log, list) or len(log) != expected_length:
        raise ModelFormatError(
            f"field 'training_log': expected a list of length {expected_length}")
    values = _array_field({"training_log": log}, "training_log")
    return tuple(float(v) for v in values)


def _doc_to_flat(doc):
    d = _int_field(doc, "d", minimum=1)
    k_out = _int_field(doc, "K_out", minimum=1)
    n_stages = _int_field(doc, "T", minimum=1)
    units = _int_field(doc, "J", minimum=1)
    activation = doc.get("activation")
    if activation not in ACTIVATIONS:
        raise ModelFormatError(f"field 'activation': unknown value {activation!r}")
    task = doc.get("task")
    active = _int_field(doc, "active_stages", minimum=0)
    if active > n_stages:
        raise ModelFormatError(f"field 'active_stages': {active} exceeds T={n_stages}")
    config = None
    if doc.get("train_config") is not None:
        config = _doc_to_config(doc["train_config"])
    log = doc.get("training_log", [])
    if not isinstance(log, list):
        raise ModelFormatError("field 'training_log': expected a list")
    return FlatNetwork(
        hidden_weights=_array_field(doc, "V", shape=(n_stages * units, d + 1)),
        output_weights=_array_field(doc, "Omega", shape=(k_out, n_stages * units)),
        bias_contribs=_array_field(doc, "bias_contribs", shape=(k_out, n_stages)),
        base_bias=_array_field(doc, "base_bias", shape=(k_out,)),
        activation=activation,
        task=task,
        units_per_stage=units,
        active_stages=active,
        train_config=config,
        training_log=tuple(float(v) for v in log),
    )


def load(path):
    """Read a model file; returns a LoadedModel.

    The model is a BoostedEnsemble or FlatNetwork depending on the file's
    kind.  Malformed files raise ModelFormatError naming the offending
    field; files from a newer format raise ModelVersionError.
    """
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not a valid model file: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("not a valid model file: top level must be an object")

    version = doc.get("format_version")
    if not isinstance(version, int) or isinstance(version, bool):
        raise ModelFormatError("field 'format_version': missing or not an integer")
    if version > FORMAT_VERSION:
        raise ModelVersionError(
            f"field 'format_version': file has version {version}, "
            f"this build reads up to {FORMAT_VERSION}")

    kind = doc.get("kind")
    if kind not in _KINDS:
        raise ModelFormatError(f"field 'kind': expected one of {_KINDS}, got {kind!r}")
    task = doc.get("task")
    if task not in ("binary", "multiclass", "regression"):
        raise ModelFormatError(f"field 'task': unknown value {task!r}")

    standardization = None
    std_doc = doc.get("standardization")
    if std_doc is not None:
        if not isinstance(std_doc, dict) or set(std_doc) != {"mean", "scale"}:
            raise ModelFormatError("field 'standardization': expected mean and scale")
        mean = _array_field(std_doc, "mean")
        scale = _array_field(std_doc, "scale")
        if mean.shape != scale.shape:
            raise ModelFormatError("field 'standardization': mean/scale shape mismatch")
        standardization = (mean, scale)

    def _string_tuple(name):
        value = doc.get(name)
        if value is None:
            return None
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ModelFormatError(f"field {name!r}: expected a list of strings")
        return tuple(value)

    if kind == "ensemble":
        model = _doc_to_ensemble(doc)
    else:
        model = _doc_to_flat(doc)
    return LoadedModel(model=model, standardization=standardization,
                       feature_names=_string_tuple("feature_names"),
                       class_labels=_string_tuple("class_labels"))
