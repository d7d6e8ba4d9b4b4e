"""Versioned, self-describing JSON model files.

Floats are written with ``repr`` precision, so a save/load round trip
reproduces every parameter bit for bit. A model file carries everything
prediction needs: the fitted scaler, the feature subset, the class names
and the extractor configuration.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from artforensics.errors import UnsupportedModelFile
from artforensics.features import ExtractorConfig
from artforensics.models import BinarySVM, LRModel, SVMModel, predict_lr, predict_svm
from artforensics.neural import (
    CNNModel,
    MLPModel,
    cnn_from_dict,
    cnn_to_dict,
    mlp_from_dict,
    mlp_to_dict,
    predict_cnn,
    predict_mlp,
)
from artforensics.preprocess import Scaler

FORMAT_NAME = "artforensics-model"
FORMAT_VERSION = 1


@dataclass
class ModelFile:
    model_family: str
    task: str
    model: object
    class_names: tuple[str, ...]
    scaler: Scaler | None = None
    feature_names: tuple[str, ...] = ()
    extractor_config: ExtractorConfig | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def input_side(self) -> int | None:
        return self.model.config.input_side if isinstance(self.model, CNNModel) else None

    def predict_features(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Labels and a confidence score per row of ``X`` (columns = feature_names)."""
        Z = self.scaler.transform(X)
        if self.model_family == "lr":
            labels, proba = predict_lr(self.model, Z)
            return labels, proba[np.arange(len(labels)), labels]
        if self.model_family == "mlp":
            labels, proba = predict_mlp(self.model, Z)
            return labels, proba[np.arange(len(labels)), labels]
        if self.model_family == "svm":
            labels = predict_svm(self.model, Z)
            if self.model.task == "binary":
                return labels, self.model.decision_function(Z)
            scores = np.zeros(len(labels))
            for m in self.model.machines:
                f = m.decision(Z, self.model.kernel, self.model.gamma)
                scores += np.where(f > 0, m.positive, m.negative) == labels
            return labels, scores / max(len(self.model.machines), 1)
        raise UnsupportedModelFile(f"{self.model_family} models do not take feature rows")

    def predict_images(self, images) -> tuple[np.ndarray, np.ndarray]:
        labels, scores = predict_cnn(self.model, images)
        return labels, scores[np.arange(len(labels)), labels]


def _svm_to_dict(m: SVMModel) -> dict:
    return {
        "kernel": m.kernel, "gamma": m.gamma, "c": m.c, "task": m.task,
        "n_classes": m.n_classes, "n_features": m.n_features,
        "machines": [
            {"positive": b.positive, "negative": b.negative,
             "support_vectors": b.support_vectors.tolist(), "dual_coef": b.dual_coef.tolist(),
             "bias": b.bias, "converged": b.converged}
            for b in m.machines
        ],
    }


def _svm_from_dict(d: dict) -> SVMModel:
    n_features = int(d["n_features"])
    machines = tuple(
        BinarySVM(int(b["positive"]), int(b["negative"]),
                  np.array(b["support_vectors"], dtype=np.float64).reshape(-1, n_features),
                  np.array(b["dual_coef"], dtype=np.float64), float(b["bias"]),
                  bool(b.get("converged", True)))
        for b in d["machines"]
    )
    return SVMModel(machines, d["kernel"], float(d["gamma"]), float(d["c"]), d["task"],
                    int(d["n_classes"]), n_features)


def _params_to_dict(family: str, model) -> dict:
    if family == "lr":
        return {"weights": model.weights.tolist(), "biases": model.biases.tolist(),
                "task": model.task}
    if family == "svm":
        return _svm_to_dict(model)
    if family == "mlp":
        return mlp_to_dict(model)
    if family == "cnn":
        return cnn_to_dict(model)
    raise UnsupportedModelFile(f"unknown model family {family!r}")


def _params_from_dict(family: str, d: dict):
    if family == "lr":
        W = np.array(d["weights"], dtype=np.float64)
        return LRModel(W.reshape(len(d["weights"]), -1), np.array(d["biases"], dtype=np.float64),
                       d["task"])
    if family == "svm":
        return _svm_from_dict(d)
    if family == "mlp":
        return mlp_from_dict(d)
    if family == "cnn":
        return cnn_from_dict(d)
    raise UnsupportedModelFile(f"unknown model family {family!r}")


def to_dict(mf: ModelFile) -> dict:
    return {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "model_family": mf.model_family,
        "task": mf.task,
        "class_names": list(mf.class_names),
        "feature_names": list(mf.feature_names),
        "scaler": mf.scaler.to_dict() if mf.scaler is not None else None,
        "extractor_config": mf.extractor_config.to_dict() if mf.extractor_config else None,
        "parameters": _params_to_dict(mf.model_family, mf.model),
        "metadata": mf.metadata,
    }


def from_dict(d: dict) -> ModelFile:
    if not isinstance(d, dict) or d.get("format") != FORMAT_NAME:
        raise UnsupportedModelFile("not an artforensics model file")
    version = d.get("format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedModelFile(f"unsupported model file version {version!r} "
                                   f"(this build reads version {FORMAT_VERSION})")
    try:
        family = d["model_family"]
        return ModelFile(
            model_family=family,
            task=d["task"],
            model=_params_from_dict(family, d["parameters"]),
            class_names=tuple(d["class_names"]),
            scaler=Scaler.from_dict(d["scaler"]) if d.get("scaler") else None,
            feature_names=tuple(d.get("feature_names") or ()),
            extractor_config=ExtractorConfig(**d["extractor_config"])
            if d.get("extractor_config") else None,
            metadata=dict(d.get("metadata") or {}),
        )
    except UnsupportedModelFile:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise UnsupportedModelFile(f"corrupted model file: {exc}") from exc


def save_model(mf: ModelFile, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(to_dict(mf), fh, sort_keys=True, allow_nan=False)
        fh.write("\n")


def load_model(path: str | os.PathLike) -> ModelFile:
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise UnsupportedModelFile(f"{path}: corrupted model file: {exc}") from exc
    return from_dict(d)
