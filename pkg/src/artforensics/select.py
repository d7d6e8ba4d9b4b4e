"""Cross-validated grid search and recursive feature elimination.

Each fold re-fits the scaler on its own training rows. An optional
``on_fit`` hook receives the row indices every fit is allowed to see, so
callers can assert that no held-out row leaks into training.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from artforensics import preprocess
from artforensics.dataset import kfold
from artforensics.errors import ArtForensicsError, InvalidInput
from artforensics.evaluation import accuracy
from artforensics.models import LRConfig, SVMConfig, predict_lr, predict_svm, train_lr, train_svm
from artforensics.neural import MLPConfig, predict_mlp, train_mlp

log = logging.getLogger(__name__)

FAMILIES = ("lr", "svm", "mlp")

# Hyperparameter values exactly as printed in the LR/SVM/MLP/CNN tables.
# "elastincnet" keeps the printed spelling.
PUBLISHED_GRIDS: dict[str, dict[str, list]] = {
    "lr": {
        "C": [0.2, 0.3, 0.5, 0.7, 0.8, 1],
        "solver": ["lbfgs", "saga", "liblinear"],
        "penalty": ["l2", "elastincnet"],
        "max_iter": [50, 80, 100, 120, 200, 500, 1000],
    },
    "svm": {
        "C": [0.1, 1, 10],
        "gamma": [0.1, 1, 10, "scale", "auto"],
        "kernel": ["linear", "rbf"],
    },
    "mlp": {
        "hidden_layer_sizes": [(50,), (100,), (50, 50)],
        "activation": ["identity", "logistic", "relu"],
        "alpha": [0.0001, 0.05],
        "random_state": [30, 40, 50],
        "solver": ["adam"],
        "learning_rate_init": [0.0001],
        "max_iter": [200, 300, 1000],
    },
    "cnn": {
        "layers": [6, 7, 8, 9, 10, 11],
        "activation": ["softmax", "sigmoid"],
        "dropout_rate": [0.1, 0.2, 0.3, 0.4, 0.5],
        "optimization": ["Adam"],
        "learning_rate": [0.001],
    },
}

# Best settings marked in the same tables (binary / multiclass).
PUBLISHED_BEST = {
    ("lr", "binary"): {"C": 1, "solver": "liblinear", "penalty": "l2", "max_iter": 50},
    ("lr", "multiclass"): {"C": 1, "solver": "lbfgs", "penalty": "l2", "max_iter": 100},
    ("svm", "binary"): {"C": 10, "gamma": "auto", "kernel": "rbf"},
    ("svm", "multiclass"): {"C": 10, "gamma": "scale", "kernel": "rbf"},
    ("mlp", "binary"): {"hidden_layer_sizes": (50, 50), "activation": "relu", "alpha": 0.05,
                        "random_state": 40, "solver": "adam", "learning_rate_init": 0.0001,
                        "max_iter": 1000},
    ("mlp", "multiclass"): {"hidden_layer_sizes": (100,), "activation": "relu", "alpha": 0.0001,
                            "random_state": 30, "solver": "adam", "learning_rate_init": 0.0001,
                            "max_iter": 1000},
}


class SkippedConfig(ArtForensicsError):
    """A grid cell this toolkit deliberately does not train."""


def make_config(family: str, params: dict):
    """Translate table-style hyperparameter names into a model config."""
    p = dict(params)
    if family == "lr":
        penalty = p.pop("penalty", "l2")
        if penalty != "l2":
            raise SkippedConfig(f"penalty {penalty!r} is not supported (only l2)")
        return LRConfig(c=float(p.pop("C", 1.0)), max_iter=int(p.pop("max_iter", 100)),
                        solver=str(p.pop("solver", "lbfgs")), **p)
    if family == "svm":
        gamma = p.pop("gamma", "scale")
        if not isinstance(gamma, str):
            gamma = float(gamma)
        return SVMConfig(c=float(p.pop("C", 1.0)), gamma=gamma, kernel=p.pop("kernel", "rbf"), **p)
    if family == "mlp":
        solver = p.pop("solver", "adam")
        if solver != "adam":
            raise SkippedConfig(f"MLP solver {solver!r} is not supported (only adam)")
        if "hidden_layer_sizes" in p:
            p["hidden_layer_sizes"] = tuple(p["hidden_layer_sizes"])
        return MLPConfig(**p)
    raise InvalidInput(f"unknown model family {family!r}")


def effective_key(family: str, cfg):
    """Configs with equal keys train identical models."""
    if family == "lr":
        return replace(cfg, solver="")
    if family == "svm" and cfg.kernel == "linear":
        return replace(cfg, gamma="auto")
    return cfg


def fit_model(family, cfg, X, y, task, n_classes=None):
    if family == "lr":
        return train_lr(X, y, cfg, task, n_classes)
    if family == "svm":
        return train_svm(X, y, cfg, task, n_classes)
    if family == "mlp":
        return train_mlp(X, y, cfg, task, n_classes)
    raise InvalidInput(f"unknown model family {family!r}")


def predict_labels(family, model, X) -> np.ndarray:
    if family == "lr":
        return predict_lr(model, X)[0]
    if family == "svm":
        return predict_svm(model, X)
    if family == "mlp":
        return predict_mlp(model, X)[0]
    raise InvalidInput(f"unknown model family {family!r}")


FitHook = Callable[[np.ndarray], None]


def cross_validate(family, cfg, X, y, task, folds, n_classes=None,
                   on_fit: FitHook | None = None) -> list[float]:
    """Accuracy on each fold, with the scaler re-fitted on the fold's training rows."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    scores = []
    for fold in folds:
        if on_fit is not None:
            on_fit(fold.train)
        scaler = preprocess.fit(X[fold.train])
        model = fit_model(family, cfg, scaler.transform(X[fold.train]), y[fold.train], task,
                          n_classes)
        pred = predict_labels(family, model, scaler.transform(X[fold.test]))
        scores.append(accuracy(y[fold.test], pred))
    return scores


@dataclass(frozen=True)
class GridSpec:
    model_family: str
    axes: dict[str, list]

    def __post_init__(self):
        if self.model_family not in FAMILIES:
            raise InvalidInput(f"grid search supports {FAMILIES}, got {self.model_family!r}")
        if not self.axes or any(len(v) == 0 for v in self.axes.values()):
            raise InvalidInput("grid axes must be non-empty")

    def cells(self) -> list[dict]:
        """Every combination, first axis varying slowest."""
        names = list(self.axes)
        return [dict(zip(names, combo)) for combo in itertools.product(*self.axes.values())]

    @classmethod
    def published(cls, family: str) -> "GridSpec":
        return cls(family, {k: list(v) for k, v in PUBLISHED_GRIDS[family].items()})


@dataclass
class GridRow:
    params: dict
    status: str  # "ok", "skipped" or "error"
    fold_scores: list[float] = field(default_factory=list)
    message: str = ""

    @property
    def mean(self) -> float:
        return float(np.mean(self.fold_scores)) if self.fold_scores else float("nan")


@dataclass
class GridResult:
    family: str
    rows: list[GridRow]
    best_index: int | None

    @property
    def best(self) -> GridRow | None:
        return None if self.best_index is None else self.rows[self.best_index]

    @property
    def best_params(self) -> dict | None:
        return None if self.best is None else dict(self.best.params)

    @property
    def best_config(self):
        return None if self.best is None else make_config(self.family, self.best.params)


def grid_search(grid: GridSpec, X, y, task, k=5, seed=0, n_classes=None,
                on_fit: FitHook | None = None) -> GridResult:
    """Mean k-fold accuracy for every grid cell; ties go to the earlier cell.

    Cells that build the same effective model (e.g. LR cells differing only
    in solver name) are trained once and share scores.
    """
    y = np.asarray(y)
    folds = kfold(y, k, seed)
    cache: dict = {}
    rows = []
    best_index, best_mean = None, -np.inf
    for params in grid.cells():
        try:
            cfg = make_config(grid.model_family, params)
        except SkippedConfig as exc:
            rows.append(GridRow(params, "skipped", message=str(exc)))
            continue
        except (InvalidInput, TypeError) as exc:
            rows.append(GridRow(params, "error", message=str(exc)))
            continue
        key = effective_key(grid.model_family, cfg)
        if key not in cache:
            try:
                cache[key] = cross_validate(grid.model_family, cfg, X, y, task, folds, n_classes,
                                            on_fit)
            except ArtForensicsError as exc:
                log.warning("grid cell %s failed: %s", params, exc)
                cache[key] = exc
        outcome = cache[key]
        if isinstance(outcome, Exception):
            rows.append(GridRow(params, "error", message=str(outcome)))
            continue
        rows.append(GridRow(params, "ok", list(outcome)))
        mean = float(np.mean(outcome))
        if mean > best_mean:
            best_index, best_mean = len(rows) - 1, mean
    return GridResult(grid.model_family, rows, best_index)


# -- recursive feature elimination --------------------------------------------

SURROGATE = LRConfig(c=1.0, max_iter=200)


@dataclass(frozen=True)
class RFEPoint:
    feature_count: int
    kept_features: tuple[str, ...]
    cv_accuracy: float
    dropped_feature: str | None  # removed after evaluating this point


@dataclass
class RFECurve:
    family: str
    points: list[RFEPoint]
    ranker: str = "l2-logistic-surrogate"

    def at(self, feature_count: int) -> RFEPoint:
        for p in self.points:
            if p.feature_count == feature_count:
                return p
        raise KeyError(feature_count)

    def best(self) -> RFEPoint:
        """Highest accuracy; ties go to the smaller feature set."""
        return max(self.points, key=lambda p: (p.cv_accuracy, -p.feature_count))


def surrogate_importance(X, y, task, folds, n_classes=None, cfg: LRConfig = SURROGATE,
                         on_fit: FitHook | None = None) -> np.ndarray:
    """Mean absolute L2-logistic weight of each column, averaged over folds."""
    total = np.zeros(X.shape[1])
    for fold in folds:
        if on_fit is not None:
            on_fit(fold.train)
        scaler = preprocess.fit(X[fold.train])
        model = train_lr(scaler.transform(X[fold.train]), y[fold.train], cfg, task, n_classes)
        total += np.abs(model.weights).mean(axis=0)
    return total / len(folds)


def rfe(family: str, cfg, X, y, feature_names, task, k=5, seed=0, n_classes=None,
        on_fit: FitHook | None = None, min_features: int = 1) -> RFECurve:
    """Eliminate one feature per step, recording k-fold CV accuracy at every size.

    Features are ranked by an L2 logistic-regression surrogate whatever the
    model family, so curves from different families are comparable. The
    same folds are used at every step.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    names = list(feature_names)
    if X.shape[1] != len(names):
        raise InvalidInput("feature_names must match the number of columns")
    folds = kfold(y, k, seed)
    kept = list(range(X.shape[1]))
    points = []
    while True:
        Xk = X[:, kept]
        assert Xk.shape[1] == len(kept)
        scores = cross_validate(family, cfg, Xk, y, task, folds, n_classes, on_fit)
        acc = float(np.mean(scores))
        if len(kept) <= min_features:
            points.append(RFEPoint(len(kept), tuple(names[i] for i in kept), acc, None))
            break
        importance = surrogate_importance(Xk, y, task, folds, n_classes, on_fit=on_fit)
        drop = int(np.argmin(importance))
        points.append(RFEPoint(len(kept), tuple(names[i] for i in kept), acc, names[kept[drop]]))
        del kept[drop]
    return RFECurve(family, points)
