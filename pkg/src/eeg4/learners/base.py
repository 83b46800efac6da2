"""Shared fit/predict contract for the nine classifiers.

Every algorithm is fit through ``fit(spec, X, y)`` and queried through
``predict(model, X)``. Distance- and margin-based methods (LDA, SVM, KNN)
see standardized features; tree ensembles see raw features (they split on
order statistics, so scaling is irrelevant and raw thresholds stay
interpretable). All randomness flows from the spec's seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import DegenerateTrainingSet, DimensionMismatch

ALGORITHMS: tuple[str, ...] = (
    "LDA",
    "ShrinkageLDA",
    "LinearSVM",
    "RbfSVM",
    "KNN",
    "DecisionTree",
    "RandomForest",
    "AdaBoost",
    "GradientBoost",
)

# algorithms whose inputs are standardized with train statistics
_STANDARDIZED = {"LDA", "ShrinkageLDA", "LinearSVM", "RbfSVM", "KNN"}

_DEFAULTS: dict[str, dict[str, Any]] = {
    "LDA": {},
    "ShrinkageLDA": {},
    "LinearSVM": {"C": 1.0, "tol": 1e-3, "max_passes": None},
    "RbfSVM": {"C": 1.0, "gamma": "scale", "tol": 1e-3, "max_passes": None},
    "KNN": {"k": 5},
    "DecisionTree": {"max_depth": None, "min_split": 2},
    "RandomForest": {
        "trees": 100,
        "features_per_split": None,  # ceil(sqrt(d)) at fit time
        "bootstrap": True,
        "max_depth": None,
        "min_split": 2,
    },
    "AdaBoost": {"stages": 50, "learning_rate": 1.0},
    "GradientBoost": {"stages": 100, "depth": 3, "learning_rate": 0.1},
}


def _check_positive(params: dict, names: tuple[str, ...]) -> None:
    for name in names:
        v = params.get(name)
        if v is not None and not (isinstance(v, (int, float)) and v > 0):
            raise ValueError(f"hyperparameter {name} must be positive, got {v!r}")


@dataclass(frozen=True)
class ModelSpec:
    """Algorithm identifier, hyperparameter overrides and the fit seed."""

    algorithm: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(
                f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}"
            )
        unknown = set(self.params) - set(_DEFAULTS[self.algorithm])
        if unknown:
            raise ValueError(f"{self.algorithm}: unknown hyperparameters {sorted(unknown)}")

    def resolved(self) -> dict:
        merged = dict(_DEFAULTS[self.algorithm])
        merged.update(self.params)
        _check_positive(merged, ("C", "tol", "k", "trees", "stages", "learning_rate", "depth"))
        if merged.get("k") is not None and merged["k"] < 1:
            raise ValueError("k must be >= 1")
        if merged.get("trees") is not None and merged["trees"] < 1:
            raise ValueError("trees must be >= 1")
        gamma = merged.get("gamma")
        if gamma is not None and gamma != "scale" and not (
            isinstance(gamma, (int, float)) and gamma > 0
        ):
            raise ValueError(f"gamma must be 'scale' or positive, got {gamma!r}")
        return merged


@dataclass
class Standardizer:
    """Per-feature mean/std fitted on training rows; std floored at 1e-12."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        std = np.maximum(std, 1e-12)
        return cls(mean=mean, std=std)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.std


@dataclass
class TrainedModel:
    spec: ModelSpec
    classes: np.ndarray
    n_features: int
    standardizer: Standardizer | None
    state: Any

    def predict(self, X: np.ndarray) -> np.ndarray:
        from . import predict

        return predict(self, X)


def validate_training_set(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2:
        raise DimensionMismatch(f"X must be 2-D, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise DimensionMismatch(f"y shape {y.shape} does not match {X.shape[0]} rows")
    if not np.all(np.isfinite(X)):
        raise ValueError("training data contains non-finite values")
    if X.shape[0] < 2:
        raise DegenerateTrainingSet(f"need at least 2 training rows, got {X.shape[0]}")
    classes = np.unique(y)
    if classes.size < 2:
        raise DegenerateTrainingSet(f"need at least 2 classes, got {classes.tolist()}")
    if X.shape[0] < classes.size:
        raise DegenerateTrainingSet(
            f"{X.shape[0]} rows cannot cover {classes.size} classes"
        )
    return X, y, classes


def validate_probe(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"probe shape {X.shape} does not match fitted dimension {model.n_features}"
        )
    if not np.all(np.isfinite(X)):
        raise ValueError("probe data contains non-finite values")
    return X


def standardize_if_needed(algorithm: str, X: np.ndarray) -> tuple[Standardizer | None, np.ndarray]:
    if algorithm in _STANDARDIZED:
        st = Standardizer.fit(X)
        return st, st.transform(X)
    return None, X


def default_features_per_split(d: int) -> int:
    return math.ceil(math.sqrt(d))


def model_to_json_dict(model: TrainedModel) -> dict:
    """Versioned JSON document of the fitted model (no compatibility promise)."""

    def arr(a):
        return np.asarray(a).tolist()

    state = model.state
    doc = {
        "format_version": 1,
        "algorithm": model.spec.algorithm,
        "params": model.spec.params,
        "seed": model.spec.seed,
        "classes": arr(model.classes),
        "n_features": model.n_features,
    }
    if model.standardizer is not None:
        doc["standardizer"] = {
            "mean": arr(model.standardizer.mean),
            "std": arr(model.standardizer.std),
        }
    doc["state"] = state.to_json_dict() if hasattr(state, "to_json_dict") else None
    return doc


def save_model(model: TrainedModel, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(model_to_json_dict(model), sort_keys=True) + "\n", encoding="utf-8"
    )
