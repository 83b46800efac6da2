"""Boosted ensembles: multiclass AdaBoost over stumps and gradient boosting.

AdaBoost uses the multiclass stage weight log((1-err)/err) + log(K-1),
which reduces to the classic two-class weight at K=2. Stages stop early on
a perfect stump (the stage is kept with a clamped finite weight) or when
the weighted error reaches the multiclass chance bound 1 - 1/K (the stage
is discarded).

Gradient boosting minimizes the multinomial deviance: each stage fits one
regression tree per class to the residual (one-hot minus softmax) and takes
the standard Newton leaf step scaled by (K-1)/K; scores start at the class
log-priors, so a zero learning rate predicts the prior-majority class.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .binning import bin_features
from .cart import CartTree, grow_tree
from .treekernels import grow_reg_tree, predict_class_tree, predict_reg_tree

_ERR_CLAMP = 1e-10


@dataclass
class AdaBoostState:
    stages: list[CartTree]
    stage_weights: list[float]
    n_classes: int
    prior_majority: int

    def to_json_dict(self) -> dict:
        return {
            "n_classes": self.n_classes,
            "prior_majority": self.prior_majority,
            "stage_weights": self.stage_weights,
            "stages": [t.to_json_dict() for t in self.stages],
        }


def fit_adaboost(
    X: np.ndarray,
    y_idx: np.ndarray,
    n_classes: int,
    stages: int = 50,
    learning_rate: float = 1.0,
    seed: int = 0,
) -> AdaBoostState:
    X = np.ascontiguousarray(X, np.float64)
    n = X.shape[0]
    binned = bin_features(X)
    w = np.full(n, 1.0 / n)
    counts = np.bincount(y_idx, minlength=n_classes)
    state = AdaBoostState(
        stages=[], stage_weights=[], n_classes=n_classes,
        prior_majority=int(np.argmax(counts)),
    )
    chance_bound = 1.0 - 1.0 / n_classes
    for _ in range(stages):
        stump = grow_tree(binned, y_idx, n_classes, sample_weight=w, max_depth=1)
        pred = predict_class_tree(
            X, stump.feature, stump.threshold, stump.left, stump.right, stump.leaf
        )
        miss = pred != y_idx
        err = float(w[miss].sum())
        if err >= chance_bound:
            break  # no better than chance: discard the stage and stop
        err_c = max(err, _ERR_CLAMP)
        alpha = learning_rate * (np.log((1.0 - err_c) / err_c) + np.log(n_classes - 1.0))
        state.stages.append(stump)
        state.stage_weights.append(float(alpha))
        if err <= 0.0:
            break  # perfect stage: nothing left to reweight
        w = w * np.exp(alpha * miss)
        w /= w.sum()
    return state


def predict_adaboost(state: AdaBoostState, X: np.ndarray) -> np.ndarray:
    X = np.ascontiguousarray(X, np.float64)
    if not state.stages:
        return np.full(X.shape[0], state.prior_majority, dtype=np.int64)
    votes = np.zeros((X.shape[0], state.n_classes))
    rows = np.arange(X.shape[0])
    for stump, alpha in zip(state.stages, state.stage_weights):
        ids = predict_class_tree(
            X, stump.feature, stump.threshold, stump.left, stump.right, stump.leaf
        )
        votes[rows, ids] += alpha
    return np.argmax(votes, axis=1)


@dataclass
class RegTree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    is_leaf: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "is_leaf": self.is_leaf.tolist(),
        }


@dataclass
class GradientBoostState:
    base_scores: np.ndarray  # (K,) log priors
    trees: list[list[RegTree]]  # [stage][class]
    learning_rate: float
    n_classes: int
    train_deviance: np.ndarray = field(default_factory=lambda: np.empty(0))

    def to_json_dict(self) -> dict:
        return {
            "n_classes": self.n_classes,
            "learning_rate": self.learning_rate,
            "base_scores": self.base_scores.tolist(),
            "trees": [[t.to_json_dict() for t in stage] for stage in self.trees],
        }


def _softmax(F: np.ndarray) -> np.ndarray:
    z = F - F.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def multinomial_deviance(F: np.ndarray, y_idx: np.ndarray) -> float:
    z = F - F.max(axis=1, keepdims=True)
    log_prob = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    return float(-log_prob[np.arange(len(y_idx)), y_idx].mean())


def fit_gradient_boost(
    X: np.ndarray,
    y_idx: np.ndarray,
    n_classes: int,
    stages: int = 100,
    depth: int = 3,
    learning_rate: float = 0.1,
    seed: int = 0,
) -> GradientBoostState:
    X = np.ascontiguousarray(X, np.float64)
    n = X.shape[0]
    binned = bin_features(X)
    priors = np.bincount(y_idx, minlength=n_classes) / n
    base = np.log(np.maximum(priors, 1e-12))
    F = np.tile(base, (n, 1))
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y_idx] = 1.0
    newton_scale = (n_classes - 1.0) / n_classes

    deviance = [multinomial_deviance(F, y_idx)]
    all_trees: list[list[RegTree]] = []
    for _ in range(stages):
        p = _softmax(F)
        stage_trees: list[RegTree] = []
        for c in range(n_classes):
            r = onehot[:, c] - p[:, c]
            h = p[:, c] * (1.0 - p[:, c])
            nodes = grow_reg_tree(
                binned.codes,
                r,
                h,
                binned.cuts_flat,
                binned.cut_offsets,
                depth,
                2,
                newton_scale,
            )
            tree = RegTree(*nodes)
            stage_trees.append(tree)
            if learning_rate != 0.0:
                upd = predict_reg_tree(
                    X, tree.feature, tree.threshold, tree.left, tree.right,
                    tree.value, tree.is_leaf,
                )
                F[:, c] += learning_rate * upd
        all_trees.append(stage_trees)
        deviance.append(multinomial_deviance(F, y_idx))

    return GradientBoostState(
        base_scores=base,
        trees=all_trees,
        learning_rate=learning_rate,
        n_classes=n_classes,
        train_deviance=np.array(deviance),
    )


def gradient_boost_scores(state: GradientBoostState, X: np.ndarray) -> np.ndarray:
    X = np.ascontiguousarray(X, np.float64)
    F = np.tile(state.base_scores, (X.shape[0], 1))
    if state.learning_rate == 0.0:
        return F
    for stage in state.trees:
        for c, tree in enumerate(stage):
            F[:, c] += state.learning_rate * predict_reg_tree(
                X, tree.feature, tree.threshold, tree.left, tree.right,
                tree.value, tree.is_leaf,
            )
    return F


def predict_gradient_boost(state: GradientBoostState, X: np.ndarray) -> np.ndarray:
    return np.argmax(gradient_boost_scores(state, X), axis=1)
