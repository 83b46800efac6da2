"""Random forest: bootstrapped CART ensemble with per-split feature subsets.

Each tree draws its bootstrap sample and per-node feature subsets from its
own seed (derived from the fit seed by tree index), so the ensemble is
reproducible regardless of how tree training is scheduled. Prediction is a
majority vote with ties going to the lowest class index.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .binning import bin_features
from .cart import CartTree, grow_tree
from .treekernels import predict_class_tree


@dataclass
class ForestState:
    trees: list[CartTree]
    n_classes: int

    def to_json_dict(self) -> dict:
        return {
            "n_classes": self.n_classes,
            "trees": [t.to_json_dict() for t in self.trees],
        }


def tree_seeds(seed: int, n_trees: int) -> np.ndarray:
    return np.random.SeedSequence(seed).generate_state(n_trees)


def fit_random_forest(
    X: np.ndarray,
    y_idx: np.ndarray,
    n_classes: int,
    trees: int = 100,
    features_per_split: int | None = None,
    bootstrap: bool = True,
    max_depth: int | None = None,
    min_split: int = 2,
    seed: int = 0,
) -> ForestState:
    X = np.ascontiguousarray(X, np.float64)
    binned = bin_features(X)
    seeds = tree_seeds(seed, trees)

    def one(t: int) -> CartTree:
        return grow_tree(
            binned,
            y_idx,
            n_classes,
            max_depth=max_depth,
            min_split=min_split,
            features_per_split=features_per_split,
            bootstrap=bootstrap,
            seed=int(seeds[t]),
        )

    workers = min(os.cpu_count() or 1, 4)
    if trees >= 8 and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            grown = list(pool.map(one, range(trees)))
    else:
        grown = [one(t) for t in range(trees)]
    return ForestState(trees=grown, n_classes=n_classes)


def predict_forest(state: ForestState, X: np.ndarray) -> np.ndarray:
    X = np.ascontiguousarray(X, np.float64)
    votes = np.zeros((X.shape[0], state.n_classes), dtype=np.int64)
    rows = np.arange(X.shape[0])
    for tree in state.trees:
        ids = predict_class_tree(
            X, tree.feature, tree.threshold, tree.left, tree.right, tree.leaf
        )
        np.add.at(votes, (rows, ids), 1)
    return np.argmax(votes, axis=1)  # argmax resolves ties to the lowest class
