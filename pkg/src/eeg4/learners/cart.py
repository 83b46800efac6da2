"""Single CART classification tree grown by best Gini-impurity decrease.

Thresholds are midpoints of consecutive sorted unique feature values; when
a feature exceeds 255 distinct values the candidate set is restricted to a
quantile-spaced subset of those midpoints (see binning). Ties between
splits break toward the lowest feature index, then the lowest threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .binning import BinnedMatrix, bin_features
from .treekernels import grow_class_tree, predict_class_tree


@dataclass
class CartTree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf: np.ndarray  # class id at leaves, -1 on internal nodes

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def to_json_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "leaf": self.leaf.tolist(),
        }


def grow_tree(
    binned: BinnedMatrix,
    y_idx: np.ndarray,
    n_classes: int,
    sample_weight: np.ndarray | None = None,
    max_depth: int | None = None,
    min_split: int = 2,
    features_per_split: int | None = None,
    bootstrap: bool = False,
    seed: int = 0,
) -> CartTree:
    n, d = binned.codes.shape
    w = np.ones(n) if sample_weight is None else np.ascontiguousarray(sample_weight, np.float64)
    mtry = d if features_per_split is None else int(features_per_split)
    if not 1 <= mtry <= d:
        raise ValueError(f"features_per_split must be in 1..{d}, got {mtry}")
    nodes = grow_class_tree(
        binned.codes,
        np.ascontiguousarray(y_idx, np.int64),
        w,
        n_classes,
        binned.cuts_flat,
        binned.cut_offsets,
        -1 if max_depth is None else int(max_depth),
        int(min_split),
        mtry,
        1 if bootstrap else 0,
        int(seed),
    )
    return CartTree(*nodes)


def build_cart(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: int | None = None,
    min_split: int = 2,
) -> tuple[CartTree, np.ndarray]:
    """Grow a plain CART on raw data; returns (tree, class values)."""
    X = np.ascontiguousarray(X, np.float64)
    classes, y_idx = np.unique(y, return_inverse=True)
    binned = bin_features(X)
    tree = grow_tree(binned, y_idx, len(classes), max_depth=max_depth, min_split=min_split)
    return tree, classes


def cart_predict(tree: CartTree, classes: np.ndarray, X: np.ndarray) -> np.ndarray:
    X = np.ascontiguousarray(X, np.float64)
    ids = predict_class_tree(X, tree.feature, tree.threshold, tree.left, tree.right, tree.leaf)
    return classes[ids]
