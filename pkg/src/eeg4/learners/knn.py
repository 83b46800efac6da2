"""K-nearest-neighbor classifier over standardized features.

Neighbors are ranked by (Euclidean distance, training row index) so ties at
the k boundary resolve deterministically. The vote is a plain majority;
tied classes are broken by the smaller mean distance of their neighbors,
then by lower class index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class KnnState:
    X: np.ndarray  # standardized training rows
    y: np.ndarray  # indices into the fitted class array
    k: int

    def to_json_dict(self) -> dict:
        return {"X": self.X.tolist(), "y": self.y.tolist(), "k": self.k}


def fit_knn(X: np.ndarray, y_idx: np.ndarray, k: int) -> KnnState:
    if k > X.shape[0]:
        raise ValueError(f"k={k} exceeds {X.shape[0]} training rows")
    return KnnState(X=X, y=np.asarray(y_idx, dtype=np.int64), k=int(k))


def _vote(labels: np.ndarray, dists: np.ndarray, n_classes: int) -> int:
    counts = np.bincount(labels, minlength=n_classes)
    best = counts.max()
    tied = np.flatnonzero(counts == best)
    if tied.size == 1:
        return int(tied[0])
    means = np.array([dists[labels == c].mean() for c in tied])
    return int(tied[np.argmin(means)])  # argmin keeps the lowest class on ties


def predict_knn(state: KnnState, n_classes: int, X: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Majority label among the k nearest training rows, chunked over queries."""
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    train = state.X
    n_train = train.shape[0]
    train_sq = np.einsum("ij,ij->i", train, train)
    k = state.k
    for s in range(0, n, chunk):
        q = X[s : s + chunk]
        d2 = train_sq[None, :] - 2.0 * (q @ train.T)
        d2 += np.einsum("ij,ij->i", q, q)[:, None]
        np.maximum(d2, 0.0, out=d2)
        if k < n_train:
            part = np.argpartition(d2, k - 1, axis=1)[:, :k]
        else:
            part = np.broadcast_to(np.arange(n_train), (q.shape[0], n_train))
        for r in range(q.shape[0]):
            cand = part[r]
            # boundary ties: if more than k rows sit within the kth distance,
            # fall back to ranking the full row so (distance, index) order is exact
            dk = d2[r, cand].max()
            if k < n_train and np.count_nonzero(d2[r] <= dk) > k:
                cand = np.arange(n_train)
            dist = d2[r, cand]
            order = np.lexsort((cand, dist))
            take = cand[order][:k]
            labels = state.y[take]
            out[s + r] = _vote(labels, np.sqrt(d2[r, take]), n_classes)
    return out
