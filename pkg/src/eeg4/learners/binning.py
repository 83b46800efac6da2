"""Feature binning for histogram-based tree growing.

Candidate split thresholds are midpoints between consecutive sorted unique
values. When a feature has at most ``max_bins`` distinct values the
candidate set is complete, so split search is exact CART; above that the
candidates are restricted to an evenly spaced (by rank, i.e. quantile)
subset, which keeps tree growing linear in sample count at benchmark scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_BINS = 255


@dataclass
class BinnedMatrix:
    codes: np.ndarray  # (n, d) uint8 bin ids
    cuts_flat: np.ndarray  # concatenated real thresholds for every feature
    cut_offsets: np.ndarray  # (d+1,) offsets into cuts_flat

    def cuts(self, feature: int) -> np.ndarray:
        return self.cuts_flat[self.cut_offsets[feature] : self.cut_offsets[feature + 1]]


def bin_features(X: np.ndarray, max_bins: int = MAX_BINS) -> BinnedMatrix:
    n, d = X.shape
    codes = np.empty((n, d), dtype=np.uint8)
    cuts: list[np.ndarray] = []
    for f in range(d):
        col = X[:, f]
        uniq = np.unique(col)
        mids = 0.5 * (uniq[1:] + uniq[:-1])
        if mids.size > max_bins - 1:
            take = np.unique(
                np.round(np.linspace(0, mids.size - 1, max_bins - 1)).astype(np.int64)
            )
            mids = mids[take]
        codes[:, f] = np.searchsorted(mids, col, side="right")
        cuts.append(mids)
    offsets = np.zeros(d + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([c.size for c in cuts])
    flat = np.concatenate(cuts) if cuts else np.empty(0)
    return BinnedMatrix(codes=codes, cuts_flat=flat.astype(np.float64), cut_offsets=offsets)
