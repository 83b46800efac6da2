"""Compiled kernels for histogram-based CART growing and prediction.

Trees are grown depth-first (left child before right) over pre-binned
feature codes; split search scans per-feature weighted class histograms
between the observed bin range of each node. Candidate thresholds are the
real-valued midpoints behind each bin cut, so prediction runs on raw
floats. All randomness (bootstrap draws, then per-node feature subsets)
comes from one seed passed per tree.

Split ties are broken toward the lowest feature index, then the lowest
threshold: features are scanned in ascending index order and bins in
ascending value order with a strict improvement test.
"""

from __future__ import annotations

import numpy as np
from numba import njit

N_BINS_MAX = 256


@njit(cache=True, nogil=True)
def grow_class_tree(
    codes,  # (n, d) uint8
    y,  # (n,) int64 class ids 0..K-1
    w,  # (n,) float64 sample weights
    n_classes,
    cuts_flat,  # real thresholds, concatenated per feature
    cut_offsets,  # (d+1,) int64
    max_depth,  # -1 for unlimited
    min_split,
    mtry,
    bootstrap,  # 0/1
    seed,
):
    n_total, d = codes.shape
    np.random.seed(seed)
    if bootstrap == 1:
        idx = np.random.randint(0, n_total, n_total)
    else:
        idx = np.arange(n_total)
    m0 = idx.shape[0]

    cap = 2 * m0 + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    leaf = np.full(cap, -1, np.int64)

    stack = np.zeros((cap, 4), np.int64)  # node, start, end, depth
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = m0
    stack[0, 3] = 0
    top = 1
    n_nodes = 1

    hist = np.zeros((d, N_BINS_MAX, n_classes), np.float64)
    bin_lo = np.zeros(d, np.int64)
    bin_hi = np.zeros(d, np.int64)
    totals = np.zeros(n_classes, np.float64)
    feat_buf = np.empty(d, np.int64)
    chosen = np.empty(d, np.int64)

    while top > 0:
        top -= 1
        node = stack[top, 0]
        s = stack[top, 1]
        e = stack[top, 2]
        depth = stack[top, 3]
        m = e - s

        totals[:] = 0.0
        first_label = y[idx[s]]
        pure = True
        for i in range(s, e):
            lab = y[idx[i]]
            totals[lab] += w[idx[i]]
            if lab != first_label:
                pure = False
        w_total = 0.0
        for c in range(n_classes):
            w_total += totals[c]

        make_leaf = (
            pure
            or m < min_split
            or (max_depth >= 0 and depth >= max_depth)
            or n_nodes + 2 > cap
            or w_total <= 0.0
        )
        if not make_leaf:
            # sample the feature subset: partial Fisher-Yates, then sort ascending
            n_try = mtry
            if n_try >= d:
                for k in range(d):
                    chosen[k] = k
                n_try = d
            else:
                for k in range(d):
                    feat_buf[k] = k
                for k in range(n_try):
                    j = k + np.random.randint(0, d - k)
                    tmp = feat_buf[k]
                    feat_buf[k] = feat_buf[j]
                    feat_buf[j] = tmp
                for k in range(n_try):
                    chosen[k] = feat_buf[k]
                # insertion sort for the tie-break order
                for a in range(1, n_try):
                    v = chosen[a]
                    b = a - 1
                    while b >= 0 and chosen[b] > v:
                        chosen[b + 1] = chosen[b]
                        b -= 1
                    chosen[b + 1] = v

            # fill histograms, tracking the observed bin range per feature
            for k in range(n_try):
                f = chosen[k]
                bin_lo[f] = N_BINS_MAX
                bin_hi[f] = -1
            for i in range(s, e):
                row = idx[i]
                wi = w[row]
                lab = y[row]
                for k in range(n_try):
                    f = chosen[k]
                    b = codes[row, f]
                    hist[f, b, lab] += wi
                    if b < bin_lo[f]:
                        bin_lo[f] = b
                    if b > bin_hi[f]:
                        bin_hi[f] = b

            parent_score = 0.0
            for c in range(n_classes):
                parent_score += totals[c] * totals[c]
            parent_score /= w_total

            best_score = parent_score
            best_f = -1
            best_bin = -1
            lcounts = np.zeros(n_classes, np.float64)
            for k in range(n_try):
                f = chosen[k]
                if bin_hi[f] <= bin_lo[f]:
                    continue  # single bin: nothing to split
                lcounts[:] = 0.0
                wl = 0.0
                for b in range(bin_lo[f], bin_hi[f]):
                    occupied = False
                    for c in range(n_classes):
                        hv = hist[f, b, c]
                        if hv > 0.0:
                            occupied = True
                            lcounts[c] += hv
                            wl += hv
                    if not occupied or wl <= 0.0 or wl >= w_total:
                        continue
                    wr = w_total - wl
                    sl = 0.0
                    sr = 0.0
                    for c in range(n_classes):
                        lc = lcounts[c]
                        rc = totals[c] - lc
                        sl += lc * lc
                        sr += rc * rc
                    score = sl / wl + sr / wr
                    if score > best_score:
                        best_score = score
                        best_f = f
                        best_bin = b

            # re-zero only the bins we touched
            for k in range(n_try):
                f = chosen[k]
                for b in range(bin_lo[f], bin_hi[f] + 1):
                    for c in range(n_classes):
                        hist[f, b, c] = 0.0

            if best_f < 0:
                make_leaf = True

        if make_leaf:
            best_c = 0
            for c in range(1, n_classes):
                if totals[c] > totals[best_c]:
                    best_c = c
            leaf[node] = best_c
            continue

        # partition idx[s:e] on code <= best_bin
        pivot = s
        for i in range(s, e):
            if codes[idx[i], best_f] <= best_bin:
                tmp = idx[i]
                idx[i] = idx[pivot]
                idx[pivot] = tmp
                pivot += 1

        feature[node] = best_f
        threshold[node] = cuts_flat[cut_offsets[best_f] + best_bin]
        ln = n_nodes
        rn = n_nodes + 1
        n_nodes += 2
        left[node] = ln
        right[node] = rn
        # push right first so the left child is grown first
        stack[top, 0] = rn
        stack[top, 1] = pivot
        stack[top, 2] = e
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = ln
        stack[top, 1] = s
        stack[top, 2] = pivot
        stack[top, 3] = depth + 1
        top += 1

    return (
        feature[:n_nodes],
        threshold[:n_nodes],
        left[:n_nodes],
        right[:n_nodes],
        leaf[:n_nodes],
    )


@njit(cache=True, nogil=True)
def grow_reg_tree(
    codes,
    r,  # (n,) float64 residuals (regression target)
    h,  # (n,) float64 per-sample curvature for the leaf Newton step
    cuts_flat,
    cut_offsets,
    max_depth,
    min_split,
    newton_scale,
):
    n_total, d = codes.shape
    cap = 2 * n_total + 1
    feature = np.full(cap, -1, np.int64)
    threshold = np.zeros(cap, np.float64)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    value = np.zeros(cap, np.float64)
    is_leaf = np.zeros(cap, np.uint8)

    idx = np.arange(n_total)
    stack = np.zeros((cap, 4), np.int64)
    stack[0, 2] = n_total
    top = 1
    n_nodes = 1

    hist_s = np.zeros((d, N_BINS_MAX), np.float64)  # sum of residuals
    hist_c = np.zeros((d, N_BINS_MAX), np.int64)  # sample counts
    bin_lo = np.zeros(d, np.int64)
    bin_hi = np.zeros(d, np.int64)

    while top > 0:
        top -= 1
        node = stack[top, 0]
        s = stack[top, 1]
        e = stack[top, 2]
        depth = stack[top, 3]
        m = e - s

        total_s = 0.0
        for i in range(s, e):
            total_s += r[idx[i]]

        make_leaf = m < min_split or (max_depth >= 0 and depth >= max_depth) or n_nodes + 2 > cap
        best_f = -1
        best_bin = -1
        if not make_leaf:
            for f in range(d):
                bin_lo[f] = N_BINS_MAX
                bin_hi[f] = -1
            for i in range(s, e):
                row = idx[i]
                ri = r[row]
                for f in range(d):
                    b = codes[row, f]
                    hist_s[f, b] += ri
                    hist_c[f, b] += 1
                    if b < bin_lo[f]:
                        bin_lo[f] = b
                    if b > bin_hi[f]:
                        bin_hi[f] = b

            parent_score = total_s * total_s / m
            best_score = parent_score
            for f in range(d):
                if bin_hi[f] <= bin_lo[f]:
                    continue
                sl = 0.0
                cl = 0
                for b in range(bin_lo[f], bin_hi[f]):
                    if hist_c[f, b] == 0:
                        continue
                    sl += hist_s[f, b]
                    cl += hist_c[f, b]
                    cr = m - cl
                    if cl == 0 or cr == 0:
                        continue
                    sr = total_s - sl
                    score = sl * sl / cl + sr * sr / cr
                    if score > best_score:
                        best_score = score
                        best_f = f
                        best_bin = b

            for f in range(d):
                for b in range(bin_lo[f], bin_hi[f] + 1):
                    hist_s[f, b] = 0.0
                    hist_c[f, b] = 0

            if best_f < 0:
                make_leaf = True

        if make_leaf:
            denom = 0.0
            for i in range(s, e):
                denom += h[idx[i]]
            if denom > 1e-150:
                value[node] = newton_scale * total_s / denom
            else:
                value[node] = 0.0
            is_leaf[node] = 1
            continue

        pivot = s
        for i in range(s, e):
            if codes[idx[i], best_f] <= best_bin:
                tmp = idx[i]
                idx[i] = idx[pivot]
                idx[pivot] = tmp
                pivot += 1

        feature[node] = best_f
        threshold[node] = cuts_flat[cut_offsets[best_f] + best_bin]
        ln = n_nodes
        rn = n_nodes + 1
        n_nodes += 2
        left[node] = ln
        right[node] = rn
        stack[top, 0] = rn
        stack[top, 1] = pivot
        stack[top, 2] = e
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = ln
        stack[top, 1] = s
        stack[top, 2] = pivot
        stack[top, 3] = depth + 1
        top += 1

    return (
        feature[:n_nodes],
        threshold[:n_nodes],
        left[:n_nodes],
        right[:n_nodes],
        value[:n_nodes],
        is_leaf[:n_nodes],
    )


@njit(cache=True, nogil=True)
def predict_class_tree(X, feature, threshold, left, right, leaf):
    n = X.shape[0]
    out = np.empty(n, np.int64)
    for i in range(n):
        node = 0
        while leaf[node] < 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = leaf[node]
    return out


@njit(cache=True, nogil=True)
def predict_reg_tree(X, feature, threshold, left, right, value, is_leaf):
    n = X.shape[0]
    out = np.empty(n, np.float64)
    for i in range(n):
        node = 0
        while is_leaf[node] == 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out
