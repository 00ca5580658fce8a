"""CART regression tree kernels (numba-compiled).

Trees are stored as flat arrays: feature[i] == -1 marks a leaf, otherwise the
node splits on X[:, feature[i]] < threshold[i] (left) vs >= (right). Splits
maximize variance reduction; candidate thresholds are precomputed per feature
(all midpoints between adjacent distinct training values in exact mode, or a
capped set of histogram bin edges). Ties in gain are broken toward the lowest
feature index, then the lowest threshold, by strict-improvement scanning in
ascending order.
"""

import numpy as np
from numba import njit

_GAIN_EPS = 1e-10


def candidate_thresholds(X: np.ndarray, max_bins: int | None = None):
    """Per-feature sorted candidate threshold arrays, flattened with offsets.

    Exact mode (max_bins None): midpoints between adjacent distinct values.
    Histogram mode: when a feature has more than max_bins distinct values, the
    candidates are quantile-based bin edges (at most max_bins - 1 of them).
    """
    d = X.shape[1]
    per_feature = []
    for f in range(d):
        uniq = np.unique(X[:, f])
        if uniq.size < 2:
            per_feature.append(np.empty(0, dtype=np.float64))
            continue
        mids = (uniq[:-1] + uniq[1:]) / 2.0
        if max_bins is not None and uniq.size > max_bins:
            qs = np.linspace(0.0, 1.0, max_bins + 1)[1:-1]
            edges = np.unique(np.quantile(X[:, f], qs))
            per_feature.append(edges.astype(np.float64))
        else:
            per_feature.append(mids.astype(np.float64))
    offsets = np.zeros(d + 1, dtype=np.int64)
    for f in range(d):
        offsets[f + 1] = offsets[f] + per_feature[f].size
    flat = (np.concatenate(per_feature) if offsets[-1] > 0
            else np.empty(0, dtype=np.float64))
    return flat, offsets


@njit(cache=True)
def _best_split(X, y, idx, start, end, feats, n_feats, cand_flat, cand_off,
                min_leaf):
    m = end - start
    s_total = 0.0
    for i in range(start, end):
        s_total += y[idx[i]]
    parent_score = s_total * s_total / m

    best_score = parent_score + _GAIN_EPS * (1.0 + abs(parent_score))
    best_f = -1
    best_t = 0.0
    xs = np.empty(m, dtype=np.float64)
    ys = np.empty(m, dtype=np.float64)
    for fi in range(n_feats):
        f = feats[fi]
        c_lo = cand_off[f]
        c_hi = cand_off[f + 1]
        if c_hi == c_lo:
            continue
        for i in range(m):
            xs[i] = X[idx[start + i], f]
        order = np.argsort(xs)
        prev = xs[order[0]]
        for i in range(m):
            ys[i] = y[idx[start + order[i]]]
        s_left = 0.0
        for p in range(1, m):
            s_left += ys[p - 1]
            a = xs[order[p - 1]]
            b = xs[order[p]]
            if a == b:
                continue
            if p < min_leaf or m - p < min_leaf:
                continue
            # lowest candidate threshold t with a < t <= b
            lo, hi = c_lo, c_hi
            while lo < hi:
                mid = (lo + hi) // 2
                if cand_flat[mid] > a:
                    hi = mid
                else:
                    lo = mid + 1
            if lo == c_hi or cand_flat[lo] > b:
                continue
            t = cand_flat[lo]
            s_right = s_total - s_left
            score = s_left * s_left / p + s_right * s_right / (m - p)
            if score > best_score:
                best_score = score
                best_f = f
                best_t = t
    return best_f, best_t


@njit(cache=True)
def grow_tree(X, y, sample_idx, cand_flat, cand_off, max_depth, min_leaf,
              mtry, seed):
    """Grow one tree; returns (feature, threshold, left, right, value, n_nodes).

    max_depth < 0 means unlimited. mtry < n_features enables per-split feature
    subsampling seeded with np.random.seed(seed).
    """
    n = sample_idx.shape[0]
    d = X.shape[1]
    max_nodes = 2 * n + 1
    feature = np.full(max_nodes, -1, dtype=np.int64)
    threshold = np.zeros(max_nodes, dtype=np.float64)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    value = np.zeros(max_nodes, dtype=np.float64)

    if mtry < d:
        np.random.seed(seed)

    idx = sample_idx.copy()
    # DFS stack of (start, end, depth, node_id)
    stack_start = np.empty(max_nodes, dtype=np.int64)
    stack_end = np.empty(max_nodes, dtype=np.int64)
    stack_depth = np.empty(max_nodes, dtype=np.int64)
    stack_node = np.empty(max_nodes, dtype=np.int64)
    top = 0
    n_nodes = 1
    stack_start[0] = 0
    stack_end[0] = n
    stack_depth[0] = 0
    stack_node[0] = 0
    top = 1

    feats = np.arange(d)
    buf = np.empty(n, dtype=np.int64)

    while top > 0:
        top -= 1
        start = stack_start[top]
        end = stack_end[top]
        depth = stack_depth[top]
        node = stack_node[top]
        m = end - start

        s = 0.0
        for i in range(start, end):
            s += y[idx[i]]
        value[node] = s / m

        if m < 2 or m < 2 * min_leaf or (max_depth >= 0 and depth >= max_depth):
            continue

        if mtry < d:
            # partial Fisher-Yates, then ascending order for tie determinism
            pool = np.arange(d)
            for i in range(mtry):
                j = i + np.random.randint(0, d - i)
                tmp = pool[i]
                pool[i] = pool[j]
                pool[j] = tmp
            chosen = np.sort(pool[:mtry])
            best_f, best_t = _best_split(X, y, idx, start, end, chosen, mtry,
                                         cand_flat, cand_off, min_leaf)
        else:
            best_f, best_t = _best_split(X, y, idx, start, end, feats, d,
                                         cand_flat, cand_off, min_leaf)

        if best_f < 0:
            continue

        # stable in-place partition by X[:, best_f] < best_t
        n_left = 0
        for i in range(start, end):
            if X[idx[i], best_f] < best_t:
                buf[n_left] = idx[i]
                n_left += 1
        n_right = 0
        for i in range(start, end):
            if X[idx[i], best_f] >= best_t:
                buf[n_left + n_right] = idx[i]
                n_right += 1
        for i in range(m):
            idx[start + i] = buf[i]

        feature[node] = best_f
        threshold[node] = best_t
        left[node] = n_nodes
        right[node] = n_nodes + 1
        stack_start[top] = start
        stack_end[top] = start + n_left
        stack_depth[top] = depth + 1
        stack_node[top] = n_nodes
        top += 1
        stack_start[top] = start + n_left
        stack_end[top] = end
        stack_depth[top] = depth + 1
        stack_node[top] = n_nodes + 1
        top += 1
        n_nodes += 2

    return feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], \
        right[:n_nodes], value[:n_nodes], n_nodes


@njit(cache=True)
def predict_tree(feature, threshold, left, right, value, X):
    n = X.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] < threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


class Tree:
    """Thin wrapper around the flat-array tree representation."""

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, feature, threshold, left, right, value):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.value = value

    @classmethod
    def fit(cls, X, y, sample_idx=None, cand=None, max_depth=-1, min_leaf=1,
            mtry=None, seed=0):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.float64)
        if sample_idx is None:
            sample_idx = np.arange(X.shape[0], dtype=np.int64)
        if cand is None:
            cand = candidate_thresholds(X)
        cand_flat, cand_off = cand
        d = X.shape[1]
        if mtry is None:
            mtry = d
        f, t, l, r, v, n = grow_tree(X, y, sample_idx.astype(np.int64),
                                     cand_flat, cand_off,
                                     np.int64(max_depth), np.int64(min_leaf),
                                     np.int64(mtry), np.int64(seed))
        return cls(f, t, l, r, v)

    def predict(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        return predict_tree(self.feature, self.threshold, self.left,
                            self.right, self.value, X)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(np.array(d["feature"], dtype=np.int64),
                   np.array(d["threshold"], dtype=np.float64),
                   np.array(d["left"], dtype=np.int64),
                   np.array(d["right"], dtype=np.int64),
                   np.array(d["value"], dtype=np.float64))
