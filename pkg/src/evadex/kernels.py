"""Hot numeric kernels with a numba-jitted fast path and a pure-Python/numpy fallback.

Both paths share one source, so results are bit-identical. The jitted path is
the default whenever numba imports; set EVADEX_DISABLE_NUMBA=1 to force the
fallback. Kernels are written with explicit loops (no numpy reductions) so
float summation order is the same under both backends.

Only genuinely loop-bound code lives here (decision-tree traversal and the
Gini split scan). Matrix-multiply-bound paths (logistic/MLP forward passes,
weighted least squares) stay in plain numpy, where BLAS already wins.
"""

import os

import numpy as np


def _disabled_by_env() -> bool:
    return os.environ.get("EVADEX_DISABLE_NUMBA", "").strip() not in ("", "0", "false", "False")


def _tree_leaf_indices(feature, threshold, left, right, X):
    """Route each row of X to its leaf; internal nodes have feature >= 0."""
    n = X.shape[0]
    out = np.empty(n, np.int64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = node
    return out


def _best_gini_split(X, y, k, min_leaf):
    """Best (feature, midpoint threshold) by weighted Gini impurity of children.

    Scans features in ascending order and thresholds in ascending value order;
    strict improvement is required, so ties resolve to the lowest feature index
    and lowest threshold. Returns (feat, thr, child_impurity, parent_impurity);
    feat == -1 means no admissible split.
    """
    n, d = X.shape
    total = np.zeros(k, np.int64)
    for i in range(n):
        total[y[i]] += 1
    parent = 1.0
    for c in range(k):
        p = total[c] / n
        parent -= p * p
    best_feat = -1
    best_thr = 0.0
    best_imp = np.inf
    for f in range(d):
        col = X[:, f].copy()
        order = np.argsort(col, kind="mergesort")
        counts = np.zeros(k, np.int64)
        for pos in range(1, n):
            counts[y[order[pos - 1]]] += 1
            lo = col[order[pos - 1]]
            hi = col[order[pos]]
            if lo == hi or pos < min_leaf or n - pos < min_leaf:
                continue
            gl = 1.0
            gr = 1.0
            for c in range(k):
                pl = counts[c] / pos
                pr = (total[c] - counts[c]) / (n - pos)
                gl -= pl * pl
                gr -= pr * pr
            imp = (pos * gl + (n - pos) * gr) / n
            if imp < best_imp:
                best_imp = imp
                best_feat = f
                best_thr = (lo + hi) / 2.0
    return best_feat, best_thr, best_imp, parent


tree_leaf_indices_py = _tree_leaf_indices
best_gini_split_py = _best_gini_split

try:
    if _disabled_by_env():
        raise ImportError("numba disabled via EVADEX_DISABLE_NUMBA")
    from numba import njit

    tree_leaf_indices_jit = njit(cache=True)(_tree_leaf_indices)
    best_gini_split_jit = njit(cache=True)(_best_gini_split)
    tree_leaf_indices = tree_leaf_indices_jit
    best_gini_split = best_gini_split_jit
    BACKEND = "numba"
except ImportError:
    tree_leaf_indices_jit = None
    best_gini_split_jit = None
    tree_leaf_indices = tree_leaf_indices_py
    best_gini_split = best_gini_split_py
    BACKEND = "numpy"


def backend_name() -> str:
    """Active kernel backend: "numba" or "numpy"."""
    return BACKEND
