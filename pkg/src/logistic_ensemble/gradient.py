"""Negative log-likelihood of the ensemble and its analytical gradient.

For one sample with observed label ``y`` and ensemble probability ``P``,
the derivative of ``-log P`` with respect to node ``j``'s weights is::

    leaf j:      -A_j * p_j * (y - h_j) * x / P
    interior j:  -A_j * h_j * (1 - h_j) * (S_2j - S_2j+1) * x / P

with ``A_j`` the root-to-``j`` routing probability, ``p_j`` the leaf term
and ``S_k`` the label probability of the subtree rooted at ``k``.  Column 0
of ``x`` is the constant 1 of the bias.  Batch quantities are sums over the
samples, not means.
"""
from __future__ import annotations

import numpy as np

from .model import (
    PROB_EPS,
    ActivationCache,
    EnsembleModel,
    InvalidArgumentError,
    all_activations,
    batch_activations,
    is_leaf,
    node_depth,
)
from .probability import (
    _check_label,
    batch_path_probabilities,
    batch_subtree_probabilities,
    leaf_term,
    path_probability,
    subtree_label_probability,
)


def _xy(dataset):
    X = np.asarray(dataset.features, dtype=float)
    y = np.asarray(dataset.labels)
    if X.ndim != 2 or len(X) == 0:
        raise InvalidArgumentError("dataset must hold at least one sample")
    if len(y) != len(X):
        raise InvalidArgumentError(f"{len(X)} feature rows but {len(y)} labels")
    return X, y


def _with_bias(x: np.ndarray) -> np.ndarray:
    return np.concatenate([[1.0], x]) if x.ndim == 1 else np.hstack([np.ones((len(x), 1)), x])


def cost(model: EnsembleModel, dataset) -> float:
    """``-sum_k log P(y_k | x_k)`` with ``P`` floored at 1e-12."""
    X, y = _xy(dataset)
    S = batch_subtree_probabilities(batch_activations(model, X), y)
    return float(-np.sum(np.log(np.maximum(S[:, 0], PROB_EPS))))


def log_likelihood(model: EnsembleModel, dataset) -> float:
    return -cost(model, dataset)


def point_gradient(model: EnsembleModel, cache: ActivationCache, x, y: int) -> np.ndarray:
    """Gradient of one sample's cost, built node by node from the cache."""
    y = _check_label(y)
    x = model.check_input(x)
    n = model.n_layers
    if len(cache.h) != model.size:
        raise InvalidArgumentError(f"cache has {len(cache.h)} nodes, model has {model.size}")
    xb = _with_bias(x)
    P = max(subtree_label_probability(cache, y, n, 1), PROB_EPS)
    grad = np.empty_like(model.weights)
    for j in range(1, model.size + 1):
        h = cache.node(j)
        reach = path_probability(cache, n, j)
        if is_leaf(j, n):
            dz = -reach * (leaf_term(h, y) / P) * (y - h)
        else:
            diff = subtree_label_probability(cache, y, n, 2 * j) - subtree_label_probability(cache, y, n, 2 * j + 1)
            dz = -reach * h * (1.0 - h) * diff / P
        grad[j - 1] = dz * xb
    return grad


def batch_cost_derivatives(model: EnsembleModel, X: np.ndarray, y) -> np.ndarray:
    """Per-sample derivative of the cost with respect to each node's ``z``, ``(K, N)``."""
    return _derivatives(model, X, y)[0]


def _derivatives(model: EnsembleModel, X: np.ndarray, y):
    H = batch_activations(model, X)
    S = batch_subtree_probabilities(H, y)
    A = batch_path_probabilities(H)
    P = np.maximum(S[:, 0], PROB_EPS)
    y = np.asarray(y, dtype=float)
    leaf0 = (model.size + 1) // 2
    D = np.empty_like(H)
    Hl = H[:, leaf0 - 1 :]
    # p_j / P first: for a single layer the ratio is exactly 1
    D[:, leaf0 - 1 :] = -A[:, leaf0 - 1 :] * (S[:, leaf0 - 1 :] / P[:, None]) * (y[:, None] - Hl)
    Hi = H[:, : leaf0 - 1]
    # S_2j - S_2j+1 for interior j = 1..leaf0-1 sits in columns 2j-1 and 2j
    gaps = S[:, 1 : 2 * leaf0 - 1 : 2] - S[:, 2 : 2 * leaf0 : 2]
    D[:, : leaf0 - 1] = -A[:, : leaf0 - 1] * Hi * (1.0 - Hi) * gaps / P[:, None]
    return D, P


def batch_gradient(model: EnsembleModel, dataset) -> np.ndarray:
    """Summed gradient over the dataset.

    The sample reduction runs in a fixed order independent of BLAS threading,
    so repeated calls are bit-identical.
    """
    return cost_and_gradient(model, dataset)[1]


def cost_and_gradient(model: EnsembleModel, dataset) -> tuple[float, np.ndarray]:
    """``(cost, batch_gradient)`` from a single forward pass."""
    X, y = _xy(dataset)
    D, P = _derivatives(model, model.check_input(X), y)
    return float(-np.sum(np.log(P))), np.einsum("kj,ki->ji", D, _with_bias(X))


def finite_difference_gradient(model: EnsembleModel, dataset, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of :func:`cost`, one perturbation pair per weight.

    The cost is re-evaluated in extended precision (``np.longdouble``) by a
    separate bottom-up fold so that round-off in ``cost(w + s) - cost(w - s)``
    stays well below the truncation error of the difference quotient.
    """
    if not step > 0:
        raise InvalidArgumentError(f"step must be positive, got {step}")
    X, y = _xy(dataset)
    model.check_input(X)
    W = model.weights.astype(np.longdouble)
    Xb = _with_bias(X).astype(np.longdouble)
    yl = np.asarray(y, dtype=np.longdouble)
    grad = np.empty(W.shape)
    for idx in np.ndindex(W.shape):
        Wp = W.copy()
        Wp[idx] += step
        Wm = W.copy()
        Wm[idx] -= step
        grad[idx] = float((_extended_cost(Wp, Xb, yl) - _extended_cost(Wm, Xb, yl)) / (2 * np.longdouble(step)))
    return grad


def _extended_cost(W, Xb, y):
    Z = Xb @ W.T
    H = 1 / (1 + np.exp(-Z))
    H = np.clip(H, PROB_EPS, 1 - PROB_EPS)
    N = W.shape[0]
    leaf0 = (N + 1) // 2
    S = [None] * (N + 1)
    for j in range(N, 0, -1):
        h = H[:, j - 1]
        if j >= leaf0:
            S[j] = y * h + (1 - y) * (1 - h)
        else:
            S[j] = h * (S[2 * j] - S[2 * j + 1]) + S[2 * j + 1]
    return -np.sum(np.log(np.maximum(S[1], PROB_EPS)))


# node-class forms -----------------------------------------------------


def _parent_of_leaf_gradient(model: EnsembleModel, x, y: int, j: int) -> np.ndarray:
    """Gradient for a parent-of-leaves node, derived from the shallower tree.

    In the ensemble one layer shorter, ``j`` is a leaf with gradient
    ``g = -A_j p_j (y - h_j) x / P_short``.  Rescaling by
    ``h_j (1 - h_j)(p_2j - p_2j+1) P_short / (p_j (y - h_j) P)`` gives the
    gradient in the full tree.
    """
    n = model.n_layers
    short = model.truncate(n - 1)
    short_cache = all_activations(short, x)
    P_short = max(subtree_label_probability(short_cache, y, n - 1, 1), PROB_EPS)
    h = short_cache.node(j)
    p_j = leaf_term(h, y)
    g_short = -path_probability(short_cache, n - 1, j) * p_j * (y - h) * _with_bias(np.asarray(x, float)) / P_short

    cache = all_activations(model, x)
    P = max(subtree_label_probability(cache, y, n, 1), PROB_EPS)
    gap = leaf_term(cache.node(2 * j), y) - leaf_term(cache.node(2 * j + 1), y)
    return g_short * h * (1.0 - h) * gap * P_short / (p_j * (y - h) * P)


def _rewrite(cache: ActivationCache, y: int, k: int, times: int) -> float:
    """``p_k`` after ``times`` applications of ``p_k -> h_k (p_2k - p_2k+1) + p_2k+1``."""
    if times == 0:
        return leaf_term(cache.node(k), y)
    left = _rewrite(cache, y, 2 * k, times - 1)
    right = _rewrite(cache, y, 2 * k + 1, times - 1)
    return cache.node(k) * (left - right) + right


def staged_gradient(model: EnsembleModel, x, y: int, j: int) -> np.ndarray:
    """Gradient row of node ``j`` built from the node-class formulas.

    Leaves use the leaf formula directly; parents of leaves use the ratio
    form relating them to the one-layer-shorter tree; deeper nodes are
    first treated as parents of leaves in a tree of ``depth(j) + 1``
    layers, then the child leaf terms are rewritten
    ``n - depth(j) - 1`` times and the result is rescaled by
    ``P_short / P``.  Used as a cross-check of :func:`point_gradient`.
    """
    y = _check_label(y)
    x = model.check_input(x)
    n = model.n_layers
    model._check_node(j)
    cache = all_activations(model, x)
    if is_leaf(j, n):
        h = cache.node(j)
        P = max(subtree_label_probability(cache, y, n, 1), PROB_EPS)
        return -path_probability(cache, n, j) * leaf_term(h, y) * (y - h) * _with_bias(x) / P
    if 2 * j >= 2 ** (n - 1):
        return _parent_of_leaf_gradient(model, x, y, j)

    m = node_depth(j) + 1
    short = model.truncate(m)
    short_cache = all_activations(short, x)
    h = short_cache.node(j)
    P_short = max(subtree_label_probability(short_cache, y, m, 1), PROB_EPS)
    times = n - m
    gap = _rewrite(cache, y, 2 * j, times) - _rewrite(cache, y, 2 * j + 1, times)
    g_rewritten = -path_probability(short_cache, m, j) * h * (1.0 - h) * gap * _with_bias(x) / P_short
    P = max(subtree_label_probability(cache, y, n, 1), PROB_EPS)
    return g_rewritten * P_short / P


__all__ = [
    "cost",
    "log_likelihood",
    "subtree_label_probability",
    "point_gradient",
    "batch_cost_derivatives",
    "batch_gradient",
    "cost_and_gradient",
    "finite_difference_gradient",
    "staged_gradient",
]
