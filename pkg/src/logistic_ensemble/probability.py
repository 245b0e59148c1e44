"""Label probabilities of the ensemble.

Two independent routes are provided.  :func:`label_probability` folds the
tree bottom-up: a leaf contributes ``h^y (1-h)^(1-y)`` and an interior node
mixes its subtrees as ``h_j * (L - R) + R``.  :func:`mixture_oracle` instead
enumerates every root-to-leaf route and sums route-weight times leaf term.
The vectorized ``batch_*`` helpers evaluate the first route for a whole
``(K, d)`` matrix at once and are what training uses.
"""
from __future__ import annotations

import itertools

import numpy as np

from .model import (
    ActivationCache,
    EnsembleModel,
    InvalidArgumentError,
    all_activations,
    batch_activations,
    n_nodes,
)


def _check_label(y) -> int:
    if y not in (0, 1):
        raise InvalidArgumentError(f"label must be 0 or 1, got {y!r}")
    return int(y)


def _check_node(j: int, n_layers: int) -> None:
    if not 1 <= j <= n_nodes(n_layers):
        raise InvalidArgumentError(f"node index {j} outside 1..{n_nodes(n_layers)}")


def leaf_term(h_j: float, y: int) -> float:
    """Probability a leaf with activation ``h_j`` assigns to label ``y``."""
    y = _check_label(y)
    return h_j if y == 1 else 1.0 - h_j


def subtree_label_probability(cache: ActivationCache, y: int, n_layers: int, j: int) -> float:
    """Label probability of the subtree rooted at node ``j``.

    Leaves give ``leaf_term(h_j, y)``; interior nodes give
    ``h_j * (S_2j - S_2j+1) + S_2j+1``.  At the root this is the full
    ensemble probability.
    """
    y = _check_label(y)
    _check_node(j, n_layers)
    if len(cache.h) != n_nodes(n_layers):
        raise InvalidArgumentError(f"cache has {len(cache.h)} nodes, depth {n_layers} needs {n_nodes(n_layers)}")

    h = cache.h

    def rec(k: int) -> float:
        if 2 * k > len(h):
            return leaf_term(float(h[k - 1]), y)
        left, right = rec(2 * k), rec(2 * k + 1)
        return float(h[k - 1]) * (left - right) + right

    return rec(j)


def label_probability(model: EnsembleModel, x, y: int) -> float:
    """P(y | x) of an ``n``-layer ensemble, by recursive expansion from the root."""
    cache = all_activations(model, x)
    return subtree_label_probability(cache, y, model.n_layers, 1)


def class1_probability(model: EnsembleModel, x) -> float:
    return label_probability(model, x, 1)


def path_probability(cache: ActivationCache, n_layers: int, j: int) -> float:
    """Product of routing probabilities from the root down to node ``j``.

    Going to an even child ``2k`` multiplies by ``h_k``, to an odd child
    ``2k + 1`` by ``1 - h_k``.  The root has path probability 1.
    """
    _check_node(j, n_layers)
    prob = 1.0
    k = j
    while k > 1:
        up = k // 2
        h_up = float(cache.h[up - 1])
        prob *= h_up if k % 2 == 0 else 1.0 - h_up
        k = up
    return prob


def mixture_oracle(model: EnsembleModel, x, y: int) -> float:
    """P(y | x) by brute-force enumeration of all ``2**(n-1)`` routes.

    Each route is a tuple of left/right turns; its weight is built up
    turn by turn while walking down from the root.  Shares nothing with
    the recursive fold except the per-node activations.
    """
    y = _check_label(y)
    cache = all_activations(model, x)
    h = cache.h
    total = 0.0
    for turns in itertools.product((0, 1), repeat=model.n_layers - 1):
        node, weight = 1, 1.0
        for go_right in turns:
            hk = float(h[node - 1])
            weight *= (1.0 - hk) if go_right else hk
            node = 2 * node + go_right
        hl = float(h[node - 1])
        total += weight * (hl if y == 1 else 1.0 - hl)
    return total


# vectorized forms ------------------------------------------------------


def _check_labels(y) -> np.ndarray:
    y = np.asarray(y)
    if not np.all((y == 0) | (y == 1)):
        raise InvalidArgumentError("labels must be 0 or 1")
    return y.astype(float)


def batch_subtree_probabilities(H: np.ndarray, y) -> np.ndarray:
    """Subtree label probabilities for every node and sample, shape ``(K, N)``."""
    y = _check_labels(y)
    K, N = H.shape
    leaf0 = (N + 1) // 2
    S = np.empty_like(H)
    S[:, leaf0 - 1 :] = np.where(y[:, None] == 1.0, H[:, leaf0 - 1 :], 1.0 - H[:, leaf0 - 1 :])
    for j in range(leaf0 - 1, 0, -1):
        left, right = S[:, 2 * j - 1], S[:, 2 * j]
        S[:, j - 1] = H[:, j - 1] * (left - right) + right
    return S


def batch_path_probabilities(H: np.ndarray) -> np.ndarray:
    """Root-to-node routing probabilities for every node and sample."""
    A = np.empty_like(H)
    A[:, 0] = 1.0
    for j in range(2, H.shape[1] + 1):
        up = A[:, j // 2 - 1]
        hp = H[:, j // 2 - 1]
        A[:, j - 1] = up * (hp if j % 2 == 0 else 1.0 - hp)
    return A


def batch_label_probability(model: EnsembleModel, X, y) -> np.ndarray:
    H = batch_activations(model, X)
    return batch_subtree_probabilities(H, y)[:, 0]


def predict_proba(model: EnsembleModel, X) -> np.ndarray:
    """Class-1 probability for each row of ``X``."""
    X = np.atleast_2d(model.check_input(X))
    return batch_label_probability(model, X, np.ones(len(X)))


__all__ = [
    "leaf_term",
    "subtree_label_probability",
    "label_probability",
    "class1_probability",
    "path_probability",
    "mixture_oracle",
    "batch_subtree_probabilities",
    "batch_path_probabilities",
    "batch_label_probability",
    "predict_proba",
]
