"""Tree layout and per-node logistic units of a dynamic logistic ensemble.

Nodes are numbered heap-style starting at 1: node ``j`` routes to children
``2j`` (left, taken with probability ``h_j``) and ``2j + 1`` (right, taken
with probability ``1 - h_j``).  An ``n``-layer ensemble has ``2**n - 1``
nodes, the last ``2**(n-1)`` of which are leaves.  Weights live in a dense
``(2**n - 1, d + 1)`` matrix; row ``j - 1`` is node ``j``, column 0 is the
bias (implicit input 1).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PROB_EPS = 1e-12


class InvalidArgumentError(ValueError):
    """Raised for malformed inputs: non-finite values, bad indices, shapes."""


def sigmoid(z):
    """Overflow-safe logistic function clamped to ``[1e-12, 1 - 1e-12]``.

    Accepts a scalar or an array; raises on non-finite input.
    """
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("sigmoid input must be finite")
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ez = np.exp(arr[~pos])
    out[~pos] = ez / (1.0 + ez)
    np.clip(out, PROB_EPS, 1.0 - PROB_EPS, out=out)
    if out.ndim == 0:
        return float(out)
    return out


def n_nodes(n_layers: int) -> int:
    return 2**n_layers - 1


def first_leaf(n_layers: int) -> int:
    return 2 ** (n_layers - 1)


def is_leaf(j: int, n_layers: int) -> bool:
    return 2 * j >= 2**n_layers


def node_depth(j: int) -> int:
    """Layer of node ``j`` counted from 1 at the root (``floor(log2 j) + 1``)."""
    return j.bit_length()


def parent(j: int) -> int:
    return j // 2


def children(j: int) -> tuple[int, int]:
    return 2 * j, 2 * j + 1


@dataclass(frozen=True)
class ActivationCache:
    """Linear terms ``z`` and activations ``h`` of every node for one input.

    Arrays are 0-based: ``h[j - 1]`` belongs to node ``j``.
    """

    z: np.ndarray
    h: np.ndarray

    @property
    def n_layers(self) -> int:
        return int(len(self.h) + 1).bit_length() - 1

    def node(self, j: int) -> float:
        return float(self.h[j - 1])


@dataclass(frozen=True)
class EnsembleModel:
    n_layers: int
    feature_dim: int
    weights: np.ndarray

    def __post_init__(self):
        if self.n_layers < 1 or self.feature_dim < 1:
            raise InvalidArgumentError(
                f"n_layers and feature_dim must be positive, got {self.n_layers}, {self.feature_dim}"
            )
        w = np.array(self.weights, dtype=float)
        expected = (n_nodes(self.n_layers), self.feature_dim + 1)
        if w.shape != expected:
            raise InvalidArgumentError(f"weights shape {w.shape} != {expected}")
        if not np.all(np.isfinite(w)):
            raise InvalidArgumentError("weights must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def zeros(cls, n_layers: int, feature_dim: int) -> EnsembleModel:
        return cls(n_layers, feature_dim, np.zeros((n_nodes(n_layers), feature_dim + 1)))

    @property
    def size(self) -> int:
        return n_nodes(self.n_layers)

    def leaves(self) -> range:
        return range(first_leaf(self.n_layers), self.size + 1)

    def interior(self) -> range:
        return range(1, first_leaf(self.n_layers))

    def bias(self, j: int) -> float:
        self._check_node(j)
        return float(self.weights[j - 1, 0])

    def coefficients(self, j: int) -> np.ndarray:
        self._check_node(j)
        return self.weights[j - 1, 1:]

    def with_weights(self, weights: np.ndarray) -> EnsembleModel:
        return EnsembleModel(self.n_layers, self.feature_dim, weights)

    def truncate(self, n_layers: int) -> EnsembleModel:
        """The top ``n_layers`` layers as a standalone ensemble."""
        if not 1 <= n_layers <= self.n_layers:
            raise InvalidArgumentError(f"cannot truncate depth {self.n_layers} to {n_layers}")
        return EnsembleModel(n_layers, self.feature_dim, self.weights[: n_nodes(n_layers)])

    def _check_node(self, j: int) -> None:
        if not 1 <= j <= self.size:
            raise InvalidArgumentError(f"node index {j} outside 1..{self.size}")

    def check_input(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.feature_dim:
            raise InvalidArgumentError(
                f"input has {x.shape[-1]} features, model expects {self.feature_dim}"
            )
        return x

    # serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n_layers": self.n_layers,
            "feature_dim": self.feature_dim,
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> EnsembleModel:
        try:
            return cls(int(doc["n_layers"]), int(doc["feature_dim"]), np.array(doc["weights"], dtype=float))
        except KeyError as exc:
            raise InvalidArgumentError(f"model document missing key {exc}") from None

    def save(self, path) -> None:
        # json writes floats with repr(), the shortest string that round-trips exactly
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> EnsembleModel:
        return cls.from_dict(json.loads(Path(path).read_text()))


def node_activation(model: EnsembleModel, j: int, x) -> float:
    model._check_node(j)
    x = model.check_input(x)
    z = model.bias(j) + float(model.coefficients(j) @ x)
    return sigmoid(z)


def all_activations(model: EnsembleModel, x) -> ActivationCache:
    x = model.check_input(x)
    if x.ndim != 1:
        raise InvalidArgumentError("all_activations takes a single feature vector")
    z = model.weights[:, 0] + model.weights[:, 1:] @ x
    return ActivationCache(z=z, h=np.atleast_1d(sigmoid(z)))


def batch_activations(model: EnsembleModel, X) -> np.ndarray:
    """Activation matrix of shape ``(K, 2**n - 1)`` for a ``(K, d)`` batch."""
    X = model.check_input(X)
    Z = model.weights[:, 0] + np.einsum("kd,jd->kj", X, model.weights[:, 1:])
    return np.atleast_2d(sigmoid(Z))
