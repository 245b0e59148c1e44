"""Seeded initialization and full-batch gradient descent."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .gradient import cost_and_gradient
from .model import EnsembleModel, InvalidArgumentError, n_nodes

log = logging.getLogger(__name__)


class DivergenceError(ArithmeticError):
    def __init__(self, iteration: int, detail: str):
        super().__init__(f"training diverged at iteration {iteration}: {detail}")
        self.iteration = iteration


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    iterations: int = 5000
    init_scale: float = 0.01
    seed: int = 0
    cost_record_stride: int = 1
    # stop once |cost change| < stop_tol for stop_patience consecutive steps
    early_stop: bool = False
    stop_tol: float = 1e-9
    stop_patience: int = 50

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise InvalidArgumentError(f"learning_rate must be non-negative, got {self.learning_rate}")
        if self.iterations < 1:
            raise InvalidArgumentError(f"iterations must be >= 1, got {self.iterations}")
        if not self.init_scale >= 0:
            raise InvalidArgumentError(f"init_scale must be non-negative, got {self.init_scale}")
        if self.cost_record_stride < 1:
            raise InvalidArgumentError("cost_record_stride must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise InvalidArgumentError(f"seed must fit in an unsigned 64-bit integer, got {self.seed}")


@dataclass
class TrainResult:
    model: EnsembleModel
    cost_history: list[tuple[int, float]] = field(default_factory=list)
    converged_iterations: int = 0

    @property
    def final_cost(self) -> float:
        return self.cost_history[-1][1]


def init_model(n_layers: int, feature_dim: int, seed: int = 0, init_scale: float = 0.01) -> EnsembleModel:
    """Weights i.i.d. ``Normal(0, init_scale**2)`` from ``Generator(PCG64(seed))``.

    A non-zero scale is needed for ``n_layers >= 2``: from all-zero weights
    sibling subtrees stay identical and every router gradient is zero.
    """
    if n_layers < 1 or feature_dim < 1:
        raise InvalidArgumentError(f"invalid dimensions n_layers={n_layers}, feature_dim={feature_dim}")
    rng = np.random.Generator(np.random.PCG64(seed))
    W = init_scale * rng.standard_normal((n_nodes(n_layers), feature_dim + 1))
    return EnsembleModel(n_layers, feature_dim, W)


def train(dataset, config: TrainConfig, n_layers: int, callback=None) -> TrainResult:
    """Minimize the summed negative log-likelihood by plain gradient descent.

    Each step is ``W <- W - learning_rate * batch_gradient``.  The cost at
    iteration ``t`` is the cost *before* update ``t``; the entry for
    ``t = iterations`` (or the early-stop point) is the cost of the returned
    model.  ``callback(t, model)`` runs before every update when given.
    """
    model = init_model(n_layers, dataset.dim, config.seed, config.init_scale)
    W = model.weights.copy()
    history: list[tuple[int, float]] = []
    prev = None
    quiet = 0
    t = 0
    while True:
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                c, g = cost_and_gradient(model, dataset)
        except InvalidArgumentError as exc:
            raise DivergenceError(t, str(exc)) from None
        if not np.isfinite(c) or not np.all(np.isfinite(g)):
            raise DivergenceError(t, f"non-finite cost or gradient (cost={c})")
        done = t == config.iterations
        if config.early_stop and prev is not None:
            quiet = quiet + 1 if abs(prev - c) < config.stop_tol else 0
            done = done or quiet >= config.stop_patience
        if done or t % config.cost_record_stride == 0:
            history.append((t, c))
        if done:
            break
        if callback is not None:
            callback(t, model)
        prev = c
        # overflow is caught by the finiteness check below
        with np.errstate(over="ignore", invalid="ignore"):
            W -= config.learning_rate * g
        if not np.all(np.isfinite(W)):
            raise DivergenceError(t, "weights overflowed")
        model = model.with_weights(W)
        t += 1
    log.debug("trained n=%d for %d iterations, final cost %.6g", n_layers, t, history[-1][1])
    return TrainResult(model=model, cost_history=history, converged_iterations=t)


def write_cost_history(path, history) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "cost"])
        for it, c in history:
            w.writerow([it, repr(float(c))])


def read_cost_history(path) -> list[tuple[int, float]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["iteration", "cost"]:
        raise ValueError(f"{path}: expected header 'iteration,cost'")
    return [(int(a), float(b)) for a, b in rows[1:]]
