"""Checking the analytical gradient, and what zero initialization does to it.

Part one compares the closed-form batch gradient against central finite
differences on a random 4-layer tree, node by node.

Part two starts training from all-zero weights.  Sibling subtrees are then
identical, every router's gradient is exactly zero, and the siblings stay
identical forever: the tree behaves like a single logistic model.  A tiny
random start (std 0.01) is enough to break the tie.

    python demos/checking_gradients.py
"""
import numpy as np

from logistic_ensemble import (
    Dataset,
    EnsembleModel,
    TrainConfig,
    batch_gradient,
    finite_difference_gradient,
    train,
)


def gradient_table(rng):
    n, d = 4, 6
    model = EnsembleModel(n, d, rng.standard_normal((2**n - 1, d + 1)))
    ds = Dataset(rng.standard_normal((20, d)), rng.integers(0, 2, 20))
    g = batch_gradient(model, ds)
    fd = finite_difference_gradient(model, ds)
    print("node  role    |grad|     max rel err vs finite differences")
    for j in range(1, model.size + 1):
        row, ref = g[j - 1], fd[j - 1]
        big = np.abs(row) > 1e-8
        err = np.max(np.abs(row - ref)[big] / np.abs(row)[big], initial=0.0)
        role = "leaf" if j >= 2 ** (n - 1) else "router"
        print(f"{j:>4}  {role:<6}  {np.linalg.norm(row):9.4f}  {err:.1e}")


def symmetry(rng):
    X = rng.standard_normal((80, 3))
    y = (X[:, 0] * X[:, 1] > 0).astype(int)
    ds = Dataset(X, y)
    print("\ninit scale  |w_2 - w_3| after 200 steps  root gradient norm at start")
    for scale in (0.0, 0.01):
        cfg = TrainConfig(learning_rate=0.01, iterations=200, init_scale=scale, seed=4)
        start = train(ds, TrainConfig(learning_rate=0.0, iterations=1, init_scale=scale, seed=4), 2).model
        model = train(ds, cfg, 2).model
        gap = np.linalg.norm(model.weights[1] - model.weights[2])
        root = np.linalg.norm(batch_gradient(start, ds)[0])
        print(f"{scale:>10}  {gap:>26.4g}  {root:>28.3g}")


def main():
    rng = np.random.default_rng(0)
    gradient_table(rng)
    symmetry(rng)


if __name__ == "__main__":
    main()
