"""Why a tree of logistic models can beat a single one.

Two clusters sit left and right of the origin.  Inside each cluster the
class is decided by the second feature, but with opposite signs.  One
logistic model cannot draw that boundary; a 2-layer ensemble can.  The root
splits the plane along one feature and each leaf draws its own line inside
its half, so together they carve out the checkerboard.

    python demos/two_clusters.py
"""
import numpy as np

from logistic_ensemble import Dataset, TrainConfig, batch_activations, predict_proba, train


def make_clusters(rng, per_quadrant=60):
    pts, labels = [], []
    for cx in (-3.0, 3.0):
        for sy in (-1.0, 1.0):
            x0 = cx + 0.4 * rng.standard_normal(per_quadrant)
            x1 = sy * (1.0 + np.abs(rng.standard_normal(per_quadrant)))
            pts.append(np.column_stack([x0, x1]))
            labels.append(np.full(per_quadrant, int((sy > 0) == (cx < 0))))
    X = np.vstack(pts)
    return Dataset((X - X.mean(0)) / X.std(0), np.concatenate(labels))


def main():
    ds = make_clusters(np.random.default_rng(3))
    cfg = TrainConfig(learning_rate=0.01, iterations=3000, seed=0)

    print("layers  final cost  train accuracy")
    models = {}
    for n in (1, 2, 3):
        result = train(ds, cfg, n)
        models[n] = result.model
        acc = np.mean((predict_proba(result.model, ds.features) >= 0.5) == ds.labels)
        print(f"{n:>6}  {result.final_cost:>10.3f}  {acc:>14.3f}")

    # the root of the 2-layer tree routes each point to one of two leaves
    W = models[2].weights
    h1 = batch_activations(models[2], ds.features)[:, 0]
    print("\nweights [bias, x0, x1] of the 2-layer tree:")
    for j, role in ((1, "root"), (2, "left leaf"), (3, "right leaf")):
        print(f"  node {j} ({role:<10}): {np.round(W[j - 1], 2)}")
    print("\nmean root activation h_1 (chance of taking the left leaf) by quadrant:")
    for name, mask in (("x0<0, x1<0", (ds.features[:, 0] < 0) & (ds.features[:, 1] < 0)),
                       ("x0<0, x1>0", (ds.features[:, 0] < 0) & (ds.features[:, 1] > 0)),
                       ("x0>0, x1<0", (ds.features[:, 0] > 0) & (ds.features[:, 1] < 0)),
                       ("x0>0, x1>0", (ds.features[:, 0] > 0) & (ds.features[:, 1] > 0))):
        print(f"  {name}: {h1[mask].mean():.3f}")

if __name__ == "__main__":
    main()
