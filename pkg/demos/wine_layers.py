"""Red-wine quality with 1 to 4 layers.

Runs the full pipeline on the bundled red-wine table with 10 of its 11
feature columns (total sulfur dioxide is left out): label "good" wines
(quality >= 6), append one Gaussian-noised copy of every row, standardize,
split 80:20, then train one ensemble per depth and report test metrics.

    python demos/wine_layers.py              # 5000 iterations, about a minute
    python demos/wine_layers.py --iters 500  # quick look
"""
import argparse

from logistic_ensemble import TrainConfig, bundled_path, evaluate_scores, predict_proba, prepare, train
from logistic_ensemble.data import WINE_EXCLUDED


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--iters", type=int, default=5000)
    parser.add_argument("--lr", type=float, default=0.001)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    prep = prepare(bundled_path(), "quality", 6, augment_seed=args.seed, split_seed=args.seed,
                   exclude=WINE_EXCLUDED)
    print(f"train rows {len(prep.train)}, test rows {len(prep.test)}, features {prep.train.dim}\n")

    cfg = TrainConfig(learning_rate=args.lr, iterations=args.iters, seed=args.seed)
    print("layers  cost/sample  train acc  test acc  test AUC  recall  precision")
    for n in (1, 2, 3, 4):
        result = train(prep.train, cfg, n)
        train_rep, _ = evaluate_scores(predict_proba(result.model, prep.train.features), prep.train.labels)
        test_rep, _ = evaluate_scores(predict_proba(result.model, prep.test.features), prep.test.labels)
        print(f"{n:>6}  {result.final_cost / len(prep.train):>11.4f}  {train_rep.accuracy:>9.4f}  "
              f"{test_rep.accuracy:>8.4f}  {test_rep.auc:>8.4f}  {test_rep.recall:>6.4f}  {test_rep.precision:>9.4f}")


if __name__ == "__main__":
    main()
