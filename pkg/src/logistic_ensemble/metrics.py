"""Classification metrics and ROC analysis.

AUC is computed by trapezoidal integration of the ROC curve swept over all
distinct score thresholds.  Tied scores move the curve diagonally, which is
the same as giving a tied positive/negative pair half credit, so the area
matches :func:`pairwise_auc` exactly up to rounding.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricsReport:
    """Accuracy, precision, recall and AUC.

    ``precision``/``recall`` are ``None`` when their denominator is zero;
    ``auc`` is ``None`` until filled in by :func:`roc_auc`.
    """

    accuracy: float
    precision: float | None
    recall: float | None
    confusion: Confusion
    auc: float | None = None

    def undefined(self) -> list[str]:
        return [k for k in ("precision", "recall", "auc") if getattr(self, k) is None]


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


def _binary(labels) -> np.ndarray:
    y = np.asarray(labels)
    if not np.all((y == 0) | (y == 1)):
        raise MetricError("labels must be 0 or 1")
    return y.astype(np.int64)


def classify(scores, threshold: float = 0.5) -> np.ndarray:
    """1 where ``score >= threshold``."""
    return (np.asarray(scores, dtype=float) >= threshold).astype(np.int64)


def confusion_and_rates(predictions, labels) -> MetricsReport:
    p = _binary(predictions)
    y = _binary(labels)
    if p.shape != y.shape:
        raise MetricError(f"{p.shape[0]} predictions for {y.shape[0]} labels")
    if len(y) == 0:
        raise MetricError("no points to evaluate")
    tp = int(np.sum((p == 1) & (y == 1)))
    fp = int(np.sum((p == 1) & (y == 0)))
    tn = int(np.sum((p == 0) & (y == 0)))
    fn = int(np.sum((p == 0) & (y == 1)))
    return MetricsReport(
        accuracy=(tp + tn) / len(y),
        precision=tp / (tp + fp) if tp + fp else None,
        recall=tp / (tp + fn) if tp + fn else None,
        confusion=Confusion(tp, fp, tn, fn),
    )


def roc_curve(scores, labels) -> RocCurve:
    """ROC points from the strictest threshold down to the loosest.

    The first point is ``(0, 0)`` with threshold ``+inf``; each following
    point admits every score ``>=`` its threshold, ending at ``(1, 1)``.
    """
    s = np.asarray(scores, dtype=float)
    y = _binary(labels)
    if s.shape != y.shape:
        raise MetricError(f"{s.shape[0]} scores for {y.shape[0]} labels")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricError("ROC needs both classes present")
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    # last index of each run of equal scores
    ends = np.flatnonzero(np.diff(s) != 0)
    ends = np.append(ends, len(s) - 1)
    tps = np.cumsum(y)[ends]
    fps = (ends + 1) - tps
    tpr = np.concatenate([[0.0], tps / n_pos])
    fpr = np.concatenate([[0.0], fps / n_neg])
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=np.concatenate([[np.inf], s[ends]]))


def trapezoid_area(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))


def roc_auc(scores, labels) -> tuple[RocCurve, float]:
    curve = roc_curve(scores, labels)
    return curve, trapezoid_area(curve.fpr, curve.tpr)


def pairwise_auc(scores, labels) -> float:
    """Fraction of positive/negative pairs ranked correctly, ties counting 1/2.

    Quadratic brute force; kept as the reference for :func:`roc_auc`.
    """
    s = np.asarray(scores, dtype=float)
    y = _binary(labels)
    pos, neg = s[y == 1], s[y == 0]
    if len(pos) == 0 or len(neg) == 0:
        raise MetricError("AUC needs both classes present")
    wins = 0.0
    for a in pos:
        for b in neg:
            wins += 1.0 if a > b else 0.5 if a == b else 0.0
    return wins / (len(pos) * len(neg))


def evaluate_scores(scores, labels, threshold: float = 0.5) -> tuple[MetricsReport, RocCurve]:
    rep = confusion_and_rates(classify(scores, threshold), labels)
    curve, auc = roc_auc(scores, labels)
    return MetricsReport(rep.accuracy, rep.precision, rep.recall, rep.confusion, auc), curve


def write_roc_csv(path, curve: RocCurve) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fpr", "tpr", "threshold"])
        for f, t, th in zip(curve.fpr, curve.tpr, curve.thresholds):
            w.writerow([repr(float(f)), repr(float(t)), "inf" if np.isinf(th) else repr(float(th))])


def read_roc_csv(path) -> RocCurve:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["fpr", "tpr", "threshold"]:
        raise MetricError(f"{path}: expected header 'fpr,tpr,threshold'")
    arr = np.array([[float(v) for v in r] for r in rows[1:]])
    return RocCurve(fpr=arr[:, 0], tpr=arr[:, 1], thresholds=arr[:, 2])


def write_metrics_json(path, metrics: dict) -> None:
    Path(path).write_text(json.dumps(metrics, indent=1, sort_keys=True) + "\n")


def report_dict(report: MetricsReport) -> dict:
    return asdict(report)
