"""CSV ingestion, label encoding, Gaussian augmentation, standardization, splitting.

The intended order is encode -> augment (raw features) -> standardize (fit
on the augmented union) -> split.  Augmenting raw features matters: once a
column is standardized its mean is 0 and a noise shift proportional to the
mean vanishes.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Malformed or unusable input data."""


WINE_RED = "winequality-red.csv"
# default run drops this column, leaving the 10 physicochemical features
WINE_EXCLUDED = ("total sulfur dioxide",)


def bundled_path(name: str = WINE_RED) -> Path:
    """Location of a CSV shipped with the package (the UCI red-wine file)."""
    return Path(str(resources.files("logistic_ensemble") / "data" / name))


@dataclass(frozen=True)
class RawTable:
    feature_names: list[str]
    features: np.ndarray
    target_name: str
    target: np.ndarray
    delimiter: str = ","

    def __len__(self) -> int:
        return len(self.target)


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels)
        if X.ndim != 2 or len(X) == 0:
            raise DataError(f"features must be a non-empty 2-D matrix, got shape {X.shape}")
        if y.shape != (len(X),):
            raise DataError(f"labels shape {y.shape} does not match {len(X)} rows")
        if not np.all(np.isfinite(X)):
            raise DataError("features contain non-finite values")
        if not np.all((y == 0) | (y == 1)):
            raise DataError("labels must be 0 or 1")
        names = tuple(self.feature_names) or tuple(f"x{i}" for i in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise DataError(f"{len(names)} feature names for {X.shape[1]} columns")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y.astype(np.int64))
        object.__setattr__(self, "feature_names", names)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def subset(self, idx) -> Dataset:
        return Dataset(self.features[idx], self.labels[idx], self.feature_names)


@dataclass(frozen=True)
class StandardizationParams:
    means: np.ndarray
    stds: np.ndarray

    def apply(self, features) -> np.ndarray:
        X = np.asarray(features, dtype=float)
        if X.shape[-1] != len(self.means):
            raise DataError(f"expected {len(self.means)} columns, got {X.shape[-1]}")
        return (X - self.means) / self.stds

    def to_dict(self) -> dict:
        return {"means": self.means.tolist(), "stds": self.stds.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> StandardizationParams:
        return cls(np.array(doc["means"], dtype=float), np.array(doc["stds"], dtype=float))


def _sniff_delimiter(header: str) -> str:
    return ";" if header.count(";") > header.count(",") else ","


def load_csv(path, target_column: str, exclude: tuple[str, ...] = ()) -> RawTable:
    """Read a numeric CSV with a header row; comma or semicolon separated.

    ``exclude`` drops feature columns by name.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    text = path.read_text()
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise DataError(f"{path} is empty")
    delim = _sniff_delimiter(lines[0])
    rows = list(csv.reader(lines, delimiter=delim))
    header = [h.strip() for h in rows[0]]
    if target_column not in header:
        raise DataError(f"target column {target_column!r} not found; available columns: {', '.join(header)}")
    missing = [c for c in exclude if c not in header]
    if missing:
        raise DataError(f"cannot exclude unknown columns {missing}; available columns: {', '.join(header)}")
    body = [r for r in rows[1:] if any(cell.strip() for cell in r)]
    if not body:
        raise DataError(f"{path} has a header but no data rows")

    values = np.empty((len(body), len(header)))
    for r, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(f"line {r}: expected {len(header)} cells, found {len(row)}")
        for c, cell in enumerate(row):
            try:
                values[r - 2, c] = float(cell)
            except ValueError:
                raise DataError(f"line {r}, column {header[c]!r}: non-numeric value {cell!r}") from None
    if not np.all(np.isfinite(values)):
        raise DataError(f"{path} contains non-finite values")

    t = header.index(target_column)
    keep = [i for i, h in enumerate(header) if i != t and h not in exclude]
    return RawTable(
        feature_names=[header[i] for i in keep],
        features=values[:, keep],
        target_name=target_column,
        target=values[:, t],
        delimiter=delim,
    )


def write_csv(path, table: RawTable) -> None:
    """Write ``table`` back with its original header layout (target last).

    Floats use ``repr`` so a reload reproduces every value exactly.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=table.delimiter, lineterminator="\n")
        w.writerow(list(table.feature_names) + [table.target_name])
        for row, t in zip(table.features, table.target):
            w.writerow([repr(float(v)) for v in row] + [_fmt_target(t)])


def _fmt_target(t: float) -> str:
    return str(int(t)) if float(t).is_integer() else repr(float(t))


def encode_labels(quality, threshold: float) -> np.ndarray:
    """Binary label: 1 iff ``quality >= threshold``."""
    q = np.asarray(quality, dtype=float)
    labels = (q >= threshold).astype(np.int64)
    if labels.min() == labels.max():
        raise DataError(
            f"threshold {threshold} puts every row in class {labels[0]} "
            f"(observed range {q.min():g}..{q.max():g}); choose a threshold inside the range"
        )
    return labels


def standardize(features) -> tuple[np.ndarray, StandardizationParams]:
    """Zero-mean, unit-variance columns using the population (1/K) std."""
    X = np.asarray(features, dtype=float)
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    flat = np.flatnonzero(stds == 0)
    if flat.size:
        raise DataError(f"zero-variance column(s) at index {flat.tolist()} cannot be standardized")
    params = StandardizationParams(means, stds)
    return params.apply(X), params


def augment_gaussian(features, labels, fraction: float = 0.1, seed: int = 0, shift: bool = True):
    """Append one noisy copy of every row.

    Column ``f`` of a copy gets noise drawn from
    ``Normal(fraction * mean_f, (fraction * std_f)**2)`` where the column
    statistics come from the input (population std).  With ``shift=False``
    the noise is zero-mean.  Labels are copied.  Returns ``(features,
    labels)`` with the originals first, then the copies in the same order.

    Draws use ``numpy.random.Generator(PCG64(seed))``.
    """
    if not fraction > 0:
        raise DataError(f"augmentation fraction must be positive, got {fraction}")
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    if len(X) != len(y):
        raise DataError(f"{len(X)} rows but {len(y)} labels")
    rng = np.random.Generator(np.random.PCG64(seed))
    mu = X.mean(axis=0)
    sigma = X.std(axis=0)
    loc = fraction * mu if shift else np.zeros_like(mu)
    noise = loc + fraction * sigma * rng.standard_normal(X.shape)
    return np.vstack([X, X + noise]), np.concatenate([y, y])


def split_indices(K: int, train_ratio: float = 0.8, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Seeded shuffle of ``range(K)`` cut after ``floor(train_ratio * K)`` rows.

    Both index arrays are returned sorted.
    """
    n_train = int(np.floor(train_ratio * K))
    if n_train < 1 or n_train >= K:
        raise DataError(f"train ratio {train_ratio} on {K} rows leaves one side empty")
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(K)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def split(dataset: Dataset, train_ratio: float = 0.8, seed: int = 0) -> tuple[Dataset, Dataset]:
    tr, te = split_indices(len(dataset), train_ratio, seed)
    return dataset.subset(tr), dataset.subset(te)


def class_balance_report(labels) -> dict:
    y = np.asarray(labels)
    total = len(y)
    counts = {int(c): int(np.sum(y == c)) for c in (0, 1)}
    return {
        "counts": counts,
        "proportions": {c: (n / total if total else 0.0) for c, n in counts.items()},
        "total": total,
    }


# prepared-run artifacts ------------------------------------------------


@dataclass(frozen=True)
class PreparedData:
    train: Dataset
    test: Dataset
    params: StandardizationParams
    train_idx: np.ndarray
    test_idx: np.ndarray
    augmented: RawTable


def prepare(
    path,
    target_column: str,
    threshold: float,
    fraction: float = 0.1,
    augment_seed: int = 0,
    split_seed: int = 0,
    train_ratio: float = 0.8,
    exclude: tuple[str, ...] = (),
    shift: bool = True,
    standardize_first: bool = False,
) -> PreparedData:
    """Run the whole pipeline on a CSV file.

    ``standardize_first=True`` swaps the order so the noise is computed on
    standardized columns (the shift then has no effect).
    """
    raw = load_csv(path, target_column, exclude)
    encode_labels(raw.target, threshold)
    X = raw.features
    if standardize_first:
        X, _ = standardize(X)
    Xa, qa = augment_gaussian(X, raw.target, fraction, augment_seed, shift)
    augmented = RawTable(raw.feature_names, Xa, raw.target_name, qa, raw.delimiter)
    return _finish(augmented, threshold, train_ratio, split_seed)


def _finish(augmented: RawTable, threshold, train_ratio, split_seed, params=None, idx=None) -> PreparedData:
    labels = encode_labels(augmented.target, threshold)
    if params is None:
        Z, params = standardize(augmented.features)
    else:
        Z = params.apply(augmented.features)
    full = Dataset(Z, labels, tuple(augmented.feature_names))
    tr, te = idx if idx is not None else split_indices(len(full), train_ratio, split_seed)
    train, test = full.subset(tr), full.subset(te)
    return PreparedData(train, test, params, tr, te, augmented)


def save_prepared(prep: PreparedData, out_dir, threshold: float) -> dict:
    """Write the augmented CSV, split indices, scaling params and balance report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "augmented.csv", prep.augmented)
    (out / "split.json").write_text(
        json.dumps({"train": prep.train_idx.tolist(), "test": prep.test_idx.tolist()}) + "\n"
    )
    (out / "standardization.json").write_text(
        json.dumps({"feature_names": list(prep.train.feature_names), **prep.params.to_dict()}, indent=1) + "\n"
    )
    labels = np.concatenate([prep.train.labels, prep.test.labels])
    report = {
        "augmented_rows": len(prep.augmented),
        "train_rows": len(prep.train),
        "test_rows": len(prep.test),
        "feature_dim": prep.train.dim,
        "threshold": threshold,
        "balance": {
            "all": class_balance_report(labels),
            "train": class_balance_report(prep.train.labels),
            "test": class_balance_report(prep.test.labels),
        },
    }
    (out / "balance.json").write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
    return report


def load_prepared(out_dir, target_column: str, threshold: float) -> PreparedData:
    """Rebuild the train/test datasets from files written by :func:`save_prepared`."""
    out = Path(out_dir)
    for name in ("augmented.csv", "split.json", "standardization.json"):
        if not (out / name).is_file():
            raise DataError(f"{out / name} missing; run the prepare step first")
    augmented = load_csv(out / "augmented.csv", target_column)
    params = StandardizationParams.from_dict(json.loads((out / "standardization.json").read_text()))
    idx = json.loads((out / "split.json").read_text())
    return _finish(
        augmented, threshold, None, None, params=params,
        idx=(np.array(idx["train"], dtype=np.int64), np.array(idx["test"], dtype=np.int64)),
    )
