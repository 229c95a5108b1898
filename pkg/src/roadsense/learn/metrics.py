"""Confusion-matrix metrics, precision-recall curves and threshold choice."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ClassMissing, EmptyInput, InvalidConfig, LengthMismatch, NoPositives, Unattainable


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    precision: float | None
    recall: float | None
    tp: int
    fp: int
    tn: int
    fn: int
    base_rate: float

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self, seed: int | None = None, params: dict | None = None) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "base_rate": self.base_rate,
            "seed": seed,
            "params": params or {},
        }


def _labels(a, name: str) -> np.ndarray:
    arr = np.asarray(a).reshape(-1)
    if not np.isin(arr, (0, 1)).all():
        raise InvalidConfig(f"{name} must contain only 0 and 1")
    return arr.astype(np.int64)


def evaluate(labels_true, labels_pred) -> EvalReport:
    yt = _labels(labels_true, "labels_true")
    yp = _labels(labels_pred, "labels_pred")
    if yt.shape != yp.shape:
        raise LengthMismatch(f"{yt.shape[0]} true labels vs {yp.shape[0]} predictions")
    n = yt.shape[0]
    if n == 0:
        raise EmptyInput("no labels to evaluate")
    tp = int(np.sum((yt == 1) & (yp == 1)))
    fp = int(np.sum((yt == 0) & (yp == 1)))
    tn = int(np.sum((yt == 0) & (yp == 0)))
    fn = int(np.sum((yt == 1) & (yp == 0)))
    positives = tp + fn
    return EvalReport(
        accuracy=(tp + tn) / n,
        precision=tp / (tp + fp) if tp + fp else None,
        recall=tp / positives if positives else None,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        base_rate=max(positives, n - positives) / n,
    )


@dataclass(frozen=True)
class PrCurve:
    thresholds: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    points: list[tuple[float, float, float]] = field(init=False, repr=False)

    def __post_init__(self):
        pts = [(float(t), float(p), float(r)) for t, p, r in zip(self.thresholds, self.precision, self.recall)]
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def to_csv(self) -> str:
        lines = ["threshold,precision,recall"]
        lines.extend(f"{t!r},{p!r},{r!r}" for t, p, r in self.points)
        return "\n".join(lines) + "\n"


def pr_curve(scores, labels_true) -> PrCurve:
    """One point per distinct score, thresholds descending, predicting 1 when ``score >= threshold``."""
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = _labels(labels_true, "labels_true")
    if s.shape != y.shape:
        raise LengthMismatch(f"{s.shape[0]} scores vs {y.shape[0]} labels")
    total_pos = int(y.sum())
    if total_pos == 0:
        raise NoPositives("precision-recall curve needs at least one positive")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    tp = np.cumsum(y)
    predicted = np.arange(1, len(s) + 1)
    # last position of each run of tied scores
    ends = np.flatnonzero(np.append(s[1:] != s[:-1], True))
    tp, predicted = tp[ends], predicted[ends]
    return PrCurve(s[ends], tp / predicted, tp / total_pos)


def choose_threshold(curve: PrCurve, min_precision: float) -> float:
    """Max-recall threshold among points with precision >= ``min_precision``.

    Ties go to higher precision, then to the lower threshold.
    """
    if len(curve) == 0:
        raise EmptyInput("empty precision-recall curve")
    ok = [p for p in curve.points if p[1] >= min_precision]
    if not ok:
        raise Unattainable(f"no threshold reaches precision {min_precision}")
    return max(ok, key=lambda p: (p[2], p[1], -p[0]))[0]


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=np.float64))
        y = np.asarray(self.y).reshape(-1).astype(np.int64)
        if X.shape[0] != y.shape[0]:
            raise LengthMismatch(f"X has {X.shape[0]} rows but y has {y.shape[0]} labels")
        if np.isnan(X).any():
            raise InvalidConfig("feature matrix contains NaN")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.y.shape[0]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx])


def split_indices(y, test_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if not 0 < test_fraction < 1:
        raise InvalidConfig("test_fraction must lie strictly between 0 and 1")
    y = np.asarray(y).reshape(-1)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        if idx.size == 0:
            raise ClassMissing(f"class {cls} has no instances")
        idx = rng.permutation(idx)
        k = int(np.floor(test_fraction * idx.size + 0.5))
        test.append(idx[:k])
        train.append(idx[k:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def split_dataset(dataset: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Stratified train/test split, deterministic under ``seed``."""
    tr, te = split_indices(dataset.y, test_fraction, seed)
    return dataset.subset(tr), dataset.subset(te)

