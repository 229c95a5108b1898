"""Fixed-count intervals over a drive log and their 26 aggregate features."""

from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import InvalidConfig, LogTooShort, MalformedRow, TooFewSamples
from .telemetry import AX, AY, AZ, GX, GY, GZ, LAT, LON, SPEED, T, DriveLog, PotholeEvents, SensorSample

ROAD_WINDOW = 25
POTHOLE_WINDOW = 10

_AXES = ("ax", "ay", "az", "gx", "gy", "gz")
FEATURE_NAMES = (
    *(f"mean_{a}" for a in _AXES),
    "mean_speed",
    *(f"std_{a}" for a in _AXES),
    "std_speed",
    *(f"max_{a}" for a in _AXES),
    *(f"min_{a}" for a in _AXES),
)
N_FEATURES = len(FEATURE_NAMES)
assert N_FEATURES == 26

_MOTION = [AX, AY, AZ, GX, GY, GZ]
_MEAN_STD_COLS = _MOTION + [SPEED]


@dataclass(frozen=True, eq=False)
class Window:
    start_t: float
    end_t: float
    sample_count: int
    features: np.ndarray
    centroid_lat: float
    centroid_lon: float
    first_lat: float
    first_lon: float
    last_lat: float
    last_lon: float
    label: int | None = None


@dataclass(frozen=True)
class Scaler:
    means: np.ndarray
    stds: np.ndarray

    def to_dict(self) -> dict:
        return {"means": [float(v) for v in self.means], "stds": [float(v) for v in self.stds]}

    @classmethod
    def from_dict(cls, d: dict) -> "Scaler":
        means = np.asarray(d["means"], dtype=np.float64)
        stds = np.asarray(d["stds"], dtype=np.float64)
        if means.shape != (N_FEATURES,) or stds.shape != (N_FEATURES,) or (stds < 0).any():
            raise ValueError("scaler needs 26 means and 26 non-negative stds")
        return cls(means, stds)


def _aggregate(runs: np.ndarray) -> np.ndarray:
    """Features for a stack of runs shaped ``(k, size, 10)`` -> ``(k, 26)``."""
    motion = runs[:, :, _MOTION]
    both = runs[:, :, _MEAN_STD_COLS]
    return np.concatenate(
        [both.mean(axis=1), both.std(axis=1), motion.max(axis=1), motion.min(axis=1)],
        axis=1,
    )


def extract_features(samples: Sequence[SensorSample] | np.ndarray) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        data = np.asarray(samples, dtype=np.float64)
    else:
        data = np.array([s.as_row() for s in samples], dtype=np.float64).reshape(-1, 10)
    if data.shape[0] < 2:
        raise TooFewSamples(f"need at least 2 samples, got {data.shape[0]}")
    return _aggregate(data[None])[0]


def make_windows(log: DriveLog, size: int) -> list[Window]:
    if size < 2:
        raise InvalidConfig(f"window size must be >= 2, got {size}")
    n = len(log)
    if n < size:
        raise LogTooShort(f"log has {n} samples, window needs {size}")
    k = n // size
    data = log.data
    runs = data[: k * size].reshape(k, size, data.shape[1])
    feats = _aggregate(runs)
    centroids = runs[:, :, [LAT, LON]].mean(axis=1)

    t = data[:, T]
    gap = float(np.median(np.diff(t)))
    out = []
    for w in range(k):
        first, last = w * size, (w + 1) * size - 1
        if last + 1 < n and t[last + 1] - t[last] <= 1.5 * gap:
            end = float(t[last + 1])
        else:
            end = float(t[last]) + gap
        f = feats[w]
        f.setflags(write=False)
        out.append(
            Window(
                start_t=float(t[first]),
                end_t=end,
                sample_count=size,
                features=f,
                centroid_lat=float(centroids[w, 0]),
                centroid_lon=float(centroids[w, 1]),
                first_lat=float(data[first, LAT]),
                first_lon=float(data[first, LON]),
                last_lat=float(data[last, LAT]),
                last_lon=float(data[last, LON]),
                label=log.condition_label,
            )
        )
    return out


def feature_matrix(windows: Sequence[Window]) -> np.ndarray:
    if not windows:
        return np.zeros((0, N_FEATURES))
    return np.vstack([w.features for w in windows])


def window_labels(windows: Sequence[Window]) -> np.ndarray:
    if any(w.label is None for w in windows):
        raise InvalidConfig("some windows are unlabeled")
    return np.array([w.label for w in windows], dtype=np.int64)


def attach_condition_label(windows: Sequence[Window], label: int) -> list[Window]:
    if label not in (0, 1):
        raise InvalidConfig(f"label must be 0 or 1, got {label!r}")
    return [replace(w, label=label) for w in windows]


def attach_pothole_labels(windows: Sequence[Window], events: PotholeEvents) -> tuple[list[Window], int]:
    """Label windows containing an event in ``[start_t, end_t)``.

    Returns the relabeled windows and the number of events that fell outside
    every window.
    """
    starts = [w.start_t for w in windows]
    hit = [0] * len(windows)
    unmatched = 0
    for e in events.timestamps:
        i = bisect.bisect_right(starts, e) - 1
        if i >= 0 and e < windows[i].end_t:
            hit[i] = 1
        else:
            unmatched += 1
    return [replace(w, label=h) for w, h in zip(windows, hit)], unmatched


def attach_regime_labels(windows: Sequence[Window], regimes: np.ndarray) -> list[Window]:
    """Label windows cut by :func:`make_windows` from per-sample regimes (majority; ties -> bad)."""
    regimes = np.asarray(regimes)
    out = []
    for i, w in enumerate(windows):
        chunk = regimes[i * w.sample_count : (i + 1) * w.sample_count]
        if len(chunk) != w.sample_count:
            raise InvalidConfig("regime array shorter than the windowed log")
        out.append(replace(w, label=int(2 * chunk.sum() >= len(chunk))))
    return out


def _as_matrix(data) -> np.ndarray:
    if isinstance(data, np.ndarray):
        return np.atleast_2d(np.asarray(data, dtype=np.float64))
    return feature_matrix(data)


def fit_scaler(training) -> Scaler:
    """Per-feature mean and population std of windows or a feature matrix."""
    X = _as_matrix(training)
    if X.shape[0] < 2:
        raise TooFewSamples(f"need at least 2 windows to fit a scaler, got {X.shape[0]}")
    return Scaler(X.mean(axis=0), X.std(axis=0))


def apply_scaler(scaler: Scaler, features: np.ndarray) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    safe = np.where(scaler.stds > 0, scaler.stds, 1.0)
    return np.where(scaler.stds > 0, (x - scaler.means) / safe, 0.0)


@dataclass(frozen=True, eq=False)
class FeatureTable:
    """Feature matrix as exchanged through CSV files."""

    X: np.ndarray
    labels: np.ndarray | None
    start_t: np.ndarray
    end_t: np.ndarray
    lat: np.ndarray
    lon: np.ndarray

    def __len__(self) -> int:
        return self.X.shape[0]

    @classmethod
    def from_windows(cls, windows: Sequence[Window]) -> "FeatureTable":
        labels = None
        if windows and all(w.label is not None for w in windows):
            labels = window_labels(windows)
        return cls(
            feature_matrix(windows),
            labels,
            np.array([w.start_t for w in windows]),
            np.array([w.end_t for w in windows]),
            np.array([w.centroid_lat for w in windows]),
            np.array([w.centroid_lon for w in windows]),
        )


CSV_COLUMNS = (*FEATURE_NAMES, "label", "start_t", "end_t", "lat", "lon")


def format_feature_csv(windows: Sequence[Window]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for w in windows:
        label = "" if w.label is None else str(w.label)
        cells = [repr(float(v)) for v in w.features]
        cells += [label, repr(w.start_t), repr(w.end_t), repr(w.centroid_lat), repr(w.centroid_lon)]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def parse_feature_csv(text: str) -> FeatureTable:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(c.strip() for c in rows[0]) != CSV_COLUMNS:
        raise MalformedRow("feature CSV header does not match the canonical columns", 1)
    X, labels, meta = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(CSV_COLUMNS):
            raise MalformedRow(f"line {lineno}: expected {len(CSV_COLUMNS)} fields, got {len(row)}", lineno)
        try:
            X.append([float(v) for v in row[:N_FEATURES]])
            lab = row[N_FEATURES].strip()
            labels.append(None if lab == "" else int(lab))
            meta.append([float(v) for v in row[N_FEATURES + 1 :]])
        except ValueError:
            raise MalformedRow(f"line {lineno}: non-numeric field", lineno) from None
        if labels[-1] not in (None, 0, 1) or not all(math.isfinite(v) for v in X[-1]):
            raise MalformedRow(f"line {lineno}: bad label or non-finite feature", lineno)
    meta_arr = np.array(meta, dtype=np.float64).reshape(-1, 4)
    y = None
    if labels and all(v is not None for v in labels):
        y = np.array(labels, dtype=np.int64)
    return FeatureTable(
        np.array(X, dtype=np.float64).reshape(-1, N_FEATURES),
        y,
        meta_arr[:, 0],
        meta_arr[:, 1],
        meta_arr[:, 2],
        meta_arr[:, 3],
    )
