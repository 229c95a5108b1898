"""Batch classification shared by the HTTP server and the offline CLI."""

from __future__ import annotations

import json
from typing import Sequence

import numpy as np

from ..errors import MalformedRow
from ..learn.svm import decision_values
from ..telemetry import FIELDS, DriveLog, SensorSample, validate_samples
from ..windows import apply_scaler, feature_matrix, make_windows
from .bundle import ModelBundle


def _as_array(samples) -> np.ndarray:
    if isinstance(samples, DriveLog):
        return samples.data
    if isinstance(samples, np.ndarray):
        return np.asarray(samples, dtype=np.float64).reshape(-1, len(FIELDS))
    rows = [s.as_row() if isinstance(s, SensorSample) else s for s in samples]
    return np.array(rows, dtype=np.float64).reshape(-1, len(FIELDS))


def _intervals(bundle: ModelBundle, log: DriveLog, size: int, model, threshold, labels):
    if len(log) < size:
        return [], len(log)
    windows = make_windows(log, size)
    X = apply_scaler(bundle.scaler, feature_matrix(windows))
    scores = decision_values(model, X)
    out = [
        {
            "start_t": w.start_t,
            "end_t": w.end_t,
            "label": labels[int(s >= threshold)],
            "score": float(s),
        }
        for w, s in zip(windows, scores)
    ]
    return out, len(log) - len(windows) * size


def classify_batch(bundle: ModelBundle, samples: DriveLog | np.ndarray | Sequence[SensorSample]) -> dict:
    """Classify road condition and potholes over one batch of samples.

    Each task cuts its own windows from the start of the batch; trailing
    samples that do not fill a window are dropped.  ``dropped_samples``
    counts the trailing samples left out by at least one task.
    """
    data = _as_array(samples)
    validate_samples(data, base=0, unit="sample")
    log = samples if isinstance(samples, DriveLog) else DriveLog(data)
    road, road_drop = _intervals(
        bundle, log, bundle.road_window, bundle.road_model, 0.0, ("good", "bad")
    )
    potholes, pothole_drop = _intervals(
        bundle, log, bundle.pothole_window, bundle.pothole_model,
        bundle.pothole_model.threshold, ("none", "pothole"),
    )
    return {"road": road, "potholes": potholes, "dropped_samples": max(road_drop, pothole_drop)}


def encode_response(response: dict) -> str:
    return json.dumps(response, allow_nan=False, separators=(",", ":"))


def samples_from_json(items) -> np.ndarray:
    """Decode the ``samples`` array of a classify request.

    Structural problems raise :class:`MalformedRow` with the sample index.
    """
    if not isinstance(items, list):
        raise MalformedRow("'samples' must be an array")
    data = np.empty((len(items), len(FIELDS)), dtype=np.float64)
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            raise MalformedRow(f"sample {i}: expected an object", i)
        for k, name in enumerate(FIELDS):
            v = item.get(name)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise MalformedRow(f"sample {i}: field {name!r} missing or not a number", i)
            try:
                data[i, k] = float(v)
            except OverflowError:
                raise MalformedRow(f"sample {i}: field {name!r} out of float range", i) from None
    return data


def samples_to_json(data: np.ndarray) -> list[dict]:
    return [{name: float(v) for name, v in zip(FIELDS, row)} for row in data]

