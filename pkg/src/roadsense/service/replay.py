"""Replay a recorded drive against a running server, chunk by chunk."""

from __future__ import annotations

import json
import sys
import time
import urllib.error
import urllib.request
from typing import TextIO

import numpy as np

from ..errors import DataError, RoadsenseError
from ..telemetry import DriveLog
from .classify import samples_to_json

ATTEMPTS = 3


class ServiceUnavailable(RoadsenseError):
    code = "service_unavailable"


def chunk_size(log: DriveLog, chunk_seconds: float) -> int:
    """Samples per chunk, from the log's median sampling interval."""
    if len(log) < 2:
        return max(len(log), 1)
    gap = float(np.median(np.diff(log.t)))
    return max(1, int(round(chunk_seconds / gap)))


def chunks(log: DriveLog, chunk_seconds: float) -> list[np.ndarray]:
    size = chunk_size(log, chunk_seconds)
    return [log.data[i : i + size] for i in range(0, len(log), size)]


def post_json(url: str, body: dict, timeout: float = 30.0, attempts: int = ATTEMPTS, backoff: float = 0.5) -> dict:
    """POST with exponential backoff on connection failures."""
    payload = json.dumps(body, allow_nan=False).encode("utf-8")
    delay = backoff
    for attempt in range(1, attempts + 1):
        req = urllib.request.Request(url, data=payload, headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(req, timeout=timeout) as resp:
                return json.loads(resp.read().decode("utf-8"))
        except urllib.error.HTTPError as exc:
            detail = exc.read().decode("utf-8", "replace")
            raise DataError(f"server rejected chunk ({exc.code}): {detail}") from None
        except (urllib.error.URLError, ConnectionError, TimeoutError) as exc:
            if attempt == attempts:
                raise ServiceUnavailable(f"{url} unreachable after {attempts} attempts: {exc}") from None
            time.sleep(delay)
            delay *= 2
    raise AssertionError("unreachable")


def format_interval(kind: str, interval: dict) -> str:
    return (
        f"{kind:<7} {interval['start_t']!r:>18} {interval['end_t']!r:>18} "
        f"{interval['label']:<7} {interval['score']:+.6f}"
    )


def replay_client(
    log: DriveLog,
    server_url: str,
    chunk_seconds: float = 5.0,
    speed: float = 1.0,
    out: TextIO | None = None,
    backoff: float = 0.5,
) -> list[dict]:
    """Send ``log`` in ``chunk_seconds`` batches and print every returned interval.

    ``speed`` scales the pacing: 1 is real time, 10 is ten times faster and
    0 sends chunks back to back.
    """
    out = out or sys.stdout
    url = server_url.rstrip("/") + "/v1/classify"
    responses = []
    for data in chunks(log, chunk_seconds):
        started = time.monotonic()
        resp = post_json(url, {"samples": samples_to_json(data)}, backoff=backoff)
        responses.append(resp)
        for interval in resp["road"]:
            print(format_interval("road", interval), file=out)
        for interval in resp["potholes"]:
            print(format_interval("pothole", interval), file=out)
        out.flush()
        if speed > 0:
            remaining = chunk_seconds / speed - (time.monotonic() - started)
            if remaining > 0:
                time.sleep(remaining)
    return responses
