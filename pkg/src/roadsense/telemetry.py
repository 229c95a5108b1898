"""Drive logs: CSV ingestion, validation and a seeded synthetic generator.

A drive log is stored column-wise as an ``(n, 10)`` float array in the
canonical field order ``t,ax,ay,az,gx,gy,gz,lat,lon,speed``; the per-sample
:class:`SensorSample` view is built on demand.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InvalidConfig,
    IrregularSampling,
    MalformedRow,
    NonMonotonicTime,
    OutOfRange,
)

FIELDS = ("t", "ax", "ay", "az", "gx", "gy", "gz", "lat", "lon", "speed")
HEADER = ",".join(FIELDS)
POTHOLE_HEADER = "t"

T, AX, AY, AZ, GX, GY, GZ, LAT, LON, SPEED = range(10)

MIN_MEDIAN_GAP = 0.1
MAX_MEDIAN_GAP = 1.0

# metres per degree of latitude (spherical earth, mean radius)
_M_PER_DEG = 111_194.9


@dataclass(frozen=True)
class SensorSample:
    t: float
    ax: float
    ay: float
    az: float
    gx: float
    gy: float
    gz: float
    lat: float
    lon: float
    speed: float

    def as_row(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in FIELDS)


@dataclass(frozen=True, eq=False)
class DriveLog:
    data: np.ndarray
    condition_label: int | None = None

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64).reshape(-1, len(FIELDS))
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        if self.condition_label not in (None, 0, 1):
            raise InvalidConfig(f"condition_label must be 0, 1 or None, got {self.condition_label!r}")

    @classmethod
    def from_samples(cls, samples: Iterable[SensorSample], condition_label: int | None = None) -> "DriveLog":
        rows = [s.as_row() for s in samples]
        return cls(np.array(rows, dtype=np.float64).reshape(-1, len(FIELDS)), condition_label)

    def __len__(self) -> int:
        return self.data.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, DriveLog):
            return NotImplemented
        return (
            self.condition_label == other.condition_label
            and self.data.shape == other.data.shape
            and bool(np.array_equal(self.data, other.data))
        )

    @property
    def samples(self) -> list[SensorSample]:
        return [SensorSample(*map(float, row)) for row in self.data]

    @property
    def t(self) -> np.ndarray:
        return self.data[:, T]


@dataclass(frozen=True)
class PotholeEvents:
    timestamps: tuple[float, ...] = ()

    def __post_init__(self):
        ts = tuple(sorted(float(x) for x in self.timestamps))
        for x in ts:
            if not math.isfinite(x):
                raise MalformedRow("pothole timestamp is not finite")
        object.__setattr__(self, "timestamps", ts)

    def __len__(self) -> int:
        return len(self.timestamps)


def validate_samples(data: np.ndarray, *, base: int = 0, unit: str = "sample") -> None:
    """Check drive-log invariants over an ``(n, 10)`` array.

    Raises the error for the earliest offending row.  ``base`` converts the
    row index into what gets reported (2 for CSV line numbers, 0 for indices).
    """
    n = data.shape[0]
    if n == 0:
        return
    candidates = []

    bad = ~np.isfinite(data).all(axis=1)
    if bad.any():
        i = int(np.argmax(bad))
        candidates.append((i, 0, MalformedRow(f"{unit} {i + base}: non-finite value", i + base)))

    with np.errstate(invalid="ignore"):
        oob = (
            (np.abs(data[:, LAT]) > 90.0)
            | (np.abs(data[:, LON]) > 180.0)
            | (data[:, SPEED] < 0.0)
        )
    if oob.any():
        i = int(np.argmax(oob))
        candidates.append((i, 1, OutOfRange(f"{unit} {i + base}: lat/lon/speed out of range", i + base)))

    if n > 1:
        with np.errstate(invalid="ignore"):
            nonmono = ~(np.diff(data[:, T]) > 0.0)
        if nonmono.any():
            i = int(np.argmax(nonmono)) + 1
            candidates.append(
                (i, 2, NonMonotonicTime(f"{unit} {i + base}: timestamp not strictly increasing", i + base))
            )

    if candidates:
        raise min(candidates, key=lambda c: (c[0], c[1]))[2]

    if n > 1:
        gap = float(np.median(np.diff(data[:, T])))
        if not MIN_MEDIAN_GAP <= gap <= MAX_MEDIAN_GAP:
            raise IrregularSampling(
                f"median sample gap {gap:.4g} s outside [{MIN_MEDIAN_GAP}, {MAX_MEDIAN_GAP}] s"
            )


def _read_rows(csv_text: str, header: Sequence[str]) -> list[tuple[int, list[str]]]:
    reader = csv.reader(io.StringIO(csv_text))
    rows = list(reader)
    if not rows:
        raise MalformedRow("missing header", 1)
    got = [c.strip() for c in rows[0]]
    if got != list(header):
        raise MalformedRow(f"expected header {','.join(header)!r}, got {','.join(got)!r}", 1)
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        out.append((lineno, row))
    return out


def _to_float(text: str, lineno: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise MalformedRow(f"line {lineno}: {text!r} is not a number", lineno) from None


def parse_drive_log(csv_text: str, condition_label: int | None = None) -> DriveLog:
    rows = _read_rows(csv_text, FIELDS)
    data = np.empty((len(rows), len(FIELDS)), dtype=np.float64)
    linenos = []
    for k, (lineno, row) in enumerate(rows):
        if len(row) != len(FIELDS):
            raise MalformedRow(f"line {lineno}: expected {len(FIELDS)} fields, got {len(row)}", lineno)
        data[k] = [_to_float(x, lineno) for x in row]
        linenos.append(lineno)

    # blank lines are skipped, so map row positions back to real line numbers
    try:
        validate_samples(data, base=0, unit="row")
    except (MalformedRow, OutOfRange, NonMonotonicTime) as exc:
        line = linenos[exc.where]
        msg = exc.message.replace(f"row {exc.where}", f"line {line}")
        raise type(exc)(msg, line) from None
    return DriveLog(data, condition_label)


def format_drive_log(log: DriveLog) -> str:
    """Serialize with shortest round-trip float formatting and LF endings."""
    lines = [HEADER]
    lines.extend(",".join(repr(float(v)) for v in row) for row in log.data)
    return "\n".join(lines) + "\n"


def parse_pothole_labels(csv_text: str) -> PotholeEvents:
    rows = _read_rows(csv_text, (POTHOLE_HEADER,))
    values = []
    for lineno, row in rows:
        if len(row) != 1:
            raise MalformedRow(f"line {lineno}: expected 1 field, got {len(row)}", lineno)
        x = _to_float(row[0], lineno)
        if not math.isfinite(x):
            raise MalformedRow(f"line {lineno}: timestamp is not finite", lineno)
        values.append(x)
    return PotholeEvents(tuple(values))


def format_pothole_labels(events: PotholeEvents) -> str:
    return "\n".join([POTHOLE_HEADER, *(repr(t) for t in events.timestamps)]) + "\n"


def format_regimes(log: DriveLog, regimes: np.ndarray) -> str:
    lines = ["t,regime"]
    lines.extend(f"{float(t)!r},{int(r)}" for t, r in zip(log.t, regimes))
    return "\n".join(lines) + "\n"


def parse_regimes(csv_text: str) -> np.ndarray:
    rows = _read_rows(csv_text, ("t", "regime"))
    out = np.empty(len(rows), dtype=np.int64)
    for k, (lineno, row) in enumerate(rows):
        if len(row) != 2 or row[1].strip() not in ("0", "1"):
            raise MalformedRow(f"line {lineno}: expected 't,regime' with regime 0 or 1", lineno)
        _to_float(row[0], lineno)
        out[k] = int(row[1])
    return out


GOOD, BAD = 0, 1
_REGIMES = {"good": GOOD, "bad": BAD}


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of a synthetic drive.

    ``segments`` is a list of ``(length_s, regime)`` pairs cycled over the
    whole duration; an empty plan means an all-good drive.
    """

    duration_s: float = 60.0
    sample_rate_hz: float = 5.0
    segments: tuple[tuple[float, str], ...] = ()
    pothole_count: int = 0
    sigma_good: float = 0.03
    sigma_bad: float = 0.20
    pothole_impulse: float = 1.0
    rng_seed: int = 0
    t0: float = 1_470_000_000.0
    start_lat: float = 40.4406
    start_lon: float = -79.9959
    heading_deg: float = 60.0
    speed_mean: float = 10.0
    speed_sigma: float = 0.5

    def __post_init__(self):
        plan = tuple((float(length), str(regime)) for length, regime in self.segments)
        object.__setattr__(self, "segments", plan)

    def validate(self) -> None:
        if not (self.duration_s > 0 and math.isfinite(self.duration_s)):
            raise InvalidConfig("duration_s must be positive")
        if not self.sample_rate_hz > 0:
            raise InvalidConfig("sample_rate_hz must be positive")
        if not self.sigma_bad > self.sigma_good > 0:
            raise InvalidConfig("need sigma_bad > sigma_good > 0")
        if self.pothole_count < 0:
            raise InvalidConfig("pothole_count must be >= 0")
        if self.pothole_impulse < 0:
            raise InvalidConfig("pothole_impulse must be >= 0")
        for length, regime in self.segments:
            if regime not in _REGIMES:
                raise InvalidConfig(f"unknown regime {regime!r}")
            if not length > 0:
                raise InvalidConfig("segment lengths must be positive")
        if not -90 <= self.start_lat <= 90 or not -180 <= self.start_lon <= 180:
            raise InvalidConfig("start position out of range")


def parse_segments(text: str) -> tuple[tuple[float, str], ...]:
    """Parse ``"120:good,30:bad"`` into a segment plan."""
    if not text.strip():
        return ()
    plan = []
    for part in text.split(","):
        try:
            length, regime = part.split(":")
            plan.append((float(length), regime.strip()))
        except ValueError:
            raise InvalidConfig(f"bad segment {part!r}; expected LENGTH:REGIME") from None
    return tuple(plan)


def sample_regimes(config: SynthConfig, n: int) -> np.ndarray:
    times = np.arange(n) / config.sample_rate_hz
    if not config.segments:
        return np.zeros(n, dtype=np.int64)
    lengths = np.array([length for length, _ in config.segments])
    codes = np.array([_REGIMES[r] for _, r in config.segments])
    bounds = np.cumsum(lengths)
    phase = np.mod(times, bounds[-1])
    return codes[np.searchsorted(bounds, phase, side="right")]


def synth_drive(config: SynthConfig) -> tuple[DriveLog, PotholeEvents, np.ndarray]:
    """Generate a synthetic drive, its pothole events and per-sample regimes."""
    config.validate()
    rate = config.sample_rate_hz
    n = int(math.floor(config.duration_s * rate))
    rng = np.random.default_rng(config.rng_seed)

    regimes = sample_regimes(config, n)
    sigma = np.where(regimes == BAD, config.sigma_bad, config.sigma_good)

    noise = rng.standard_normal((n, 6))
    acc = noise[:, :3] * sigma[:, None]
    acc[:, 2] += 1.0
    gyro = noise[:, 3:] * sigma[:, None]
    speed = np.maximum(config.speed_mean + config.speed_sigma * rng.standard_normal(n), 0.0)

    dt = 1.0 / rate
    t = config.t0 + np.arange(n) * dt
    # distance covered up to sample i uses the speeds of samples before it
    dist = np.concatenate(([0.0], np.cumsum(speed[:-1] * dt))) if n else np.zeros(0)
    heading = math.radians(config.heading_deg)
    lat = config.start_lat + dist * math.cos(heading) / _M_PER_DEG
    lon = config.start_lon + dist * math.sin(heading) / (
        _M_PER_DEG * math.cos(math.radians(config.start_lat))
    )

    events = []
    span = max(config.duration_s - 2.0 / rate, 0.0)
    offsets = rng.uniform(0.0, span, size=config.pothole_count) if n >= 2 else np.zeros(0)
    for u in np.sort(offsets):
        k = min(int(math.floor(u * rate)), n - 2)
        for i in (k, k + 1):
            s = sigma[i]
            acc[i, 2] += math.copysign(config.pothole_impulse, acc[i, 2])
            for axis in range(3):
                gyro[i, axis] += math.copysign(3.0 * s, gyro[i, axis])
        events.append(config.t0 + float(u))

    data = np.column_stack([t, acc, gyro, lat, lon, speed]) if n else np.zeros((0, len(FIELDS)))
    return DriveLog(data), PotholeEvents(tuple(events)), regimes
