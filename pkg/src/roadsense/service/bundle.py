"""Model bundle: scaler plus both task models, serialized as one JSON document."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from ..errors import ChecksumMismatch, Corrupt, VersionMismatch
from ..learn.svm import SvmModel
from ..windows import FEATURE_NAMES, N_FEATURES, POTHOLE_WINDOW, ROAD_WINDOW, Scaler

FORMAT_VERSION = 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def feature_checksum(names=FEATURE_NAMES) -> str:
    return f"{fnv1a_64(','.join(names).encode('utf-8')):016x}"


@dataclass(frozen=True, eq=False)
class ModelBundle:
    scaler: Scaler
    road_model: SvmModel
    pothole_model: SvmModel
    road_window: int = ROAD_WINDOW
    pothole_window: int = POTHOLE_WINDOW
    metadata: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        if self.road_window < 2 or self.pothole_window < 2:
            raise ValueError("window sizes must be at least 2")
        meta = dict(self.metadata)
        meta.setdefault("feature_checksum", feature_checksum())
        object.__setattr__(self, "metadata", meta)

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "feature_names": list(FEATURE_NAMES),
            "scaler": self.scaler.to_dict(),
            "road": {"window_size": self.road_window, "model": self.road_model.to_dict()},
            "pothole": {"window_size": self.pothole_window, "model": self.pothole_model.to_dict()},
            "metadata": self.metadata,
        }

    @property
    def model_version(self) -> str:
        digest = hashlib.sha256(save_bundle(self)).hexdigest()[:12]
        return f"v{self.format_version}-{digest}"


def save_bundle(bundle: ModelBundle) -> bytes:
    # json writes floats with repr(), which round-trips exactly
    text = json.dumps(bundle.to_dict(), allow_nan=False, separators=(",", ":"))
    return (text + "\n").encode("utf-8")


def _model(section, window_default: int) -> tuple[SvmModel, int]:
    model = SvmModel.from_dict(section["model"])
    if model.support_vectors.shape[0] and model.n_features != N_FEATURES:
        raise ValueError(f"support vectors have {model.n_features} columns, expected {N_FEATURES}")
    window = int(section.get("window_size", window_default))
    return model, window


def load_bundle(data: bytes) -> ModelBundle:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise Corrupt(f"bundle is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise Corrupt("bundle is missing format_version")
    if doc["format_version"] != FORMAT_VERSION:
        raise VersionMismatch(f"bundle format {doc['format_version']!r}, this build reads {FORMAT_VERSION}")
    try:
        meta = dict(doc["metadata"])
        expected = feature_checksum()
        if meta.get("feature_checksum") != expected:
            raise ChecksumMismatch(
                f"feature order checksum {meta.get('feature_checksum')!r} != {expected!r}"
            )
        scaler = Scaler.from_dict(doc["scaler"])
        road, road_w = _model(doc["road"], ROAD_WINDOW)
        pothole, pothole_w = _model(doc["pothole"], POTHOLE_WINDOW)
        return ModelBundle(scaler, road, pothole, road_w, pothole_w, meta)
    except ChecksumMismatch:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise Corrupt(f"bundle structure invalid: {exc}") from None


def read_bundle(path) -> ModelBundle:
    with open(path, "rb") as fh:
        return load_bundle(fh.read())


def write_bundle(bundle: ModelBundle, path) -> None:
    with open(path, "wb") as fh:
        fh.write(save_bundle(bundle))
