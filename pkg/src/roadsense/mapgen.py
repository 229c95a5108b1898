"""GeoJSON road-condition maps from classified windows."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DataError, MissingPosition
from .telemetry import DriveLog
from .windows import make_windows

GOOD_COLOR = "#1a9850"
BAD_COLOR = "#d73027"
POTHOLE_COLOR = "#7b3294"


@dataclass(frozen=True)
class MapInterval:
    start_t: float
    end_t: float
    label: str
    score: float
    first_lat: float | None = None
    first_lon: float | None = None
    last_lat: float | None = None
    last_lon: float | None = None
    centroid_lat: float | None = None
    centroid_lon: float | None = None


def _coord(lat, lon, what: str, t: float) -> list[float]:
    if lat is None or lon is None or not (math.isfinite(lat) and math.isfinite(lon)):
        raise MissingPosition(f"{what} position missing for window starting at {t!r}")
    return [float(lon), float(lat)]


def build_map(road: Sequence[MapInterval], potholes: Sequence[MapInterval] = ()) -> str:
    """Render road windows as LineStrings and pothole-positive windows as Points.

    A road segment is flagged ``pothole: true`` when a pothole-positive window
    overlaps it in time.  Features are ordered by ``start_t`` (segments before
    points on ties) and serialized compactly so equal input gives equal bytes.
    """
    hits = [p for p in potholes if p.label == "pothole"]
    keyed = []
    for w in road:
        if w.label not in ("good", "bad"):
            raise DataError(f"road label must be 'good' or 'bad', got {w.label!r}")
        coords = [
            _coord(w.first_lat, w.first_lon, "first", w.start_t),
            _coord(w.last_lat, w.last_lon, "last", w.start_t),
        ]
        flagged = any(p.start_t < w.end_t and w.start_t < p.end_t for p in hits)
        feature = {
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": coords},
            "properties": {
                "condition": w.label,
                "pothole": flagged,
                "score": float(w.score),
                "start_t": float(w.start_t),
                "end_t": float(w.end_t),
                "color": BAD_COLOR if w.label == "bad" else GOOD_COLOR,
            },
        }
        keyed.append(((w.start_t, 0), feature))
    for p in hits:
        feature = {
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": _coord(p.centroid_lat, p.centroid_lon, "centroid", p.start_t)},
            "properties": {
                "pothole": True,
                "score": float(p.score),
                "start_t": float(p.start_t),
                "end_t": float(p.end_t),
                "color": POTHOLE_COLOR,
            },
        }
        keyed.append(((p.start_t, 1), feature))
    keyed.sort(key=lambda kf: kf[0])
    collection = {"type": "FeatureCollection", "features": [f for _, f in keyed]}
    return json.dumps(collection, allow_nan=False, separators=(",", ":"))


def intervals_from_response(log: DriveLog, response: dict, road_window: int = 25,
                            pothole_window: int = 10) -> tuple[list[MapInterval], list[MapInterval]]:
    """Attach window positions from ``log`` to a classify response for that log."""

    def join(key: str, size: int) -> list[MapInterval]:
        items = response.get(key, [])
        windows = make_windows(log, size) if len(log) >= size else []
        if len(items) != len(windows):
            raise DataError(
                f"{key}: response has {len(items)} intervals but the log yields {len(windows)} windows of {size}"
            )
        out = []
        for item, w in zip(items, windows):
            if item["start_t"] != w.start_t:
                raise DataError(f"{key}: interval at {item['start_t']!r} does not match the log")
            out.append(
                MapInterval(
                    item["start_t"], item["end_t"], item["label"], item["score"],
                    w.first_lat, w.first_lon, w.last_lat, w.last_lon, w.centroid_lat, w.centroid_lon,
                )
            )
        return out

    return join("road", road_window), join("potholes", pothole_window)


_HTML = """<!DOCTYPE html>
<html>
<head>
<meta charset="utf-8">
<title>Road condition map</title>
<link rel="stylesheet" href="https://unpkg.com/leaflet@1.9.4/dist/leaflet.css">
<script src="https://unpkg.com/leaflet@1.9.4/dist/leaflet.js"></script>
<style>html, body, #map {{ height: 100%; margin: 0; }}</style>
</head>
<body>
<div id="map"></div>
<script>
var data = {geojson};
var map = L.map("map");
L.tileLayer("https://tile.openstreetmap.org/{{z}}/{{x}}/{{y}}.png", {{
  maxZoom: 19, attribution: "&copy; OpenStreetMap contributors"
}}).addTo(map);
var layer = L.geoJSON(data, {{
  style: function (f) {{ return {{color: f.properties.color, weight: 5}}; }},
  pointToLayer: function (f, latlng) {{
    return L.circleMarker(latlng, {{radius: 6, color: f.properties.color, fillOpacity: 0.9}});
  }}
}}).addTo(map);
if (data.features.length) {{ map.fitBounds(layer.getBounds()); }} else {{ map.setView([0, 0], 2); }}
</script>
</body>
</html>
"""


def build_html(geojson_text: str) -> str:
    """Static viewer page embedding the GeoJSON over an OpenStreetMap tile layer."""
    return _HTML.format(geojson=geojson_text)
