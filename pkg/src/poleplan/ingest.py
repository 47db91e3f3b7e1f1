"""Bring pole candidates into the system.

Detections arrive from out-of-process detectors as CSV or GeoJSON files that
already carry geocoordinates; this module parses them, merges repeated
detections of the same pole into candidates, filters exclusion zones, and can
also generate synthetic scenarios and capture manifests for external
detectors. No imagery is fetched and no detector is invoked here.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .geo import (
    METERS_PER_DEG_LAT,
    BBoxLTRD,
    GeoPoint,
    Polygon,
    grid_points,
    grid_shape,
    haversine_m,
    meters_per_deg_lon,
    point_in_polygon,
)

DETECTION_CSV_HEADER = ("lat", "lon", "confidence", "source_id")
CANDIDATE_CSV_HEADER = ("id", "lat", "lon", "confidence", "support")
MANIFEST_HEADINGS = (0, 90, 180, 270)
DEFAULT_FOV_DEG = 90.0
DEFAULT_MERGE_RADIUS_M = 5.0


class DetectionFormatError(ValueError):
    """Malformed detection file (bad row/feature, bad field, unknown format)."""


@dataclass(frozen=True)
class DetectionRecord:
    """One geolocated detector hit."""

    point: GeoPoint
    confidence: float
    source_id: str

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class PoleCandidate:
    """A deduplicated candidate pole; ids are dense 0..N-1 within a problem."""

    id: int
    point: GeoPoint
    confidence: float
    support: int


@dataclass(frozen=True)
class CaptureManifestEntry:
    """One image an external detector should capture and process."""

    point: GeoPoint
    heading: int
    fov: float
    image_id: str
    url: str | None = None


def _read_text(source) -> str:
    if isinstance(source, bytes):
        data = source
    elif isinstance(source, str):
        return source
    else:
        data = source.read()
        if isinstance(data, str):
            return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise DetectionFormatError(f"detection file is not valid UTF-8: {e}") from e


def parse_detections(source, format: str = "csv") -> list[DetectionRecord]:
    """Parse a detection file (byte stream, bytes, or text) into records.

    Errors name the offending line (CSV, 1-based file line) or feature index
    (GeoJSON, 0-based).
    """
    text = _read_text(source)
    if format == "csv":
        return _parse_detections_csv(text)
    if format == "geojson":
        return _parse_detections_geojson(text)
    raise DetectionFormatError(f"unknown detection format {format!r} (expected csv or geojson)")


def _parse_detections_csv(text: str) -> list[DetectionRecord]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DetectionFormatError("empty detection file: missing header") from None
    if tuple(h.strip() for h in header) != DETECTION_CSV_HEADER:
        raise DetectionFormatError(
            f"line 1: expected header {','.join(DETECTION_CSV_HEADER)!r}, got {','.join(header)!r}"
        )
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 4:
            raise DetectionFormatError(f"line {lineno}: expected 4 fields, got {len(row)}")
        try:
            lat, lon, conf = float(row[0]), float(row[1]), float(row[2])
        except ValueError as e:
            raise DetectionFormatError(f"line {lineno}: {e}") from None
        try:
            records.append(DetectionRecord(GeoPoint(lat, lon), conf, row[3]))
        except ValueError as e:
            raise DetectionFormatError(f"line {lineno}: {e}") from None
    return records


def _parse_detections_geojson(text: str) -> list[DetectionRecord]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DetectionFormatError(f"invalid JSON: {e}") from None
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise DetectionFormatError("expected a GeoJSON FeatureCollection")
    records = []
    for i, feature in enumerate(doc.get("features", [])):
        try:
            geom = feature["geometry"]
            if geom["type"] != "Point":
                raise DetectionFormatError(f"feature {i}: geometry must be Point, got {geom['type']}")
            lon, lat = float(geom["coordinates"][0]), float(geom["coordinates"][1])
            props = feature.get("properties") or {}
            conf = props["confidence"]
            if not isinstance(conf, (int, float)) or isinstance(conf, bool):
                raise DetectionFormatError(f"feature {i}: confidence must be a number")
            source_id = props["source_id"]
            if not isinstance(source_id, str):
                raise DetectionFormatError(f"feature {i}: source_id must be a string")
            records.append(DetectionRecord(GeoPoint(lat, lon), float(conf), source_id))
        except DetectionFormatError:
            raise
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise DetectionFormatError(f"feature {i}: {e!r}") from None
    return records


class _Cluster:
    """Running confidence-weighted centroid, anchored at the founding point."""

    __slots__ = ("founder", "sum_w", "sum_wdlat", "sum_wdlon", "max_conf", "support")

    def __init__(self, founder: DetectionRecord) -> None:
        self.founder = founder.point
        self.sum_w = 0.0
        self.sum_wdlat = 0.0
        self.sum_wdlon = 0.0
        self.max_conf = 0.0
        self.support = 0
        self.add(founder)

    def add(self, d: DetectionRecord) -> None:
        self.sum_w += d.confidence
        self.sum_wdlat += d.confidence * (d.point.lat - self.founder.lat)
        self.sum_wdlon += d.confidence * (d.point.lon - self.founder.lon)
        self.max_conf = max(self.max_conf, d.confidence)
        self.support += 1

    def centroid(self) -> GeoPoint:
        if self.sum_w == 0.0:
            return self.founder
        return GeoPoint(
            self.founder.lat + self.sum_wdlat / self.sum_w,
            self.founder.lon + self.sum_wdlon / self.sum_w,
        )


def dedup_merge(detections: list[DetectionRecord], r_merge_m: float = DEFAULT_MERGE_RADIUS_M) -> list[PoleCandidate]:
    """Merge repeated detections of the same pole into candidates.

    Greedy clustering: detections are visited by confidence descending (ties
    by input order); each joins the first cluster, in founding order, whose
    current centroid is within r_merge_m, else founds a new cluster. The
    centroid is the confidence-weighted mean of member coordinates and is
    recomputed on each join. Output order is founding order, ids 0..K-1.
    """
    if r_merge_m <= 0:
        raise ValueError(f"merge radius must be positive, got {r_merge_m}")
    order = sorted(range(len(detections)), key=lambda i: (-detections[i].confidence, i))
    clusters: list[_Cluster] = []
    for i in order:
        d = detections[i]
        for cluster in clusters:
            if haversine_m(d.point, cluster.centroid()) <= r_merge_m:
                cluster.add(d)
                break
        else:
            clusters.append(_Cluster(d))
    return [
        PoleCandidate(id=k, point=c.centroid(), confidence=c.max_conf, support=c.support)
        for k, c in enumerate(clusters)
    ]


def apply_exclusions(
    candidates: list[PoleCandidate], zones: list[Polygon]
) -> tuple[list[PoleCandidate], list[PoleCandidate]]:
    """Drop candidates inside any zone; kept candidates get dense ids again.

    The dropped list retains the original candidates (original ids) so error
    points, e.g. detections placed in a river, can be reported.
    """
    kept: list[PoleCandidate] = []
    dropped: list[PoleCandidate] = []
    for cand in candidates:
        if any(point_in_polygon(cand.point, z) for z in zones):
            dropped.append(cand)
        else:
            kept.append(
                PoleCandidate(id=len(kept), point=cand.point, confidence=cand.confidence, support=cand.support)
            )
    return kept, dropped


def synth_scenario(
    seed: int,
    bbox: BBoxLTRD,
    n_poles: int,
    dup_rate: float = 0.0,
    jitter_m: float = 0.0,
) -> list[DetectionRecord]:
    """Deterministic synthetic detections: n_poles true poles uniform in the
    bbox, each spawning Poisson(dup_rate) duplicate detections offset by at
    most jitter_m. Confidences are uniform in [0.5, 1.0]."""
    if n_poles < 0:
        raise ValueError(f"n_poles must be non-negative, got {n_poles}")
    if dup_rate < 0 or jitter_m < 0:
        raise ValueError("dup_rate and jitter_m must be non-negative")
    rng = np.random.default_rng(seed)
    records: list[DetectionRecord] = []
    for i in range(n_poles):
        lat = rng.uniform(bbox.rd.lat, bbox.lt.lat)
        lon = rng.uniform(bbox.lt.lon, bbox.rd.lon)
        records.append(DetectionRecord(GeoPoint(lat, lon), rng.uniform(0.5, 1.0), f"pole{i}"))
        for j in range(rng.poisson(dup_rate)):
            bearing = rng.uniform(0.0, 2.0 * math.pi)
            dist = rng.uniform(0.0, jitter_m)
            dlat = dist * math.cos(bearing) / METERS_PER_DEG_LAT
            dlon = dist * math.sin(bearing) / meters_per_deg_lon(lat)
            jlat = min(max(lat + dlat, -90.0), 90.0)
            jlon = min(max(lon + dlon, -180.0), 180.0)
            records.append(
                DetectionRecord(GeoPoint(jlat, jlon), rng.uniform(0.5, 1.0), f"pole{i}_dup{j}")
            )
    return records


def build_capture_manifest(
    bbox: BBoxLTRD, spacing_m: float, url_template: str | None = None
) -> list[CaptureManifestEntry]:
    """Capture points on the bbox grid, one entry per cardinal heading.

    image_id is "r{row}_c{col}_h{heading}". An optional URL template is
    rendered per entry by substituting {lat}, {lon}, {heading}, {fov}; no
    network activity happens here.
    """
    rows, cols = grid_shape(bbox, spacing_m)
    points = grid_points(bbox, spacing_m)
    entries = []
    for idx, point in enumerate(points):
        r, c = divmod(idx, cols)
        for heading in MANIFEST_HEADINGS:
            url = None
            if url_template is not None:
                url = url_template.format(
                    lat=point.lat, lon=point.lon, heading=heading, fov=DEFAULT_FOV_DEG
                )
            entries.append(
                CaptureManifestEntry(
                    point=point,
                    heading=heading,
                    fov=DEFAULT_FOV_DEG,
                    image_id=f"r{r}_c{c}_h{heading}",
                    url=url,
                )
            )
    return entries


def zones_from_geojson(doc) -> list[Polygon]:
    """Exclusion polygons from GeoJSON: a FeatureCollection, a (Multi)Polygon
    geometry, a Feature, or a list of any of these. Outer rings only; the
    GeoJSON closing vertex is stripped."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise DetectionFormatError(f"invalid exclusion GeoJSON: {e}") from None
    zones: list[Polygon] = []
    _collect_zones(doc, zones)
    return zones


def _collect_zones(node, out: list[Polygon]) -> None:
    if isinstance(node, list):
        for item in node:
            _collect_zones(item, out)
        return
    if not isinstance(node, dict):
        raise DetectionFormatError(f"exclusion GeoJSON node must be an object, got {type(node).__name__}")
    kind = node.get("type")
    if kind == "FeatureCollection":
        _collect_zones(node.get("features", []), out)
    elif kind == "Feature":
        _collect_zones(node["geometry"], out)
    elif kind == "Polygon":
        out.append(_ring_to_polygon(node["coordinates"][0]))
    elif kind == "MultiPolygon":
        for polygon in node["coordinates"]:
            out.append(_ring_to_polygon(polygon[0]))
    else:
        raise DetectionFormatError(f"unsupported exclusion GeoJSON type {kind!r}")


def _ring_to_polygon(ring) -> Polygon:
    pts = [GeoPoint(float(lat), float(lon)) for lon, lat in ring]
    if len(pts) >= 2 and pts[0] == pts[-1]:
        pts = pts[:-1]
    try:
        return Polygon(pts)
    except ValueError as e:
        raise DetectionFormatError(f"bad exclusion ring: {e}") from None


def detections_to_csv(records: list[DetectionRecord]) -> str:
    """Serialize records to the detection CSV format (lossless round-trip)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(DETECTION_CSV_HEADER)
    for r in records:
        writer.writerow([repr(r.point.lat), repr(r.point.lon), repr(r.confidence), r.source_id])
    return out.getvalue()


def candidates_to_csv(candidates: list[PoleCandidate]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CANDIDATE_CSV_HEADER)
    for c in candidates:
        writer.writerow([c.id, repr(c.point.lat), repr(c.point.lon), repr(c.confidence), c.support])
    return out.getvalue()


def manifest_to_json(entries: list[CaptureManifestEntry]) -> str:
    """Capture manifest JSON: array of {lat, lon, heading, fov, image_id, url?}."""
    items = []
    for e in entries:
        item = {
            "lat": e.point.lat,
            "lon": e.point.lon,
            "heading": e.heading,
            "fov": e.fov,
            "image_id": e.image_id,
        }
        if e.url is not None:
            item["url"] = e.url
        items.append(item)
    return json.dumps(items, indent=2)
