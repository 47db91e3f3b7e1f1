"""Geodesic primitives: WGS84 points, planning rectangles, grids, polygons.

Spherical model with the mean Earth radius; lat/lon treated as a plane for
polygon and grid work with mid-latitude longitude scaling. Good for
city-scale boxes (documented limit: bbox extent <= 1 degree).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6_371_008.8  # mean Earth radius
METERS_PER_DEG_LAT = math.pi * EARTH_RADIUS_M / 180.0

# Guards the ceiling rule in grid_points against float noise when an extent
# is an exact multiple of the spacing (e.g. a 100 m box at 50 m spacing).
_CEIL_EPS = 1e-9


@dataclass(frozen=True)
class GeoPoint:
    """A WGS84 coordinate in degrees."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ValueError(f"coordinates must be finite, got ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class BBoxLTRD:
    """Planning rectangle given by its left-top and right-down corners.

    Left-top holds the max latitude / min longitude. Antimeridian-crossing
    boxes (lt.lon >= rd.lon) and boxes touching a pole are rejected.
    """

    lt: GeoPoint
    rd: GeoPoint

    def __post_init__(self) -> None:
        if not self.lt.lat > self.rd.lat:
            raise ValueError(
                f"left-top latitude ({self.lt.lat}) must exceed right-down latitude ({self.rd.lat})"
            )
        if not self.lt.lon < self.rd.lon:
            raise ValueError(
                f"left-top longitude ({self.lt.lon}) must be west of right-down longitude ({self.rd.lon})"
            )
        if abs(self.lt.lat) == 90.0 or abs(self.rd.lat) == 90.0:
            raise ValueError("polar boxes are not supported")

    @property
    def mid_lat(self) -> float:
        return 0.5 * (self.lt.lat + self.rd.lat)

    def contains(self, p: GeoPoint) -> bool:
        return self.rd.lat <= p.lat <= self.lt.lat and self.lt.lon <= p.lon <= self.rd.lon


@dataclass(frozen=True)
class Polygon:
    """Simple polygon over lat/lon, implicitly closed."""

    vertices: tuple[GeoPoint, ...]

    def __init__(self, vertices) -> None:
        vertices = tuple(vertices)
        if len(vertices) < 3:
            raise ValueError(f"polygon needs at least 3 vertices, got {len(vertices)}")
        n = len(vertices)
        for i in range(n):
            a, b = vertices[i], vertices[(i + 1) % n]
            if a.lat == b.lat and a.lon == b.lon:
                raise ValueError(f"consecutive duplicate vertex at index {i}")
        object.__setattr__(self, "vertices", vertices)


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters on a sphere of radius EARTH_RADIUS_M."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.atan2(math.sqrt(h), math.sqrt(1.0 - h))


def meters_per_deg_lon(lat: float) -> float:
    """Longitude scale at a given latitude (planar mid-latitude treatment)."""
    return METERS_PER_DEG_LAT * math.cos(math.radians(lat))


def grid_shape(bbox: BBoxLTRD, spacing_m: float) -> tuple[int, int]:
    """(rows, cols) of the cell lattice: ceil(extent / spacing), min 1 per axis."""
    if spacing_m <= 0:
        raise ValueError(f"spacing must be positive, got {spacing_m}")
    ext_ns = (bbox.lt.lat - bbox.rd.lat) * METERS_PER_DEG_LAT
    ext_we = (bbox.rd.lon - bbox.lt.lon) * meters_per_deg_lon(bbox.mid_lat)
    rows = max(1, math.ceil(ext_ns / spacing_m - _CEIL_EPS))
    cols = max(1, math.ceil(ext_we / spacing_m - _CEIL_EPS))
    return rows, cols


def grid_points(bbox: BBoxLTRD, spacing_m: float) -> list[GeoPoint]:
    """Cell-center lattice covering the bbox, row-major north-to-south then
    west-to-east. Every point lies strictly inside the bbox."""
    rows, cols = grid_shape(bbox, spacing_m)
    dlat = (bbox.lt.lat - bbox.rd.lat) / rows
    dlon = (bbox.rd.lon - bbox.lt.lon) / cols
    return [
        GeoPoint(bbox.lt.lat - (r + 0.5) * dlat, bbox.lt.lon + (c + 0.5) * dlon)
        for r in range(rows)
        for c in range(cols)
    ]


def _on_segment(p: GeoPoint, a: GeoPoint, b: GeoPoint) -> bool:
    """Exact collinearity + bounding check in the lat/lon plane."""
    cross = (b.lat - a.lat) * (p.lon - a.lon) - (b.lon - a.lon) * (p.lat - a.lat)
    if cross != 0.0:
        return False
    return (
        min(a.lat, b.lat) <= p.lat <= max(a.lat, b.lat)
        and min(a.lon, b.lon) <= p.lon <= max(a.lon, b.lon)
    )


def point_in_polygon(p: GeoPoint, poly: Polygon) -> bool:
    """Even-odd ray casting in the lat/lon plane; boundary counts as inside."""
    verts = poly.vertices
    n = len(verts)
    for i in range(n):
        if _on_segment(p, verts[i], verts[(i + 1) % n]):
            return True
    inside = False
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        if (a.lat > p.lat) != (b.lat > p.lat):
            lon_cross = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat)
            if p.lon < lon_cross:
                inside = not inside
    return inside
