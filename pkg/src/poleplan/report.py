"""Plan result serialization: the red/green GeoJSON consumed by the console.

Candidate points carry role "candidate" (rendered red), the chosen subset is
repeated with role "selected" (green, drawn on top), and demand points no
candidate can reach appear with role "uncovered". A top-level "summary"
foreign member carries the headline numbers.
"""

from __future__ import annotations

import json

from .coverage import PlanProblem
from .immune import PlanResult


def _point_feature(lat: float, lon: float, properties: dict) -> dict:
    return {
        "type": "Feature",
        "geometry": {"type": "Point", "coordinates": [lon, lat]},
        "properties": properties,
    }


def plan_to_geojson(problem: PlanProblem, result: PlanResult) -> dict:
    """FeatureCollection of candidate/selected/uncovered points plus summary."""
    features = []
    for cand in problem.candidates:
        features.append(
            _point_feature(
                cand.point.lat,
                cand.point.lon,
                {
                    "role": "candidate",
                    "id": cand.id,
                    "confidence": cand.confidence,
                    "support": cand.support,
                },
            )
        )
    selected = set(result.selected)
    for cand in problem.candidates:
        if cand.id in selected:
            features.append(
                _point_feature(
                    cand.point.lat,
                    cand.point.lon,
                    {
                        "role": "selected",
                        "id": cand.id,
                        "confidence": cand.confidence,
                        "support": cand.support,
                    },
                )
            )
    for demand_index in result.uncoverable:
        p = problem.demand.points[demand_index]
        features.append(
            _point_feature(p.lat, p.lon, {"role": "uncovered", "demand_index": demand_index})
        )
    return {
        "type": "FeatureCollection",
        "features": features,
        "summary": {
            "selected_count": len(result.selected),
            "coverage": result.cov,
            "generations": result.generations_run,
            "seed": result.seed,
        },
    }


def geojson_dumps(doc: dict) -> str:
    """Stable serialization so identical plans give byte-identical files."""
    return json.dumps(doc, indent=2, sort_keys=False)
