"""Geospatial 5G utility-pole placement planner.

Ingest geolocated pole detections, model disc coverage over a planning
rectangle, and pick a minimum pole subset with an immune algorithm. Exposed
as a library (this package), a CLI (poleplan), an HTTP job service, and a
browser map console.
"""

from .geo import BBoxLTRD, GeoPoint, Polygon, grid_points, haversine_m, point_in_polygon
from .ingest import (
    CaptureManifestEntry,
    DetectionFormatError,
    DetectionRecord,
    PoleCandidate,
    apply_exclusions,
    build_capture_manifest,
    dedup_merge,
    parse_detections,
    synth_scenario,
)
from .coverage import (
    CoverageMatrix,
    DemandGrid,
    InfeasibleProblemError,
    PlanProblem,
    build_demand_grid,
    build_problem,
    coverage_count,
    prune_redundant,
)
from .immune import (
    Antibody,
    ImmuneParams,
    PlanResult,
    brute_force_opt,
    fitness,
    greedy_cover,
    init_population,
    run,
    step,
)
from .pipeline import PlanOutcome, PlanSpec, execute_plan
from .report import geojson_dumps, plan_to_geojson

__version__ = "0.1.0"
