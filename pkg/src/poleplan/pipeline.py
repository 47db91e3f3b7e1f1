"""End-to-end plan execution shared by the CLI and the job service:
detections -> dedup -> exclusions -> problem -> optimizer -> GeoJSON."""

from __future__ import annotations

from dataclasses import dataclass, field

from .coverage import DEFAULT_GRID_SPACING_M, DEFAULT_RADIUS_M, PlanProblem, build_problem
from .geo import BBoxLTRD, Polygon
from .immune import ImmuneParams, PlanResult, run
from .ingest import DEFAULT_MERGE_RADIUS_M, DetectionRecord, PoleCandidate, apply_exclusions, dedup_merge
from .report import plan_to_geojson


@dataclass(frozen=True)
class PlanSpec:
    """Everything a plan needs besides the detections themselves."""

    bbox: BBoxLTRD
    radius_m: float = DEFAULT_RADIUS_M
    grid_spacing_m: float = DEFAULT_GRID_SPACING_M
    r_merge_m: float = DEFAULT_MERGE_RADIUS_M
    zones: tuple[Polygon, ...] = ()
    params: ImmuneParams = field(default_factory=ImmuneParams)
    seed: int = 0


@dataclass(frozen=True)
class PlanOutcome:
    problem: PlanProblem
    result: PlanResult
    kept: list[PoleCandidate]
    dropped: list[PoleCandidate]
    geojson: dict


def execute_plan(
    detections: list[DetectionRecord],
    spec: PlanSpec,
    progress_callback=None,
    should_stop=None,
) -> PlanOutcome:
    candidates = dedup_merge(detections, spec.r_merge_m)
    kept, dropped = apply_exclusions(candidates, list(spec.zones))
    problem = build_problem(kept, spec.bbox, spec.radius_m, spec.grid_spacing_m, list(spec.zones))
    result = run(problem, spec.params, spec.seed, progress_callback, should_stop)
    return PlanOutcome(
        problem=problem,
        result=result,
        kept=kept,
        dropped=dropped,
        geojson=plan_to_geojson(problem, result),
    )
