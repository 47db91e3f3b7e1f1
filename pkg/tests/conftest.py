"""Shared fixtures and instance builders."""

from __future__ import annotations

import numpy as np

from poleplan.coverage import CoverageMatrix, DemandGrid, PlanProblem, n_words, or_rows, popcount
from poleplan.geo import METERS_PER_DEG_LAT, BBoxLTRD, GeoPoint
from poleplan.ingest import PoleCandidate


def meters_box(width_m: float, height_m: float, lat0: float = 0.0, lon0: float = 0.0) -> BBoxLTRD:
    """A bbox of the given metric extents with its left-top corner at (lat0+h, lon0)."""
    import math

    dlat = height_m / METERS_PER_DEG_LAT
    dlon = width_m / (METERS_PER_DEG_LAT * math.cos(math.radians(lat0)))
    return BBoxLTRD(GeoPoint(lat0 + dlat, lon0), GeoPoint(lat0, lon0 + dlon))


def make_problem(covers, radius_m: float = 100.0) -> PlanProblem:
    """Build a PlanProblem directly from an explicit candidate-covers-demand
    bool matrix, with placeholder geometry for candidates and demand."""
    covers = np.asarray(covers, dtype=bool)
    n, m = covers.shape
    candidates = tuple(
        PoleCandidate(id=i, point=GeoPoint(0.001 * i, 0.0), confidence=1.0, support=1)
        for i in range(n)
    )
    demand_points = tuple(GeoPoint(0.001 * j, 0.001) for j in range(m))
    matrix = CoverageMatrix.from_bool(covers)
    coverable = or_rows(matrix.rows, np.ones(n, dtype=bool)) if n else np.zeros(n_words(m), dtype=np.uint64)
    demand = DemandGrid(points=demand_points, spacing_m=50.0, coverable_mask=coverable)
    return PlanProblem(
        candidates=candidates,
        demand=demand,
        matrix=matrix,
        radius_m=radius_m,
        n_coverable=popcount(coverable),
    )


def random_problem(rng: np.random.Generator, n_max: int = 15, m_max: int = 40) -> PlanProblem:
    """A random geometric-free instance where every demand point is coverable
    unless the row column happens to be empty."""
    n = int(rng.integers(3, n_max + 1))
    m = int(rng.integers(5, m_max + 1))
    density = rng.uniform(0.1, 0.5)
    covers = rng.random((n, m)) < density
    return make_problem(covers)
