"""Planning problems: demand grid, candidate-covers-demand matrix, coverage
accounting, and redundancy pruning.

Demand is a uniform grid over the planning rectangle; coverage is an
isotropic disc of a single radius around each candidate. Rows of the
coverage matrix are packed little-endian into uint64 words so the optimizer
hot path is word-level OR + popcount.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geo import EARTH_RADIUS_M, BBoxLTRD, GeoPoint, Polygon, grid_points, point_in_polygon
from .ingest import PoleCandidate

DEFAULT_RADIUS_M = 150.0
DEFAULT_GRID_SPACING_M = 50.0

_WORD_BITS = 64


class InfeasibleProblemError(ValueError):
    """Raised when a problem has demand but no candidates to serve it."""


def n_words(n_bits: int) -> int:
    return (n_bits + _WORD_BITS - 1) // _WORD_BITS


def pack_bits(mask: np.ndarray) -> np.ndarray:
    """Pack a bool vector into little-endian uint64 words (bit m -> word m//64)."""
    mask = np.ascontiguousarray(mask, dtype=bool)
    nw = n_words(mask.size)
    by = np.packbits(mask, bitorder="little")
    by = np.pad(by, (0, nw * 8 - by.size))
    return by.view("<u8")


def pack_rows(masks: np.ndarray) -> np.ndarray:
    """Pack a (n, m) bool matrix into (n, n_words(m)) uint64 rows."""
    masks = np.ascontiguousarray(masks, dtype=bool)
    n, m = masks.shape
    nw = n_words(m)
    by = np.packbits(masks, axis=1, bitorder="little")
    if by.shape[1] < nw * 8:
        by = np.pad(by, ((0, 0), (0, nw * 8 - by.shape[1])))
    return by.view("<u8")


def unpack_bits(words: np.ndarray, n_bits: int) -> np.ndarray:
    """Inverse of pack_bits: uint64 words back to a bool vector of n_bits."""
    by = np.ascontiguousarray(words).view(np.uint8)
    return np.unpackbits(by, count=n_bits, bitorder="little").astype(bool)


def popcount(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum())


def or_rows(rows: np.ndarray, selection: np.ndarray) -> np.ndarray:
    """OR of the selected packed rows; the all-zero word vector if none selected."""
    sel = rows[selection]
    if sel.shape[0] == 0:
        return np.zeros(rows.shape[1], dtype=np.uint64)
    return np.bitwise_or.reduce(sel, axis=0)


@dataclass(frozen=True)
class DemandGrid:
    """Demand points inside the bbox and outside every exclusion zone."""

    points: tuple[GeoPoint, ...]
    spacing_m: float
    coverable_mask: np.ndarray  # packed words; all-zero until build_problem

    @property
    def n_points(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class CoverageMatrix:
    """Packed candidate-covers-demand bits: rows[n] bit m <=> distance <= radius."""

    rows: np.ndarray  # (n_candidates, n_words(n_demand)) uint64
    n_candidates: int
    n_demand: int

    @classmethod
    def from_bool(cls, covers: np.ndarray) -> CoverageMatrix:
        covers = np.asarray(covers, dtype=bool)
        return cls(rows=pack_rows(covers), n_candidates=covers.shape[0], n_demand=covers.shape[1])

    def row_bool(self, n: int) -> np.ndarray:
        return unpack_bits(self.rows[n], self.n_demand)


@dataclass(frozen=True)
class PlanProblem:
    """Immutable planning instance handed to the optimizer."""

    candidates: tuple[PoleCandidate, ...]
    demand: DemandGrid
    matrix: CoverageMatrix
    radius_m: float
    n_coverable: int  # M': demand points within radius of >= 1 candidate

    @property
    def n_candidates(self) -> int:
        return self.matrix.n_candidates

    @property
    def coverable_words(self) -> np.ndarray:
        return self.demand.coverable_mask

    def uncoverable_indices(self) -> list[int]:
        coverable = unpack_bits(self.demand.coverable_mask, self.demand.n_points)
        return [int(i) for i in np.flatnonzero(~coverable)]


def build_demand_grid(bbox: BBoxLTRD, spacing_m: float, zones: list[Polygon] = ()) -> DemandGrid:
    """Grid points minus any lying inside an exclusion zone."""
    pts = grid_points(bbox, spacing_m)
    if zones:
        pts = [p for p in pts if not any(point_in_polygon(p, z) for z in zones)]
    return DemandGrid(
        points=tuple(pts),
        spacing_m=spacing_m,
        coverable_mask=np.zeros(n_words(len(pts)), dtype=np.uint64),
    )


def _haversine_matrix_leq(
    cand_pts: list[GeoPoint], demand_pts: tuple[GeoPoint, ...], radius_m: float
) -> np.ndarray:
    """Bool matrix of haversine(candidate, demand) <= radius, block-vectorized."""
    n, m = len(cand_pts), len(demand_pts)
    out = np.zeros((n, m), dtype=bool)
    if n == 0 or m == 0:
        return out
    dlat = np.radians(np.array([p.lat for p in demand_pts]))
    dlon = np.radians(np.array([p.lon for p in demand_pts]))
    cos_dlat = np.cos(dlat)
    clat = np.radians(np.array([p.lat for p in cand_pts]))
    clon = np.radians(np.array([p.lon for p in cand_pts]))
    cos_clat = np.cos(clat)
    # threshold in haversine space avoids an arcsin per pair
    h_max = math.sin(min(radius_m / (2.0 * EARTH_RADIUS_M), math.pi / 2.0)) ** 2
    block = max(1, (4 << 20) // max(m, 1))
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        sin_dphi = np.sin((dlat[None, :] - clat[lo:hi, None]) / 2.0)
        sin_dlam = np.sin((dlon[None, :] - clon[lo:hi, None]) / 2.0)
        h = sin_dphi**2 + cos_clat[lo:hi, None] * cos_dlat[None, :] * sin_dlam**2
        out[lo:hi] = h <= h_max
    return out


def build_problem(
    candidates: list[PoleCandidate],
    bbox: BBoxLTRD,
    radius_m: float = DEFAULT_RADIUS_M,
    spacing_m: float = DEFAULT_GRID_SPACING_M,
    zones: list[Polygon] = (),
) -> PlanProblem:
    """Assemble the coverage problem for exclusion-filtered candidates."""
    if radius_m < 0:
        raise ValueError(f"radius must be non-negative, got {radius_m}")
    demand = build_demand_grid(bbox, spacing_m, zones)
    if not candidates and demand.n_points > 0:
        raise InfeasibleProblemError("no candidates to cover a non-empty demand grid")
    covers = _haversine_matrix_leq([c.point for c in candidates], demand.points, radius_m)
    matrix = CoverageMatrix.from_bool(covers) if len(candidates) else CoverageMatrix(
        rows=np.zeros((0, n_words(demand.n_points)), dtype=np.uint64),
        n_candidates=0,
        n_demand=demand.n_points,
    )
    coverable = or_rows(matrix.rows, np.ones(matrix.n_candidates, dtype=bool))
    demand = DemandGrid(points=demand.points, spacing_m=spacing_m, coverable_mask=coverable)
    return PlanProblem(
        candidates=tuple(candidates),
        demand=demand,
        matrix=matrix,
        radius_m=radius_m,
        n_coverable=popcount(coverable),
    )


def _check_selection(problem: PlanProblem, selection: np.ndarray) -> np.ndarray:
    sel = np.asarray(selection, dtype=bool)
    if sel.shape != (problem.n_candidates,):
        raise ValueError(
            f"selection length {sel.shape} does not match {problem.n_candidates} candidates"
        )
    return sel


def coverage_count(problem: PlanProblem, selection: np.ndarray) -> tuple[int, float]:
    """(covered, cov): covered coverable-demand count and its fraction of M'.

    cov is defined as 1.0 when M' = 0."""
    sel = _check_selection(problem, selection)
    covered = popcount(or_rows(problem.matrix.rows, sel) & problem.coverable_words)
    if problem.n_coverable == 0:
        return covered, 1.0
    return covered, covered / problem.n_coverable


def prune_redundant(problem: PlanProblem, selection: np.ndarray) -> np.ndarray:
    """Remove selected candidates whose removal leaves the covered set intact,
    lowest id first, until the selection is 1-minimal.

    Equivalent to repeatedly dropping the candidate with zero uniquely-covered
    demand (ties by lowest id): per-demand cover counts only decrease as
    members are removed, so a single ascending scan with live counts suffices.
    """
    sel = _check_selection(problem, selection).copy()
    if problem.matrix.n_demand == 0:
        sel[:] = False
        return sel
    idx = np.flatnonzero(sel)
    if idx.size == 0:
        return sel
    rows = problem.matrix.rows[idx] & problem.coverable_words[None, :]
    covers = np.unpackbits(rows.view(np.uint8), axis=1, count=problem.matrix.n_demand, bitorder="little")
    counts = covers.sum(axis=0, dtype=np.int64)
    for k, cand in enumerate(idx):
        row = covers[k]
        hit = row.astype(bool)
        if not hit.any() or counts[hit].min() >= 2:
            counts -= row
            sel[cand] = False
    return sel
