#!/usr/bin/env python3
"""Optimizer hot-path benchmark: a large coverage matrix plus a fixed number
of generations, with per-stage and per-generation timings."""

from __future__ import annotations

import argparse
import time

import numpy as np

from poleplan.coverage import build_problem
from poleplan.geo import METERS_PER_DEG_LAT, BBoxLTRD, GeoPoint
from poleplan.immune import ImmuneParams, run
from poleplan.ingest import PoleCandidate


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--candidates", type=int, default=2000)
    parser.add_argument("--grid-side", type=int, default=100, help="demand grid is side x side")
    parser.add_argument("--generations", type=int, default=200)
    parser.add_argument("--pop-size", type=int, default=50)
    parser.add_argument("--radius", type=float, default=150.0)
    parser.add_argument("--spacing", type=float, default=50.0)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    side = args.grid_side * args.spacing / METERS_PER_DEG_LAT
    box = BBoxLTRD(GeoPoint(side, 0.0), GeoPoint(0.0, side))
    candidates = [
        PoleCandidate(i, GeoPoint(float(rng.uniform(0, side)), float(rng.uniform(0, side))), 1.0, 1)
        for i in range(args.candidates)
    ]

    t0 = time.perf_counter()
    problem = build_problem(candidates, box, radius_m=args.radius, spacing_m=args.spacing)
    t_build = time.perf_counter() - t0
    print(f"matrix build: {t_build:.2f}s  "
          f"(N={problem.matrix.n_candidates}, M={problem.demand.n_points}, M'={problem.n_coverable})")

    params = ImmuneParams(
        pop_size=args.pop_size,
        max_generations=args.generations,
        stall_limit=args.generations,
    )
    t0 = time.perf_counter()
    result = run(problem, params, seed=args.seed)
    t_run = time.perf_counter() - t0

    gen_ms = np.array([t.seconds for t in result.trace]) * 1000.0
    print(f"optimizer: {t_run:.2f}s over {result.generations_run} generations")
    print(f"per-generation ms: mean {gen_ms.mean():.1f}, p50 {np.percentile(gen_ms, 50):.1f}, "
          f"p95 {np.percentile(gen_ms, 95):.1f}, max {gen_ms.max():.1f}")
    print(f"coverage {result.cov:.4f} with {len(result.selected)} poles; "
          f"best fitness {result.trace[-1].best_fitness:.3f}")
    print(f"total: {t_build + t_run:.2f}s")


if __name__ == "__main__":
    main()
