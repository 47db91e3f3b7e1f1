#!/usr/bin/env python3
"""Compare the immune optimizer against the greedy baseline (and, when the
instance is small enough, the exact optimum) over random instances."""

from __future__ import annotations

import argparse
import time

import numpy as np

from poleplan.coverage import build_problem
from poleplan.geo import METERS_PER_DEG_LAT, BBoxLTRD, GeoPoint
from poleplan.immune import ORACLE_MAX_CANDIDATES, ImmuneParams, brute_force_opt, greedy_cover, run
from poleplan.ingest import PoleCandidate


def random_instance(rng: np.random.Generator, n: int, grid_side: int, radius: float, spacing: float):
    side = grid_side * spacing / METERS_PER_DEG_LAT
    box = BBoxLTRD(GeoPoint(side, 0.0), GeoPoint(0.0, side))
    candidates = [
        PoleCandidate(i, GeoPoint(float(rng.uniform(0, side)), float(rng.uniform(0, side))), 1.0, 1)
        for i in range(n)
    ]
    return build_problem(candidates, box, radius_m=radius, spacing_m=spacing)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--instances", type=int, default=20)
    parser.add_argument("--candidates", type=int, default=60)
    parser.add_argument("--grid-side", type=int, default=12)
    parser.add_argument("--radius", type=float, default=120.0)
    parser.add_argument("--spacing", type=float, default=50.0)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    wins = ties = losses = 0
    immune_sizes, greedy_sizes = [], []
    t0 = time.perf_counter()
    for k in range(args.instances):
        problem = random_instance(rng, args.candidates, args.grid_side, args.radius, args.spacing)
        result = run(problem, ImmuneParams(), seed=int(rng.integers(1 << 62)))
        greedy_size = int(greedy_cover(problem).sum())
        immune_size = len(result.selected)
        immune_sizes.append(immune_size)
        greedy_sizes.append(greedy_size)
        marks = [f"immune={immune_size}", f"greedy={greedy_size}"]
        if problem.n_candidates <= ORACLE_MAX_CANDIDATES:
            opt_size, _ = brute_force_opt(problem)
            marks.append(f"opt={opt_size}")
        if immune_size < greedy_size:
            wins += 1
        elif immune_size == greedy_size:
            ties += 1
        else:
            losses += 1
        print(f"instance {k:3d}: cov={result.cov:.3f} " + " ".join(marks))
    elapsed = time.perf_counter() - t0
    n = args.instances
    print(f"\nimmune vs greedy over {n} instances: {wins} smaller, {ties} equal, {losses} larger")
    print(f"mean poles: immune {sum(immune_sizes) / n:.2f}, greedy {sum(greedy_sizes) / n:.2f}")
    print(f"elapsed {elapsed:.1f}s")


if __name__ == "__main__":
    main()
