/** Canonical mocked-service fixture: 30 candidates, 6 of them selected,
 * 2 uncovered demand points, with a summary the panel must echo verbatim. */

import type { PointFeature, ResultDoc, StatusDoc } from '../src/schema';

const SELECTED_IDS = [2, 7, 11, 19, 23, 28];

function candidate(id: number, role: 'candidate' | 'selected'): PointFeature {
  return {
    type: 'Feature',
    geometry: { type: 'Point', coordinates: [-71.06 + id * 0.0002, 42.36 + id * 0.0001] },
    properties: { role, id, confidence: 0.5 + (id % 5) * 0.1, support: 1 + (id % 3) },
  };
}

export function fixtureResult(): ResultDoc {
  const features: PointFeature[] = [];
  for (let id = 0; id < 30; id++) features.push(candidate(id, 'candidate'));
  for (const id of SELECTED_IDS) features.push(candidate(id, 'selected'));
  for (const demand of [4, 9]) {
    features.push({
      type: 'Feature',
      geometry: { type: 'Point', coordinates: [-71.058 + demand * 0.0003, 42.3615] },
      properties: { role: 'uncovered', demand_index: demand },
    });
  }
  return {
    type: 'FeatureCollection',
    features,
    summary: { selected_count: 6, coverage: 0.9782608695652174, generations: 57, seed: 42 },
  };
}

export function statusDoc(state: StatusDoc['state'], generation: number): StatusDoc {
  return {
    job_id: 'job-1',
    state,
    progress: { generation, best_cov: Math.min(1, 0.5 + generation * 0.01), best_size: 30 - generation },
    submitted_at: '2026-08-10T12:00:00+00:00',
    ...(state === 'done' || state === 'failed' || state === 'cancelled'
      ? { finished_at: '2026-08-10T12:00:09+00:00' }
      : {}),
  };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}
