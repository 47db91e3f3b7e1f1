/** Types mirroring the plan service request/response schema, plus the bbox
 * invariant check used to gate submission. The console never invents plan
 * numbers: everything rendered comes back from these documents. */

export interface LatLon {
  lat: number;
  lon: number;
}

export interface BBox {
  lt: LatLon;
  rd: LatLon;
}

export interface ScenarioDoc {
  seed: number;
  n_poles: number;
  dup_rate?: number;
  jitter_m?: number;
}

export interface ImmuneDoc {
  pop_size?: number;
  max_generations?: number;
  stall_limit?: number;
  select_frac?: number;
  clone_beta?: number;
  p_min?: number;
  p_max?: number;
  suppress_threshold?: number;
  newcomer_frac?: number;
  init_density?: number;
  seed_greedy?: boolean;
}

export interface DetectionDoc {
  lat: number;
  lon: number;
  confidence: number;
  source_id?: string;
}

export interface PlanRequest {
  bbox: BBox;
  radius_m?: number;
  grid_spacing_m?: number;
  r_merge_m?: number;
  seed?: number;
  immune?: ImmuneDoc;
  exclusions?: unknown;
  detections?: DetectionDoc[];
  scenario?: ScenarioDoc;
}

export type JobState = 'queued' | 'running' | 'done' | 'failed' | 'cancelled';

export interface ProgressDoc {
  generation: number;
  best_cov: number;
  best_size: number;
}

export interface StatusDoc {
  job_id: string;
  state: JobState;
  progress: ProgressDoc;
  submitted_at: string;
  finished_at?: string;
  error?: string;
}

export interface SummaryDoc {
  selected_count: number;
  coverage: number;
  generations: number;
  seed: number;
}

export interface PointFeature {
  type: 'Feature';
  geometry: { type: 'Point'; coordinates: [number, number] };
  properties: {
    role: 'candidate' | 'selected' | 'uncovered';
    id?: number;
    confidence?: number;
    support?: number;
    demand_index?: number;
  };
}

export interface ResultDoc {
  type: 'FeatureCollection';
  features: PointFeature[];
  summary: SummaryDoc;
}

/** Mirror of the service-side bbox invariant: left-top must be strictly
 * north and west of right-down, with coordinates in WGS84 ranges. Returns
 * a user-facing message, or null when the bbox is valid. */
export function bboxError(bbox: BBox): string | null {
  const { lt, rd } = bbox;
  for (const [label, v] of [
    ['left-top', lt],
    ['right-down', rd],
  ] as const) {
    if (!Number.isFinite(v.lat) || !Number.isFinite(v.lon)) {
      return `${label} corner has non-numeric coordinates`;
    }
    if (v.lat < -90 || v.lat > 90) return `${label} latitude must be within [-90, 90]`;
    if (v.lon < -180 || v.lon > 180) return `${label} longitude must be within [-180, 180]`;
  }
  if (!(lt.lat > rd.lat)) return 'left-top latitude must exceed right-down latitude';
  if (!(lt.lon < rd.lon)) return 'left-top longitude must be west of right-down longitude';
  return null;
}

/** Client-side mirror of the service's exactly-one-of rule. */
export function requestError(request: PlanRequest): string | null {
  const err = bboxError(request.bbox);
  if (err !== null) return err;
  const hasDetections = request.detections !== undefined;
  const hasScenario = request.scenario !== undefined;
  if (hasDetections === hasScenario) {
    return "provide exactly one of 'detections' or 'scenario'";
  }
  return null;
}
