/** Pure mapping from a result document to drawable marker specs. Rendering
 * order matters: candidates (red) first, uncovered demand (amber) next,
 * selected poles (green) last so they draw on top. */

import type { ResultDoc, SummaryDoc } from './schema';

export type Role = 'candidate' | 'selected' | 'uncovered';

export const ROLE_COLORS: Record<Role, string> = {
  candidate: '#d63031', // red
  selected: '#1f9d55', // green
  uncovered: '#f5a623', // amber
};

export const ROLE_ORDER: Role[] = ['candidate', 'uncovered', 'selected'];

export interface MarkerSpec {
  lat: number;
  lon: number;
  role: Role;
  color: string;
  label: string;
}

function labelFor(role: Role, props: Record<string, unknown>): string {
  if (role === 'uncovered') return `uncovered demand #${props.demand_index}`;
  const conf = typeof props.confidence === 'number' ? props.confidence.toFixed(2) : '?';
  return `${role} #${props.id} (confidence ${conf}, support ${props.support})`;
}

export function markersFromResult(result: ResultDoc): MarkerSpec[] {
  const byRole: Record<Role, MarkerSpec[]> = { candidate: [], uncovered: [], selected: [] };
  for (const feature of result.features) {
    const role = feature.properties.role;
    if (!(role in byRole)) continue;
    const [lon, lat] = feature.geometry.coordinates;
    byRole[role].push({
      lat,
      lon,
      role,
      color: ROLE_COLORS[role],
      label: labelFor(role, feature.properties),
    });
  }
  return ROLE_ORDER.flatMap((role) => byRole[role]);
}

/** The summary is passed through untouched; the console does no arithmetic
 * on plan data. */
export function summaryFromResult(result: ResultDoc): SummaryDoc {
  return result.summary;
}

export function countByRole(markers: MarkerSpec[]): Record<Role, number> {
  const counts: Record<Role, number> = { candidate: 0, selected: 0, uncovered: 0 };
  for (const marker of markers) counts[marker.role] += 1;
  return counts;
}
