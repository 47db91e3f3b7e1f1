/** Result-layer orchestration, kept separate from Leaflet so the render
 * contract is testable: the active run draws full-strength, the previous
 * run stays underneath as a dimmed comparison layer, and per-role toggles
 * apply to the active run. */

import { markersFromResult, MarkerSpec, Role, ROLE_ORDER } from './markers';
import type { ResultDoc } from './schema';

export interface LayerPort {
  drawLayer(key: string, markers: MarkerSpec[], opts: { dimmed: boolean }): void;
  removeLayer(key: string): void;
  setLayerVisible(key: string, visible: boolean): void;
}

const activeKey = (role: Role) => `active:${role}`;
const previousKey = (role: Role) => `previous:${role}`;

export class ResultView {
  private activeResult: ResultDoc | null = null;
  private visible: Record<Role, boolean> = { candidate: true, selected: true, uncovered: true };
  private previousVisible = true;
  private hasPrevious = false;

  constructor(private readonly port: LayerPort) {}

  /** Draw a fresh result; the run that was active becomes the dimmed
   * comparison layer underneath. */
  showResult(result: ResultDoc): void {
    if (this.activeResult) {
      const prev = markersFromResult(this.activeResult);
      for (const role of ROLE_ORDER) {
        this.port.removeLayer(previousKey(role));
        this.port.drawLayer(previousKey(role), prev.filter((m) => m.role === role), { dimmed: true });
        this.port.setLayerVisible(previousKey(role), this.previousVisible);
      }
      this.hasPrevious = true;
    }
    const markers = markersFromResult(result);
    for (const role of ROLE_ORDER) {
      this.port.removeLayer(activeKey(role));
      this.port.drawLayer(activeKey(role), markers.filter((m) => m.role === role), { dimmed: false });
      this.port.setLayerVisible(activeKey(role), this.visible[role]);
    }
    this.activeResult = result;
  }

  toggleRole(role: Role, visible: boolean): void {
    this.visible[role] = visible;
    this.port.setLayerVisible(activeKey(role), visible);
  }

  togglePrevious(visible: boolean): void {
    this.previousVisible = visible;
    for (const role of ROLE_ORDER) this.port.setLayerVisible(previousKey(role), visible);
  }

  uncoveredCount(): number {
    if (!this.activeResult) return 0;
    return this.activeResult.features.filter((f) => f.properties.role === 'uncovered').length;
  }

  comparisonAvailable(): boolean {
    return this.hasPrevious;
  }

  clear(): void {
    for (const role of ROLE_ORDER) {
      this.port.removeLayer(activeKey(role));
      this.port.removeLayer(previousKey(role));
    }
    this.activeResult = null;
    this.hasPrevious = false;
  }
}
