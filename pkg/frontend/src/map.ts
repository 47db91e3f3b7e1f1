/** Leaflet adapter: tile layer, circle-marker layers behind the LayerPort
 * interface, the planning-rectangle overlay, and drag-to-draw mode. */

import L from 'leaflet';
import 'leaflet/dist/leaflet.css';

import type { MarkerSpec } from './markers';
import type { BBox } from './schema';
import type { LayerPort } from './view';

const OSM_TILES = 'https://tile.openstreetmap.org/{z}/{x}/{y}.png';
const OSM_ATTRIBUTION = '&copy; OpenStreetMap contributors';

export class LeafletMapView implements LayerPort {
  readonly map: L.Map;
  private readonly groups = new Map<string, L.LayerGroup>();
  private readonly visibility = new Map<string, boolean>();
  private bboxRect: L.Rectangle | null = null;
  private drawRect: L.Rectangle | null = null;
  private drawStart: L.LatLng | null = null;
  private drawing = false;

  constructor(container: HTMLElement, tileUrl: string = OSM_TILES) {
    this.map = L.map(container, { zoomControl: true }).setView([42.362, -71.0589], 15);
    L.tileLayer(tileUrl, { attribution: OSM_ATTRIBUTION, maxZoom: 19 }).addTo(this.map);
  }

  drawLayer(key: string, markers: MarkerSpec[], opts: { dimmed: boolean }): void {
    this.removeLayer(key);
    const group = L.layerGroup(
      markers.map((m) =>
        L.circleMarker([m.lat, m.lon], {
          radius: m.role === 'uncovered' ? 4 : 6,
          color: '#ffffff',
          weight: 1,
          fillColor: m.color,
          fillOpacity: opts.dimmed ? 0.25 : 0.9,
          opacity: opts.dimmed ? 0.3 : 1.0,
        }).bindTooltip(m.label),
      ),
    );
    this.groups.set(key, group);
    if (this.visibility.get(key) ?? true) group.addTo(this.map);
  }

  removeLayer(key: string): void {
    const group = this.groups.get(key);
    if (group) {
      group.remove();
      this.groups.delete(key);
    }
  }

  setLayerVisible(key: string, visible: boolean): void {
    this.visibility.set(key, visible);
    const group = this.groups.get(key);
    if (!group) return;
    if (visible) group.addTo(this.map);
    else group.remove();
  }

  /** Keep the rectangle overlay in sync with the numeric corner fields. */
  showBBox(bbox: BBox | null): void {
    if (this.bboxRect) {
      this.bboxRect.remove();
      this.bboxRect = null;
    }
    if (!bbox) return;
    this.bboxRect = L.rectangle(
      [
        [bbox.rd.lat, bbox.lt.lon],
        [bbox.lt.lat, bbox.rd.lon],
      ],
      { color: '#2563eb', weight: 2, fillOpacity: 0.05, dashArray: '6 4' },
    ).addTo(this.map);
  }

  fitBBox(bbox: BBox): void {
    this.map.fitBounds(
      [
        [bbox.rd.lat, bbox.lt.lon],
        [bbox.lt.lat, bbox.rd.lon],
      ],
      { padding: [24, 24] },
    );
  }

  /** Drag-a-rectangle entry mode; emits the drawn bbox (left-top = north/
   * west extreme, right-down = south/east extreme) and exits draw mode. */
  enableRectangleDraw(onDrawn: (bbox: BBox) => void): () => void {
    const onMouseDown = (e: L.LeafletMouseEvent) => {
      if (!this.drawing) return;
      this.drawStart = e.latlng;
      this.map.dragging.disable();
    };
    const onMouseMove = (e: L.LeafletMouseEvent) => {
      if (!this.drawing || !this.drawStart) return;
      const bounds = L.latLngBounds(this.drawStart, e.latlng);
      if (this.drawRect) this.drawRect.setBounds(bounds);
      else this.drawRect = L.rectangle(bounds, { color: '#2563eb', weight: 2, fillOpacity: 0.08 }).addTo(this.map);
    };
    const onMouseUp = (e: L.LeafletMouseEvent) => {
      if (!this.drawing || !this.drawStart) return;
      const bounds = L.latLngBounds(this.drawStart, e.latlng);
      this.drawStart = null;
      this.setDrawMode(false);
      if (this.drawRect) {
        this.drawRect.remove();
        this.drawRect = null;
      }
      onDrawn({
        lt: { lat: bounds.getNorth(), lon: bounds.getWest() },
        rd: { lat: bounds.getSouth(), lon: bounds.getEast() },
      });
    };
    this.map.on('mousedown', onMouseDown);
    this.map.on('mousemove', onMouseMove);
    this.map.on('mouseup', onMouseUp);
    return () => {
      this.map.off('mousedown', onMouseDown);
      this.map.off('mousemove', onMouseMove);
      this.map.off('mouseup', onMouseUp);
    };
  }

  setDrawMode(on: boolean): void {
    this.drawing = on;
    const container = this.map.getContainer();
    container.classList.toggle('draw-mode', on);
    if (on) this.map.dragging.disable();
    else this.map.dragging.enable();
  }

  get drawMode(): boolean {
    return this.drawing;
  }
}
