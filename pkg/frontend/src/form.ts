/** The parameter form: numeric bbox corners synchronized with the map
 * rectangle, optimizer knobs, and the detections-or-scenario source choice.
 * Submission stays disabled while the bbox invariant fails. */

import { BBox, bboxError, ImmuneDoc, PlanRequest } from './schema';

export interface FormElements {
  ltLat: HTMLInputElement;
  ltLon: HTMLInputElement;
  rdLat: HTMLInputElement;
  rdLon: HTMLInputElement;
  radius: HTMLInputElement;
  grid: HTMLInputElement;
  merge: HTMLInputElement;
  seed: HTMLInputElement;
  popSize: HTMLInputElement;
  maxGenerations: HTMLInputElement;
  stallLimit: HTMLInputElement;
  source: HTMLSelectElement; // 'scenario' | 'detections'
  scenarioSeed: HTMLInputElement;
  scenarioPoles: HTMLInputElement;
  scenarioDupRate: HTMLInputElement;
  scenarioJitter: HTMLInputElement;
  detectionsJson: HTMLTextAreaElement;
  exclusionsJson: HTMLTextAreaElement;
  submit: HTMLButtonElement;
  bboxMessage: HTMLElement;
}

function num(input: HTMLInputElement): number {
  return input.value.trim() === '' ? NaN : Number(input.value);
}

function optional(input: HTMLInputElement): number | undefined {
  const v = num(input);
  return Number.isFinite(v) ? v : undefined;
}

export class FormController {
  constructor(
    private readonly el: FormElements,
    private readonly onBBoxEdited: (bbox: BBox | null) => void = () => {},
  ) {
    for (const corner of [el.ltLat, el.ltLon, el.rdLat, el.rdLon]) {
      corner.addEventListener('input', () => {
        const bbox = this.revalidate();
        this.onBBoxEdited(bbox);
      });
    }
    this.revalidate();
  }

  readBBox(): BBox {
    return {
      lt: { lat: num(this.el.ltLat), lon: num(this.el.ltLon) },
      rd: { lat: num(this.el.rdLat), lon: num(this.el.rdLon) },
    };
  }

  /** Map-drawn rectangles land here; the corner fields follow the drawing. */
  setBBox(bbox: BBox): void {
    this.el.ltLat.value = String(bbox.lt.lat);
    this.el.ltLon.value = String(bbox.lt.lon);
    this.el.rdLat.value = String(bbox.rd.lat);
    this.el.rdLon.value = String(bbox.rd.lon);
    this.revalidate();
  }

  /** Re-check the bbox invariant; toggles the inline message and the submit
   * button. Returns the bbox when valid, else null. */
  revalidate(): BBox | null {
    const bbox = this.readBBox();
    const error = bboxError(bbox);
    if (error === null) {
      this.el.bboxMessage.textContent = '';
      this.el.bboxMessage.hidden = true;
      this.el.submit.disabled = false;
      return bbox;
    }
    this.el.bboxMessage.textContent = error;
    this.el.bboxMessage.hidden = false;
    this.el.submit.disabled = true;
    return null;
  }

  private immuneDoc(): ImmuneDoc | undefined {
    const doc: ImmuneDoc = {};
    const popSize = optional(this.el.popSize);
    const maxGenerations = optional(this.el.maxGenerations);
    const stallLimit = optional(this.el.stallLimit);
    if (popSize !== undefined) doc.pop_size = popSize;
    if (maxGenerations !== undefined) doc.max_generations = maxGenerations;
    if (stallLimit !== undefined) doc.stall_limit = stallLimit;
    return Object.keys(doc).length ? doc : undefined;
  }

  /** Build the service request from the form; mirrors the request schema
   * exactly. Throws Error with a user-facing message on unparseable JSON. */
  buildRequest(): PlanRequest {
    const bbox = this.revalidate();
    if (bbox === null) throw new Error('bbox is invalid');
    const request: PlanRequest = { bbox };
    const radius = optional(this.el.radius);
    if (radius !== undefined) request.radius_m = radius;
    const grid = optional(this.el.grid);
    if (grid !== undefined) request.grid_spacing_m = grid;
    const merge = optional(this.el.merge);
    if (merge !== undefined) request.r_merge_m = merge;
    const seed = optional(this.el.seed);
    if (seed !== undefined) request.seed = seed;
    const immune = this.immuneDoc();
    if (immune !== undefined) request.immune = immune;

    const exclusionsText = this.el.exclusionsJson.value.trim();
    if (exclusionsText !== '') {
      try {
        request.exclusions = JSON.parse(exclusionsText);
      } catch (err) {
        throw new Error(`exclusions field is not valid GeoJSON: ${String(err)}`);
      }
    }

    if (this.el.source.value === 'detections') {
      const text = this.el.detectionsJson.value.trim();
      if (text === '') throw new Error('paste a detections JSON array or switch to a scenario');
      try {
        request.detections = JSON.parse(text);
      } catch (err) {
        throw new Error(`detections field is not valid JSON: ${String(err)}`);
      }
    } else {
      request.scenario = {
        seed: optional(this.el.scenarioSeed) ?? 0,
        n_poles: optional(this.el.scenarioPoles) ?? 0,
        dup_rate: optional(this.el.scenarioDupRate) ?? 0,
        jitter_m: optional(this.el.scenarioJitter) ?? 0,
      };
    }
    return request;
  }
}
