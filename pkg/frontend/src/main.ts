/** Console wiring: form + map + tracker + panels against one service. */

import { ServiceClient } from './api';
import { FormController, FormElements } from './form';
import { LeafletMapView } from './map';
import { summaryFromResult, Role } from './markers';
import { clearError, clearStats, renderProgress, renderStats, showError } from './panel';
import type { ResultDoc, StatusDoc } from './schema';
import { JobTracker } from './tracker';
import { ResultView } from './view';

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

function formElements(): FormElements {
  return {
    ltLat: byId<HTMLInputElement>('lt-lat'),
    ltLon: byId<HTMLInputElement>('lt-lon'),
    rdLat: byId<HTMLInputElement>('rd-lat'),
    rdLon: byId<HTMLInputElement>('rd-lon'),
    radius: byId<HTMLInputElement>('radius-m'),
    grid: byId<HTMLInputElement>('grid-spacing-m'),
    merge: byId<HTMLInputElement>('r-merge-m'),
    seed: byId<HTMLInputElement>('seed'),
    popSize: byId<HTMLInputElement>('immune-pop-size'),
    maxGenerations: byId<HTMLInputElement>('immune-max-generations'),
    stallLimit: byId<HTMLInputElement>('immune-stall-limit'),
    source: byId<HTMLSelectElement>('source'),
    scenarioSeed: byId<HTMLInputElement>('scenario-seed'),
    scenarioPoles: byId<HTMLInputElement>('scenario-poles'),
    scenarioDupRate: byId<HTMLInputElement>('scenario-dup-rate'),
    scenarioJitter: byId<HTMLInputElement>('scenario-jitter'),
    detectionsJson: byId<HTMLTextAreaElement>('detections-json'),
    exclusionsJson: byId<HTMLTextAreaElement>('exclusions-json'),
    submit: byId<HTMLButtonElement>('submit'),
    bboxMessage: byId('bbox-message'),
  };
}

function main(): void {
  const errorBanner = byId('error-banner');
  const progressPanel = byId('progress-panel');
  const statsPanel = byId('stats-panel');
  const cancelButton = byId<HTMLButtonElement>('cancel');
  const drawButton = byId<HTMLButtonElement>('draw-rect');
  const baseUrlInput = byId<HTMLInputElement>('service-url');
  const previousToggle = byId<HTMLInputElement>('toggle-previous');

  const mapView = new LeafletMapView(byId('map'));
  const resultView = new ResultView(mapView);

  const form = new FormController(formElements(), (bbox) => mapView.showBBox(bbox));
  mapView.enableRectangleDraw((bbox) => {
    form.setBBox(bbox);
    mapView.showBBox(bbox);
  });
  drawButton.addEventListener('click', () => {
    mapView.setDrawMode(!mapView.drawMode);
    drawButton.classList.toggle('armed', mapView.drawMode);
  });

  const roleToggles: Array<[string, Role]> = [
    ['toggle-candidate', 'candidate'],
    ['toggle-selected', 'selected'],
    ['toggle-uncovered', 'uncovered'],
  ];
  for (const [id, role] of roleToggles) {
    byId<HTMLInputElement>(id).addEventListener('change', (e) => {
      resultView.toggleRole(role, (e.target as HTMLInputElement).checked);
    });
  }
  previousToggle.addEventListener('change', () => resultView.togglePrevious(previousToggle.checked));

  let tracker: JobTracker | null = null;

  const onStatus = (status: StatusDoc) => {
    renderProgress(progressPanel, status);
    cancelButton.disabled = !(status.state === 'queued' || status.state === 'running');
  };
  const onResult = (result: ResultDoc) => {
    resultView.showResult(result);
    renderStats(statsPanel, summaryFromResult(result));
    const uncoveredToggle = byId<HTMLInputElement>('toggle-uncovered');
    uncoveredToggle.disabled = resultView.uncoveredCount() === 0;
    previousToggle.disabled = !resultView.comparisonAvailable();
    cancelButton.disabled = true;
  };
  const onTerminal = (status: StatusDoc) => {
    renderProgress(progressPanel, status);
    cancelButton.disabled = true;
    if (status.state === 'failed' && status.error) showError(errorBanner, status.error);
  };

  byId<HTMLButtonElement>('submit').addEventListener('click', async () => {
    clearError(errorBanner);
    let request;
    try {
      request = form.buildRequest();
    } catch (err) {
      showError(errorBanner, err instanceof Error ? err.message : String(err));
      return;
    }
    const client = new ServiceClient(baseUrlInput.value || 'http://127.0.0.1:8080');
    tracker?.stop();
    tracker = new JobTracker(client, {
      onStatus,
      onResult,
      onTerminal,
      onError: (message) => showError(errorBanner, message),
    });
    clearStats(statsPanel);
    try {
      const jobId = await client.submit(request);
      byId('job-id').textContent = jobId;
      tracker.track(jobId);
    } catch (err) {
      // 4xx/5xx bodies and connection failures surface verbatim
      showError(errorBanner, err instanceof Error ? err.message : String(err));
    }
  });

  cancelButton.addEventListener('click', () => void tracker?.cancelActive());

  const initial = form.revalidate();
  if (initial) {
    mapView.showBBox(initial);
    mapView.fitBBox(initial);
  }
}

document.addEventListener('DOMContentLoaded', main);
