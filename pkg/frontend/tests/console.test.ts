// @vitest-environment jsdom
/** Console contract against a mocked service: the acceptance path. The
 * pieces are wired exactly as in main.ts, with the Leaflet adapter swapped
 * for a recording port (no real map in jsdom). */

import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import { ServiceClient } from '../src/api';
import { countByRole, ROLE_COLORS, summaryFromResult } from '../src/markers';
import type { MarkerSpec } from '../src/markers';
import { renderStats } from '../src/panel';
import { JobTracker } from '../src/tracker';
import { LayerPort, ResultView } from '../src/view';
import { fixtureResult, jsonResponse, statusDoc } from './fixture';

class RecordingPort implements LayerPort {
  layers = new Map<string, MarkerSpec[]>();
  drawLayer(key: string, markers: MarkerSpec[]): void {
    this.layers.set(key, markers);
  }
  removeLayer(key: string): void {
    this.layers.delete(key);
  }
  setLayerVisible(): void {}
  activeMarkers(): MarkerSpec[] {
    return ['candidate', 'uncovered', 'selected'].flatMap((r) => this.layers.get(`active:${r}`) ?? []);
  }
}

function mockedService() {
  const sequence = [statusDoc('queued', 0), statusDoc('running', 5), statusDoc('done', 9)];
  let call = 0;
  return vi.fn(async (url: RequestInfo | URL, init?: RequestInit) => {
    const u = String(url);
    if (init?.method === 'POST') return jsonResponse({ job_id: 'fixture-job' }, 202);
    if (u.endsWith('/result')) return jsonResponse(fixtureResult());
    return jsonResponse(sequence[Math.min(call++, sequence.length - 1)]);
  });
}

describe('console contract (mocked service)', () => {
  beforeEach(() => {
    vi.useFakeTimers();
    document.body.innerHTML = `
      <div id="stats" hidden>
        <dd data-stat="selected_count">–</dd>
        <dd data-stat="coverage">–</dd>
        <dd data-stat="generations">–</dd>
        <dd data-stat="seed">–</dd>
      </div>`;
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it('renders 30 red, 6 green, 2 amber markers and the summary verbatim', async () => {
    const fetchFn = mockedService();
    const client = new ServiceClient('http://mock:8080', fetchFn);
    const port = new RecordingPort();
    const view = new ResultView(port);
    const statsPanel = document.getElementById('stats')!;

    const tracker = new JobTracker(
      client,
      {
        onStatus: () => {},
        onResult: (result) => {
          view.showResult(result);
          renderStats(statsPanel, summaryFromResult(result));
        },
        onTerminal: () => {},
        onError: (m) => {
          throw new Error(m);
        },
      },
      1000,
    );

    const jobId = await client.submit({
      bbox: { lt: { lat: 42.365, lon: -71.062 }, rd: { lat: 42.36, lon: -71.0553 } },
      scenario: { seed: 7, n_poles: 30 },
    });
    tracker.track(jobId);
    await vi.advanceTimersByTimeAsync(2500);

    const markers = port.activeMarkers();
    const counts = countByRole(markers);
    expect(counts).toEqual({ candidate: 30, selected: 6, uncovered: 2 });
    expect(markers.filter((m) => m.color === ROLE_COLORS.candidate)).toHaveLength(30);
    expect(markers.filter((m) => m.color === ROLE_COLORS.selected)).toHaveLength(6);
    expect(markers.filter((m) => m.color === ROLE_COLORS.uncovered)).toHaveLength(2);

    const summary = fixtureResult().summary;
    expect(statsPanel.querySelector('[data-stat="selected_count"]')!.textContent).toBe(String(summary.selected_count));
    expect(statsPanel.querySelector('[data-stat="coverage"]')!.textContent).toBe(String(summary.coverage));
    expect(statsPanel.querySelector('[data-stat="generations"]')!.textContent).toBe(String(summary.generations));
    expect(statsPanel.querySelector('[data-stat="seed"]')!.textContent).toBe(String(summary.seed));
  });
});
