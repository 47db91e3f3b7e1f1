/** DOM rendering for the stats panel, the progress strip and error banners.
 * Stats values are written verbatim from the service summary; the only
 * display transform anywhere is the percent formatting of live progress. */

import type { StatusDoc, SummaryDoc } from './schema';

function slot(root: HTMLElement, name: string): HTMLElement {
  const el = root.querySelector<HTMLElement>(`[data-stat="${name}"]`);
  if (!el) throw new Error(`stats panel is missing [data-stat="${name}"]`);
  return el;
}

export function renderStats(root: HTMLElement, summary: SummaryDoc): void {
  slot(root, 'selected_count').textContent = String(summary.selected_count);
  slot(root, 'coverage').textContent = String(summary.coverage);
  slot(root, 'generations').textContent = String(summary.generations);
  slot(root, 'seed').textContent = String(summary.seed);
  root.hidden = false;
}

export function clearStats(root: HTMLElement): void {
  for (const name of ['selected_count', 'coverage', 'generations', 'seed']) {
    slot(root, name).textContent = '–';
  }
  root.hidden = true;
}

export function renderProgress(root: HTMLElement, status: StatusDoc): void {
  const badge = root.querySelector<HTMLElement>('[data-progress="state"]');
  if (badge) {
    badge.textContent = status.state;
    badge.dataset.state = status.state;
  }
  const gen = root.querySelector<HTMLElement>('[data-progress="generation"]');
  if (gen) gen.textContent = String(status.progress.generation);
  const cov = root.querySelector<HTMLElement>('[data-progress="best_cov"]');
  if (cov) cov.textContent = `${(status.progress.best_cov * 100).toFixed(1)}%`;
  const size = root.querySelector<HTMLElement>('[data-progress="best_size"]');
  if (size) size.textContent = String(status.progress.best_size);
  root.hidden = false;
}

export function showError(banner: HTMLElement, message: string): void {
  banner.textContent = message;
  banner.hidden = false;
}

export function clearError(banner: HTMLElement): void {
  banner.textContent = '';
  banner.hidden = true;
}
