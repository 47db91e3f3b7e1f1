/** Poll-based job tracking (1 s default). At most one job is tracked;
 * responses for a superseded job id are discarded. Connection failures keep
 * the poll loop alive so a restarted service picks the job back up. */

import { ApiError, ServiceClient } from './api';
import type { ResultDoc, StatusDoc } from './schema';

export interface TrackerEvents {
  onStatus: (status: StatusDoc) => void;
  onResult: (result: ResultDoc) => void;
  onTerminal: (status: StatusDoc) => void;
  onError: (message: string) => void;
}

const TERMINAL = new Set(['done', 'failed', 'cancelled']);

export class JobTracker {
  private activeJob: string | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly client: ServiceClient,
    private readonly events: TrackerEvents,
    private readonly intervalMs = 1000,
  ) {}

  get trackedJob(): string | null {
    return this.activeJob;
  }

  track(jobId: string): void {
    this.stop();
    this.activeJob = jobId;
    void this.poll(jobId);
  }

  stop(): void {
    this.activeJob = null;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  async cancelActive(): Promise<void> {
    if (this.activeJob === null) return;
    try {
      await this.client.cancel(this.activeJob);
    } catch (err) {
      this.events.onError(err instanceof Error ? err.message : String(err));
    }
  }

  private schedule(jobId: string): void {
    this.timer = setTimeout(() => void this.poll(jobId), this.intervalMs);
  }

  private async poll(jobId: string): Promise<void> {
    if (jobId !== this.activeJob) return;
    let status: StatusDoc;
    try {
      status = await this.client.status(jobId);
    } catch (err) {
      if (jobId !== this.activeJob) return;
      this.events.onError(err instanceof Error ? err.message : String(err));
      if (err instanceof ApiError && err.status === 404) {
        this.activeJob = null;
        return;
      }
      this.schedule(jobId); // transient: keep polling
      return;
    }
    if (jobId !== this.activeJob) return; // stale response for a superseded job
    this.events.onStatus(status);
    if (status.state === 'done') {
      try {
        const result = await this.client.result(jobId);
        if (jobId !== this.activeJob) return;
        this.activeJob = null;
        this.events.onResult(result);
      } catch (err) {
        if (jobId !== this.activeJob) return;
        this.activeJob = null;
        this.events.onError(err instanceof Error ? err.message : String(err));
      }
      return;
    }
    if (TERMINAL.has(status.state)) {
      this.activeJob = null;
      this.events.onTerminal(status);
      return;
    }
    this.schedule(jobId);
  }
}
