/** Thin client over the plan service HTTP API. Server-side failures are
 * surfaced verbatim so the UI can show exactly what the service said. */

import type { PlanRequest, ResultDoc, StatusDoc } from './schema';

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number | null = null,
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

async function errorMessage(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (body && typeof body.error === 'string') return body.error;
    return JSON.stringify(body);
  } catch {
    return `${response.status} ${response.statusText}`;
  }
}

export class ServiceClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = fetch,
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/+$/, '') + path;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchFn(this.url(path), init);
    } catch (err) {
      throw new ApiError(`cannot reach service at ${this.baseUrl}: ${String(err)}`, null);
    }
    if (!response.ok) {
      throw new ApiError(await errorMessage(response), response.status);
    }
    return response;
  }

  /** POST /api/plans -> job id. */
  async submit(request: PlanRequest): Promise<string> {
    const response = await this.request('/api/plans', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(request),
    });
    const body = await response.json();
    return body.job_id as string;
  }

  /** GET /api/plans/{id}. */
  async status(jobId: string): Promise<StatusDoc> {
    const response = await this.request(`/api/plans/${jobId}`);
    return (await response.json()) as StatusDoc;
  }

  /** GET /api/plans/{id}/result; only valid once the job is done. */
  async result(jobId: string): Promise<ResultDoc> {
    const response = await this.request(`/api/plans/${jobId}/result`);
    return (await response.json()) as ResultDoc;
  }

  /** DELETE /api/plans/{id}. */
  async cancel(jobId: string): Promise<void> {
    await this.request(`/api/plans/${jobId}`, { method: 'DELETE' });
  }
}
