/**
 * Thin typed client for the review service.
 *
 * Every mutation goes through here; the UI never computes labels or
 * reasoning itself. Non-2xx responses become ApiError with the server's
 * {code, message} body so the view can render them inline.
 */

import type {
  ApiErrorBody,
  IngestResponse,
  LabelValue,
  RequirementInput,
  ReviewItem,
  ServiceStats,
  ValidationResult,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = 'ApiError';
    this.status = status;
    this.code = code;
  }
}

async function toApiError(response: Response): Promise<ApiError> {
  let body: Partial<ApiErrorBody> = {};
  try {
    body = (await response.json()) as Partial<ApiErrorBody>;
  } catch {
    // non-JSON error body; keep the status-only error
  }
  return new ApiError(
    response.status,
    body.code ?? 'http_error',
    body.message ?? `HTTP ${response.status}`,
  );
}

export class ReviewApiClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok && response.status !== 204) {
      throw await toApiError(response);
    }
    return response;
  }

  private async requestJson<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.request(path, init);
    return (await response.json()) as T;
  }

  async ingest(requirements: RequirementInput[]): Promise<IngestResponse> {
    return this.requestJson<IngestResponse>('/requirements', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ requirements }),
    });
  }

  /** Oldest pending item with its prediction, or null when the queue is empty. */
  async nextItem(): Promise<ReviewItem | null> {
    const response = await this.request('/items/next');
    if (response.status === 204) {
      return null;
    }
    return (await response.json()) as ReviewItem;
  }

  async getItem(itemId: string): Promise<ReviewItem> {
    return this.requestJson<ReviewItem>(`/items/${encodeURIComponent(itemId)}`);
  }

  async validate(
    itemId: string,
    finalLabel: LabelValue,
    finalReasoning: string,
  ): Promise<ValidationResult> {
    return this.requestJson<ValidationResult>(
      `/items/${encodeURIComponent(itemId)}/validation`,
      {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({
          final_label: finalLabel,
          final_reasoning: finalReasoning,
        }),
      },
    );
  }

  async stats(): Promise<ServiceStats> {
    return this.requestJson<ServiceStats>('/stats');
  }
}
