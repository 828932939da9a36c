/**
 * Client for the local scan service. The dashboard never talks to relying
 * parties or identity providers directly; every request goes through these
 * same-origin endpoints.
 */

import type { ApiErrorJson, FocusedReportJson, ScanReportJson } from './types.js';

export class ApiRequestError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(error: ApiErrorJson, status: number) {
    super(error.message);
    this.code = error.code;
    this.status = status;
  }
}

type FetchLike = typeof fetch;

async function requestJson<T>(
  fetchImpl: FetchLike,
  input: string,
  init?: RequestInit,
): Promise<T> {
  const response = init ? await fetchImpl(input, init) : await fetchImpl(input);
  const text = await response.text();
  if (!response.ok) {
    let error: ApiErrorJson = { code: 'internal', message: text || `HTTP ${response.status}` };
    try {
      const parsed = JSON.parse(text) as Partial<ApiErrorJson>;
      if (typeof parsed.code === 'string' && typeof parsed.message === 'string') {
        error = { code: parsed.code, message: parsed.message };
      }
    } catch {
      // keep the synthesized error when the body is not JSON
    }
    throw new ApiRequestError(error, response.status);
  }
  return JSON.parse(text) as T;
}

export interface ScanServiceClient {
  scanRp(url: string): Promise<ScanReportJson>;
  focusedScan(url: string): Promise<FocusedReportJson>;
  optOut(url: string, scopes: string[]): Promise<string>;
}

export function createClient(fetchImpl: FetchLike = fetch): ScanServiceClient {
  return {
    scanRp(url: string): Promise<ScanReportJson> {
      return requestJson(fetchImpl, `/api/scan?url=${encodeURIComponent(url)}`);
    },

    focusedScan(url: string): Promise<FocusedReportJson> {
      return requestJson(fetchImpl, `/api/focused?url=${encodeURIComponent(url)}`);
    },

    async optOut(url: string, scopes: string[]): Promise<string> {
      const data = await requestJson<{ rewritten_url: string }>(fetchImpl, '/api/optout', {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ url, scopes }),
      });
      // Byte-for-byte: the preview URL is displayed exactly as returned.
      return data.rewritten_url;
    },
  };
}
