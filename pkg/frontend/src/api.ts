// Thin typed client over the triage service HTTP API.

import {
  ExecutionView, ExportResult, FlagListResponse, QueueFilter, SampleDetail,
  Verdict, VerdictForm,
} from './types.js';

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class TriageApi {
  constructor(
    private readonly base: string = '',
    private readonly fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  queueUrl(filter: QueueFilter): string {
    const params = new URLSearchParams();
    if (filter.detector !== undefined) params.set('detector', filter.detector);
    if (filter.taxonomy !== undefined) params.set('taxonomy', filter.taxonomy);
    if (filter.reviewed !== undefined) params.set('reviewed', String(filter.reviewed));
    if (filter.page !== undefined) params.set('page', String(filter.page));
    if (filter.page_size !== undefined) params.set('page_size', String(filter.page_size));
    const query = params.toString();
    return `${this.base}/api/flags${query ? '?' + query : ''}`;
  }

  private async request<T>(url: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(url, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    const body = await response.text();
    if (!response.ok) {
      let detail = body;
      try {
        detail = JSON.parse(body).detail ?? body;
      } catch {
        // non-JSON error body: report as is
      }
      throw new ApiError(response.status, String(detail));
    }
    return JSON.parse(body) as T;
  }

  listFlags(filter: QueueFilter = {}): Promise<FlagListResponse> {
    return this.request<FlagListResponse>(this.queueUrl(filter));
  }

  sampleDetail(sampleId: string): Promise<SampleDetail> {
    return this.request<SampleDetail>(
      `${this.base}/api/samples/${encodeURIComponent(sampleId)}`);
  }

  postVerdict(sampleId: string, form: VerdictForm):
      Promise<{ verdict_id: number; verdict: Verdict }> {
    return this.request(`${this.base}/api/samples/${encodeURIComponent(sampleId)}/verdicts`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json', 'X-Reviewer': form.reviewer },
      body: JSON.stringify({
        decision: form.decision,
        taxonomy: form.taxonomy ?? null,
        replacement_labels: form.replacement_labels,
        notes: form.notes,
        reviewer: form.reviewer,
      }),
    });
  }

  runQuery(sampleId: string, sql: string): Promise<ExecutionView> {
    return this.request(`${this.base}/api/samples/${encodeURIComponent(sampleId)}/query`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ sql }),
    });
  }

  exportDatasets(outDir?: string): Promise<ExportResult> {
    return this.request(`${this.base}/api/export`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(outDir ? { out_dir: outDir } : {}),
    });
  }
}
