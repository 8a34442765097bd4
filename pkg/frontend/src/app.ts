// Review-flow controller. Owns the queue state and talks to the service; a
// View implementation (real DOM in main.ts, a recorder in tests) renders
// whatever the controller hands it.

import { TriageApi, ApiError } from './api.js';
import {
  initialState, markReviewed, moveCursor, nextUnreviewed, openAtCursor,
  QueueState, withItems,
} from './state.js';
import { renderDetail, renderExecution, renderQueue } from './render.js';
import { QueueFilter, SampleDetail, VerdictForm } from './types.js';
import { cleanLabels, validateFilter, validateVerdict } from './validate.js';

export interface View {
  showQueue(html: string): void;
  showDetail(html: string): void;
  showQueryResult(html: string): void;
  showError(message: string): void;
  showFormProblems(problems: string[]): void;
  clearError(): void;
}

export class App {
  state: QueueState = initialState();
  detail: SampleDetail | null = null;

  constructor(private readonly api: TriageApi, private readonly view: View) {}

  async loadQueue(filter?: QueueFilter): Promise<void> {
    if (filter !== undefined) {
      const problems = validateFilter(filter);
      if (problems.length) {
        // invalid filters never reach the service
        this.view.showFormProblems(problems);
        return;
      }
      this.state = { ...this.state, filter };
    }
    try {
      const response = await this.api.listFlags(this.state.filter);
      this.state = withItems(this.state, response.items, response.total);
      this.view.clearError();
      this.renderQueue();
    } catch (err) {
      this.view.showError(this.describe(err));
    }
  }

  page(): number {
    return this.state.filter.page ?? 1;
  }

  async turnPage(delta: number): Promise<void> {
    const pageSize = this.state.filter.page_size ?? 50;
    const lastPage = Math.max(1, Math.ceil(this.state.total / pageSize));
    const page = Math.min(lastPage, Math.max(1, this.page() + delta));
    if (page === this.page()) return;
    await this.loadQueue({ ...this.state.filter, page });
  }

  renderQueue(): void {
    this.view.showQueue(
      renderQueue(this.state.items, this.state.cursor, this.state.total));
  }

  async open(sampleId: string): Promise<void> {
    try {
      this.detail = await this.api.sampleDetail(sampleId);
      this.state = { ...this.state, openId: sampleId };
      this.view.clearError();
      this.view.showDetail(renderDetail(this.detail));
    } catch (err) {
      this.view.showError(this.describe(err));
    }
  }

  async onKey(key: string): Promise<void> {
    if (key === 'j') {
      this.state = moveCursor(this.state, 1);
      this.renderQueue();
    } else if (key === 'k') {
      this.state = moveCursor(this.state, -1);
      this.renderQueue();
    } else if (key === 'Enter') {
      this.state = openAtCursor(this.state);
      if (this.state.openId) await this.open(this.state.openId);
    }
  }

  async submitVerdict(form: VerdictForm): Promise<boolean> {
    if (!this.state.openId) {
      this.view.showFormProblems(['open a sample before submitting']);
      return false;
    }
    const cleaned = { ...form, replacement_labels: cleanLabels(form.replacement_labels) };
    const problems = validateVerdict(cleaned);
    if (problems.length) {
      // mirrors the server invariants; nothing is sent
      this.view.showFormProblems(problems);
      return false;
    }
    try {
      await this.api.postVerdict(this.state.openId, cleaned);
    } catch (err) {
      // form state stays with the caller; surface the server message inline
      this.view.showFormProblems([this.describe(err)]);
      return false;
    }
    this.state = markReviewed(this.state, this.state.openId);
    this.state = nextUnreviewed(this.state);
    this.renderQueue();
    this.view.showFormProblems([]);
    if (this.state.openId) {
      await this.open(this.state.openId);
    } else {
      this.view.showDetail('<div class="note">queue done — nothing unreviewed</div>');
    }
    return true;
  }

  async runQuery(sql: string): Promise<void> {
    if (!this.state.openId) {
      this.view.showQueryResult('<div class="note">open a sample first</div>');
      return;
    }
    try {
      const view = await this.api.runQuery(this.state.openId, sql);
      this.view.showQueryResult(renderExecution(view));
    } catch (err) {
      this.view.showQueryResult(
        `<div class="exec-error">${this.describe(err)}</div>`);
    }
  }

  private describe(err: unknown): string {
    if (err instanceof ApiError) {
      return err.status === 0 ? `${err.message} — retry when the service is back`
        : `service error ${err.status}: ${err.message}`;
    }
    return String(err);
  }
}
