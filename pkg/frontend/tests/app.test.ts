import { beforeEach, describe, expect, it } from 'vitest';

import { TriageApi } from '../src/api.js';
import { App, View } from '../src/app.js';
import { FlagListResponse, SampleDetail } from '../src/types.js';

function response(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status, headers: { 'Content-Type': 'application/json' },
  });
}

const queue: FlagListResponse = {
  items: [
    { flag: { sample_id: 'art_1', detector: 'voting_disagreement',
              taxonomy_hint: { level1: 'EvaluationData', level2: 'LabelAccuracy',
                               level3: null },
              evidence: { match_matrix: [] } },
      reviewed: false, verdict: null, nl_preview: 'locations?' },
    { flag: { sample_id: 's2', detector: 'empty_result',
              taxonomy_hint: { level1: 'EvaluationData', level2: 'LabelAccuracy',
                               level3: null },
              evidence: { gt_row_count: 0 } },
      reviewed: false, verdict: null, nl_preview: 'second' },
  ],
  total: 2, page: 1, page_size: 50,
};

const detail: SampleDetail = {
  sample_id: 'art_1', db_id: 'art_db', nl: 'locations?',
  schema_text: 'CREATE TABLE paintings (...)',
  gt_sql: 'SELECT 1 INTERSECT SELECT 2',
  gt_variants: [],
  gt_execution: { result: { columns: ['x'], column_types: ['integer'],
                            rows: [], total_rows: 0, truncated: false } },
  variants: [{ sql: 'SELECT 1 UNION SELECT 2',
               outcomes: { semantic: false, 'execution:spider': false },
               execution: { result: { columns: ['x'], column_types: ['integer'],
                                      rows: [[1], [2]], total_rows: 2,
                                      truncated: false } } }],
  flags: [], verdicts: [],
};

class Recorder implements View {
  queueHtml = '';
  detailHtml = '';
  queryHtml = '';
  errors: string[] = [];
  problems: string[] = [];
  showQueue(html: string) { this.queueHtml = html; }
  showDetail(html: string) { this.detailHtml = html; }
  showQueryResult(html: string) { this.queryHtml = html; }
  showError(message: string) { this.errors.push(message); }
  showFormProblems(problems: string[]) { this.problems = problems; }
  clearError() {}
}

describe('review controller', () => {
  let requests: { url: string; init?: RequestInit }[];
  let view: Recorder;
  let app: App;

  beforeEach(() => {
    requests = [];
    view = new Recorder();
    const fetchImpl = async (url: string, init?: RequestInit) => {
      requests.push({ url, init });
      if (url.includes('/api/flags')) return response(queue);
      if (url.endsWith('/verdicts') && init?.method === 'POST') {
        return response({ verdict_id: 1, verdict: {} });
      }
      if (url.includes('/api/samples/art_1/query')) {
        return response({ result: { columns: ['c'], column_types: ['integer'],
                                    rows: [[3]], total_rows: 1, truncated: false } });
      }
      if (url.includes('/api/samples/')) return response(detail);
      return response({ detail: 'not found' }, 404);
    };
    app = new App(new TriageApi('', fetchImpl), view);
  });

  it('loads the queue and renders rows', async () => {
    await app.loadQueue({});
    expect(view.queueHtml).toContain('art_1');
    expect(app.state.items.length).toBe(2);
  });

  it('invalid filters never reach the service', async () => {
    await app.loadQueue({ detector: 'bogus' });
    expect(requests.length).toBe(0);
    expect(view.problems[0]).toContain('bogus');
  });

  it('keyboard flow: j moves, enter opens the highlighted sample', async () => {
    await app.loadQueue({});
    await app.onKey('j');
    await app.onKey('Enter');
    expect(app.state.openId).toBe('s2');
  });

  it('detail renders the service match matrix untouched (all false)', async () => {
    await app.loadQueue({});
    await app.open('art_1');
    expect(view.detailHtml).toContain('match-fail');
    expect(view.detailHtml).not.toContain('match-pass');
    expect(view.detailHtml).toContain('0 rows');
  });

  it('blocked verdicts send nothing', async () => {
    await app.loadQueue({});
    await app.open('art_1');
    const before = requests.length;
    const ok = await app.submitVerdict({
      decision: 'incomplete_label', replacement_labels: [], notes: '',
      reviewer: 'alice',
    });
    expect(ok).toBe(false);
    expect(requests.length).toBe(before);
  });

  it('successful submit marks the row reviewed and advances', async () => {
    await app.loadQueue({});
    await app.open('art_1');
    const ok = await app.submitVerdict({
      decision: 'incomplete_label',
      replacement_labels: ['SELECT 1 UNION SELECT 2'],
      notes: 'union reading', reviewer: 'alice',
    });
    expect(ok).toBe(true);
    const first = app.state.items[0]!;
    expect(first.reviewed).toBe(true);
    expect(app.state.openId).toBe('s2');
    const post = requests.find((r) => r.init?.method === 'POST');
    expect(post).toBeDefined();
    expect(JSON.parse(String(post!.init!.body)).decision).toBe('incomplete_label');
  });

  it('ad-hoc queries render through the service response', async () => {
    await app.loadQueue({});
    await app.open('art_1');
    await app.runQuery('SELECT count(*) FROM paintings');
    expect(view.queryHtml).toContain('<td>3</td>');
  });

  it('unreachable service surfaces a retry banner', async () => {
    const down = new App(new TriageApi('', async () => {
      throw new Error('ECONNREFUSED');
    }), view);
    await down.loadQueue({});
    expect(view.errors[0]).toContain('retry');
  });
});

describe('pagination', () => {
  it('turnPage clamps to valid pages and refetches', async () => {
    const urls: string[] = [];
    const makePage = (page: number) => ({
      items: [{ flag: { sample_id: `p${page}`, detector: 'empty_result',
                        taxonomy_hint: { level1: 'EvaluationData',
                                         level2: 'LabelAccuracy', level3: null },
                        evidence: { gt_row_count: 0 } },
                reviewed: false, verdict: null, nl_preview: 'x' }],
      total: 120, page, page_size: 50,
    });
    const view = new Recorder();
    const app = new App(new TriageApi('', async (url: string) => {
      urls.push(url);
      const page = Number(new URL(url, 'http://x').searchParams.get('page') ?? '1');
      return response(makePage(page));
    }), view);
    await app.loadQueue({});
    expect(app.page()).toBe(1);
    await app.turnPage(-1);           // clamped at 1, no refetch
    expect(urls.length).toBe(1);
    await app.turnPage(1);
    expect(app.page()).toBe(2);
    expect(urls[1]).toContain('page=2');
    await app.turnPage(5);            // clamped at the last page (3)
    expect(app.page()).toBe(3);
  });
});
