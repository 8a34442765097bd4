import { describe, expect, it } from 'vitest';

import {
  escapeHtml, renderExecution, renderMatchMatrix, renderQueue,
  renderResultTable,
} from '../src/render.js';
import { QueueItem, VariantView } from '../src/types.js';

const table = {
  columns: ['name', 'age'],
  column_types: ['text', 'integer'],
  rows: [['Ann', 30], ['Cal', null]],
  total_rows: 2,
  truncated: false,
};

describe('result tables', () => {
  it('renders cells and NULLs', () => {
    const html = renderResultTable(table);
    expect(html).toContain('<th>name</th>');
    expect(html).toContain('<td>Ann</td>');
    expect(html).toContain('<td>NULL</td>');
    expect(html).toContain('2 rows');
  });

  it('marks truncation', () => {
    const html = renderResultTable({ ...table, total_rows: 80, truncated: true });
    expect(html).toContain('showing 2 of 80 rows');
  });

  it('renders execution errors verbatim', () => {
    const html = renderExecution({ error: { kind: 'syntax', message: 'no such column: x' } });
    expect(html).toContain('syntax');
    expect(html).toContain('no such column: x');
  });
});

describe('match matrix', () => {
  const variants: VariantView[] = [
    { sql: 'SELECT 1', outcomes: { semantic: false, 'execution:spider': false },
      execution: {} },
    { sql: 'SELECT 2', outcomes: { semantic: false, 'execution:spider': true },
      execution: {} },
  ];

  it('one cell per variant and matcher, straight from the service', () => {
    const html = renderMatchMatrix(variants);
    expect(html.match(/match-fail/g)?.length).toBe(3);
    expect(html.match(/match-pass/g)?.length).toBe(1);
    expect(html).toContain('execution:spider');
  });

  it('empty evidence says so', () => {
    expect(renderMatchMatrix([])).toContain('no detector evidence');
  });
});

describe('queue rendering', () => {
  const items: QueueItem[] = [{
    flag: {
      sample_id: 'art_1', detector: 'voting_disagreement',
      taxonomy_hint: { level1: 'EvaluationData', level2: 'LabelAccuracy', level3: null },
      evidence: { match_matrix: [] },
    },
    reviewed: false,
    verdict: null,
    nl_preview: 'What are the <locations>?',
  }];

  it('shows badge, preview, count and escapes content', () => {
    const html = renderQueue(items, 0, 5);
    expect(html).toContain('count-badge');
    expect(html).toContain('>5<');
    expect(html).toContain('detector-voting_disagreement');
    expect(html).toContain('What are the &lt;locations&gt;?');
    expect(html).toContain('data-sample="art_1"');
    expect(html).toContain('cursor');
  });

  it('reports an empty queue', () => {
    expect(renderQueue([], 0, 0)).toContain('no flags match');
  });
});

describe('escaping', () => {
  it('neutralizes markup', () => {
    expect(escapeHtml('<script>"&')).toBe('&lt;script&gt;&quot;&amp;');
  });
});
