// Pure HTML-string renderers. Every pass/fail cell comes straight from a
// service response; nothing is recomputed client-side.

import {
  ExecutionView, QueueItem, ResultTable, SampleDetail, VariantView,
} from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;');
}

function cellText(cell: unknown): string {
  if (cell === null || cell === undefined) return 'NULL';
  return String(cell);
}

export function renderResultTable(table: ResultTable): string {
  const head = table.columns.map((c) => `<th>${escapeHtml(c)}</th>`).join('');
  const body = table.rows.map((row) =>
    `<tr>${row.map((c) => `<td>${escapeHtml(cellText(c))}</td>`).join('')}</tr>`,
  ).join('');
  const note = table.truncated
    ? `<div class="note">showing ${table.rows.length} of ${table.total_rows} rows</div>`
    : `<div class="note">${table.total_rows} row${table.total_rows === 1 ? '' : 's'}</div>`;
  return `<table class="result"><thead><tr>${head}</tr></thead>` +
    `<tbody>${body}</tbody></table>${note}`;
}

export function renderExecution(view: ExecutionView): string {
  if (view.error) {
    return `<div class="exec-error">${escapeHtml(view.error.kind)}: ` +
      `${escapeHtml(view.error.message)}</div>`;
  }
  if (view.result) {
    return renderResultTable(view.result);
  }
  return '<div class="note">not executed</div>';
}

export function renderQueue(items: QueueItem[], cursor: number,
                            total: number): string {
  if (items.length === 0) {
    return '<div class="empty">no flags match the current filter</div>';
  }
  const rows = items.map((item, index) => {
    const hint = item.flag.taxonomy_hint;
    const taxonomy = [hint.level1, hint.level2, hint.level3]
      .filter(Boolean).join('/');
    const classes = ['queue-row'];
    if (index === cursor) classes.push('cursor');
    if (item.reviewed) classes.push('reviewed');
    return `<div class="${classes.join(' ')}" data-sample="${escapeHtml(item.flag.sample_id)}">` +
      `<span class="badge detector-${escapeHtml(item.flag.detector)}">` +
      `${escapeHtml(item.flag.detector)}</span>` +
      `<span class="sample-id">${escapeHtml(item.flag.sample_id)}</span>` +
      `<span class="preview">${escapeHtml(item.nl_preview)}</span>` +
      `<span class="taxonomy">${escapeHtml(taxonomy)}</span>` +
      `<span class="status">${item.reviewed ? 'reviewed' : 'open'}</span>` +
      `</div>`;
  }).join('');
  return `<div class="count-badge">${total}</div>${rows}`;
}

export function renderMatchMatrix(variants: VariantView[]): string {
  if (variants.length === 0) {
    return '<div class="note">no detector evidence</div>';
  }
  const matchers = Object.keys(variants[0]!.outcomes);
  const head = ['variant', ...matchers].map((m) => `<th>${escapeHtml(m)}</th>`).join('');
  const rows = variants.map((v, i) => {
    const cells = matchers.map((m) => {
      const matched = v.outcomes[m];
      return `<td class="${matched ? 'match-pass' : 'match-fail'}">` +
        `${matched ? 'match' : 'no match'}</td>`;
    }).join('');
    return `<tr><td>variant ${i + 1}</td>${cells}</tr>`;
  }).join('');
  return `<table class="matrix"><thead><tr>${head}</tr></thead>` +
    `<tbody>${rows}</tbody></table>`;
}

export function renderDetail(detail: SampleDetail): string {
  const variants = detail.variants.map((v, i) =>
    `<section class="variant">` +
    `<h4>variant ${i + 1}</h4>` +
    `<pre class="sql">${escapeHtml(v.sql)}</pre>` +
    renderExecution(v.execution) +
    `</section>`,
  ).join('');
  const evidence = detail.flags.length
    ? detail.flags.map((f) =>
        `<details><summary>${escapeHtml(f.detector)}</summary>` +
        `<pre class="evidence">${escapeHtml(JSON.stringify(f.evidence, null, 2))}</pre>` +
        `</details>`).join('')
    : '<div class="note">no detector evidence</div>';
  return `
  <header><h2>${escapeHtml(detail.sample_id)}</h2>
    <span class="db">${escapeHtml(detail.db_id)}</span></header>
  <p class="nl">${escapeHtml(detail.nl)}</p>
  <h3>schema</h3>
  <pre class="schema">${escapeHtml(detail.schema_text)}</pre>
  <h3>ground truth</h3>
  <pre class="sql">${escapeHtml(detail.gt_sql)}</pre>
  ${renderExecution(detail.gt_execution)}
  <h3>match matrix</h3>
  ${renderMatchMatrix(detail.variants)}
  <h3>variants</h3>
  <div class="variants">${variants || '<div class="note">none proposed</div>'}</div>
  <h3>flag evidence</h3>
  ${evidence}`;
}
