// Browser bootstrap: wires the controller to the page.

import { TriageApi } from './api.js';
import { App, View } from './app.js';
import { DECISIONS, VerdictForm } from './types.js';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function readForm(): VerdictForm {
  const decision = (document.querySelector('input[name=decision]:checked') as
    HTMLInputElement | null)?.value ?? '';
  const labels = el<HTMLTextAreaElement>('replacement-labels').value
    .split('\n---\n');
  return {
    decision,
    replacement_labels: labels,
    notes: el<HTMLTextAreaElement>('notes').value,
    reviewer: el<HTMLInputElement>('reviewer').value || 'anonymous',
  };
}

function domView(): View {
  return {
    showQueue: (html) => { el('queue').innerHTML = html; },
    showDetail: (html) => { el('detail').innerHTML = html; },
    showQueryResult: (html) => { el('query-result').innerHTML = html; },
    showError: (message) => {
      const banner = el('error-banner');
      banner.textContent = message;
      banner.classList.remove('hidden');
    },
    clearError: () => el('error-banner').classList.add('hidden'),
    showFormProblems: (problems) => {
      el('form-problems').innerHTML =
        problems.map((p) => `<li>${p}</li>`).join('');
    },
  };
}

function bind(app: App): void {
  el('queue').addEventListener('click', (event) => {
    const row = (event.target as HTMLElement).closest('[data-sample]');
    if (row) void app.open(row.getAttribute('data-sample')!);
  });
  el<HTMLSelectElement>('filter-detector').addEventListener('change', () => {
    const detector = el<HTMLSelectElement>('filter-detector').value || undefined;
    void app.loadQueue({ ...app.state.filter, detector });
  });
  el<HTMLSelectElement>('filter-reviewed').addEventListener('change', () => {
    const raw = el<HTMLSelectElement>('filter-reviewed').value;
    const reviewed = raw === '' ? undefined : raw === 'true';
    void app.loadQueue({ ...app.state.filter, reviewed });
  });
  el('submit-verdict').addEventListener('click', () => {
    void app.submitVerdict(readForm());
  });
  el('run-query').addEventListener('click', () => {
    void app.runQuery(el<HTMLTextAreaElement>('adhoc-sql').value);
  });
  el('retry').addEventListener('click', () => void app.loadQueue());
  const paged = async (delta: number) => {
    await app.turnPage(delta);
    el('page-label').textContent = `page ${app.page()}`;
  };
  el('page-prev').addEventListener('click', () => void paged(-1));
  el('page-next').addEventListener('click', () => void paged(1));
  document.addEventListener('keydown', (event) => {
    const target = event.target as HTMLElement;
    if (target.tagName === 'TEXTAREA' || target.tagName === 'INPUT') return;
    if (event.key >= '1' && event.key <= '5') {
      const decision = DECISIONS[Number(event.key) - 1];
      const radio = document.querySelector(
        `input[name=decision][value=${decision}]`) as HTMLInputElement | null;
      if (radio) radio.checked = true;
      return;
    }
    void app.onKey(event.key);
  });
}

const app = new App(new TriageApi(''), domView());
bind(app);
void app.loadQueue({});

// handy for exploratory debugging from the console
(window as unknown as { triage: App }).triage = app;
