// Client-side mirror of the server's verdict invariants, so a doomed submit
// never leaves the browser.

import { DECISIONS, QueueFilter, DETECTORS, VerdictForm } from './types.js';

export function validateVerdict(form: VerdictForm): string[] {
  const problems: string[] = [];
  if (!(DECISIONS as readonly string[]).includes(form.decision)) {
    problems.push(`unknown decision ${JSON.stringify(form.decision)}`);
  }
  const labels = form.replacement_labels.map((l) => l.trim()).filter(Boolean);
  if (form.decision === 'incomplete_label' && labels.length === 0) {
    problems.push('incomplete_label needs at least one added label variant');
  }
  if (form.decision === 'clean' && labels.length > 0) {
    problems.push('clean verdicts carry no replacement labels');
  }
  if (!form.reviewer.trim()) {
    problems.push('reviewer must not be empty');
  }
  return problems;
}

export function cleanLabels(labels: string[]): string[] {
  return labels.map((l) => l.trim()).filter(Boolean);
}

export function validateFilter(filter: QueueFilter): string[] {
  const problems: string[] = [];
  if (filter.detector !== undefined &&
      !(DETECTORS as readonly string[]).includes(filter.detector)) {
    problems.push(`unknown detector ${JSON.stringify(filter.detector)}`);
  }
  if (filter.page !== undefined && filter.page < 1) {
    problems.push('page must be positive');
  }
  return problems;
}
