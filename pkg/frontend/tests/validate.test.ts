import { describe, expect, it } from 'vitest';

import { cleanLabels, validateFilter, validateVerdict } from '../src/validate.js';

const base = { decision: 'clean', replacement_labels: [], notes: '', reviewer: 'r' };

describe('verdict validation mirrors the server invariants', () => {
  it('accepts a clean verdict without labels', () => {
    expect(validateVerdict({ ...base })).toEqual([]);
  });

  it('blocks incomplete_label without added variants', () => {
    const problems = validateVerdict({ ...base, decision: 'incomplete_label' });
    expect(problems.some((p) => p.includes('incomplete_label'))).toBe(true);
  });

  it('blocks clean verdicts that carry labels', () => {
    const problems = validateVerdict({ ...base, replacement_labels: ['SELECT 1'] });
    expect(problems.length).toBe(1);
  });

  it('whitespace-only labels do not count', () => {
    const problems = validateVerdict({
      ...base, decision: 'incomplete_label', replacement_labels: ['  ', ''],
    });
    expect(problems.length).toBe(1);
  });

  it('rejects unknown decisions and empty reviewers', () => {
    expect(validateVerdict({ ...base, decision: 'maybe' }).length).toBe(1);
    expect(validateVerdict({ ...base, reviewer: ' ' }).length).toBe(1);
  });
});

describe('filter validation', () => {
  it('accepts known detectors', () => {
    expect(validateFilter({ detector: 'empty_result' })).toEqual([]);
    expect(validateFilter({})).toEqual([]);
  });

  it('rejects unknown detectors and bad pages', () => {
    expect(validateFilter({ detector: 'nonesuch' }).length).toBe(1);
    expect(validateFilter({ page: 0 }).length).toBe(1);
  });
});

describe('label cleanup', () => {
  it('trims and drops empties', () => {
    expect(cleanLabels([' SELECT 1 ', '', '\n'])).toEqual(['SELECT 1']);
  });
});
