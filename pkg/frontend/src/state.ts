// Queue navigation state: a pure reducer so the keyboard flow is testable.

import { QueueFilter, QueueItem } from './types.js';

export interface QueueState {
  items: QueueItem[];
  total: number;
  cursor: number;          // highlighted row
  openId: string | null;   // sample open in the detail pane
  filter: QueueFilter;
}

export function initialState(): QueueState {
  return { items: [], total: 0, cursor: 0, openId: null, filter: {} };
}

export function withItems(state: QueueState, items: QueueItem[],
                          total: number): QueueState {
  const cursor = Math.min(state.cursor, Math.max(0, items.length - 1));
  return { ...state, items, total, cursor };
}

export function moveCursor(state: QueueState, delta: number): QueueState {
  if (state.items.length === 0) return state;
  const cursor = Math.min(state.items.length - 1, Math.max(0, state.cursor + delta));
  return { ...state, cursor };
}

export function openAtCursor(state: QueueState): QueueState {
  const item = state.items[state.cursor];
  return item ? { ...state, openId: item.flag.sample_id } : state;
}

export function markReviewed(state: QueueState, sampleId: string): QueueState {
  const items = state.items.map((item) =>
    item.flag.sample_id === sampleId ? { ...item, reviewed: true } : item);
  return { ...state, items };
}

/** After submitting: advance to the next unreviewed item, wrapping once. */
export function nextUnreviewed(state: QueueState): QueueState {
  const n = state.items.length;
  for (let step = 1; step <= n; step++) {
    const index = (state.cursor + step) % n;
    const item = state.items[index];
    if (item && !item.reviewed) {
      return { ...state, cursor: index, openId: item.flag.sample_id };
    }
  }
  return { ...state, openId: null };
}
