// Payload shapes of the triage service API. The UI never derives taxonomy or
// match outcomes itself; these types mirror the server responses verbatim.

export interface TaxonomyCategory {
  level1: string;
  level2: string;
  level3: string | null;
}

export interface NoiseFlag {
  sample_id: string;
  detector: string;
  taxonomy_hint: TaxonomyCategory;
  evidence: Record<string, unknown>;
}

export interface Verdict {
  sample_id: string;
  decision: string;
  taxonomy: TaxonomyCategory | null;
  replacement_labels: string[];
  notes: string;
  reviewer: string;
  timestamp: number;
}

export interface QueueItem {
  flag: NoiseFlag;
  reviewed: boolean;
  verdict: Verdict | null;
  nl_preview: string;
}

export interface FlagListResponse {
  items: QueueItem[];
  total: number;
  page: number;
  page_size: number;
}

export interface ResultTable {
  columns: string[];
  column_types: string[];
  rows: unknown[][];
  total_rows: number;
  truncated: boolean;
}

export interface ExecutionView {
  result?: ResultTable;
  error?: { kind: string; message: string };
}

export interface VariantView {
  sql: string;
  outcomes: Record<string, boolean>;
  execution: ExecutionView;
}

export interface SampleDetail {
  sample_id: string;
  db_id: string;
  nl: string;
  schema_text: string;
  gt_sql: string;
  gt_variants: string[];
  gt_execution: ExecutionView;
  variants: VariantView[];
  flags: NoiseFlag[];
  verdicts: Verdict[];
}

export interface QueueFilter {
  detector?: string;
  taxonomy?: string;
  reviewed?: boolean;
  page?: number;
  page_size?: number;
}

export interface VerdictForm {
  decision: string;
  taxonomy?: TaxonomyCategory | null;
  replacement_labels: string[];
  notes: string;
  reviewer: string;
}

export interface ExportResult {
  cleaned: string;
  multi_variant: string;
  exclusions: string;
  conflicts: { sample_id: string; decisions: Record<string, string> }[];
}

export const DECISIONS = [
  'clean',
  'inaccurate_label',
  'incomplete_label',
  'inaccurate_feature',
  'incomplete_feature',
] as const;

export const DETECTORS = [
  'empty_result',
  'topk_template',
  'voting_disagreement',
] as const;
