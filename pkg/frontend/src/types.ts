/**
 * Wire types for the review service JSON API.
 *
 * These mirror the server's response shapes exactly; the view layer never
 * invents fields the server did not send.
 */

export type LabelValue = 'defect' | 'not_defect';

export interface Span {
  start: number;
  end: number;
}

export interface Prediction {
  label: LabelValue;
  reasoning: string;
}

/** One retrieved example shown as provenance for a prediction. */
export interface ShotSummary {
  example_id: string;
  similarity: number;
  label: LabelValue;
  text: string;
  weak_word: string;
}

export interface ReviewItem {
  item_id: string;
  status: 'pending' | 'validated';
  requirement_id: string;
  text: string;
  weak_word: string;
  span: Span;
  marked_text: string;
  prediction?: Prediction;
  shots_used?: ShotSummary[];
  k_used?: number;
  final_label?: LabelValue;
  final_reasoning?: string;
  corrected?: CorrectedFlags;
  source?: string;
}

export interface CorrectedFlags {
  label: boolean;
  reasoning: boolean;
}

export interface PoolStats {
  total: number;
  per_label: Record<LabelValue, number>;
  dim: number | null;
}

export interface ServiceStats {
  pending: number;
  validated: number;
  correction_rate: number;
  pool: PoolStats;
}

export interface ValidationResult {
  pool_size_after: number;
  source: 'llm_accepted' | 'user_corrected';
  corrected: CorrectedFlags;
}

export interface IngestResponse {
  ingested: number;
  items: ReviewItem[];
}

export interface RequirementInput {
  id: string;
  text: string;
}

/** Error body the service sends for every non-2xx response. */
export interface ApiErrorBody {
  code: string;
  message: string;
}
