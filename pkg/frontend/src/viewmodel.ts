/**
 * View-model for a single review: what the focused item looks like and what
 * the reviewer has edited so far. Pure data + invariants, no DOM.
 */

import type {
  CorrectedFlags,
  LabelValue,
  Prediction,
  ReviewItem,
  Span,
} from './types.js';

export interface HighlightSegments {
  before: string;
  word: string;
  after: string;
}

/**
 * Split requirement text around the finding span.
 *
 * Throws when the span does not fit the text — a desynced highlight must
 * fail loudly rather than mark the wrong word.
 */
export function splitHighlight(text: string, span: Span): HighlightSegments {
  if (
    !Number.isInteger(span.start) ||
    !Number.isInteger(span.end) ||
    span.start < 0 ||
    span.end <= span.start ||
    span.end > text.length
  ) {
    throw new RangeError(
      `span [${span.start}, ${span.end}) does not fit text of length ${text.length}`,
    );
  }
  return {
    before: text.slice(0, span.start),
    word: text.slice(span.start, span.end),
    after: text.slice(span.end),
  };
}

export function flipLabel(label: LabelValue): LabelValue {
  return label === 'defect' ? 'not_defect' : 'defect';
}

export function labelCaption(label: LabelValue): string {
  return label === 'defect' ? 'Defect' : 'Not a defect';
}

/**
 * Editable state for the focused item.
 *
 * Starts at the served prediction; `edits` reports what diverged, and
 * `canSubmit` enforces both invariants: reasoning must be non-empty and a
 * submitted item can never be submitted twice.
 */
export class ReviewFormState {
  readonly item: ReviewItem;
  readonly served: Prediction;
  readonly highlight: HighlightSegments;
  label: LabelValue;
  reasoning: string;
  submitted = false;

  constructor(item: ReviewItem) {
    if (!item.prediction) {
      throw new Error(`item ${item.item_id} was served without a prediction`);
    }
    this.item = item;
    this.served = item.prediction;
    this.highlight = splitHighlight(item.text, item.span);
    this.label = item.prediction.label;
    this.reasoning = item.prediction.reasoning;
  }

  get canSubmit(): boolean {
    return !this.submitted && this.reasoning.trim().length > 0;
  }

  /** Which fields the reviewer changed relative to the served prediction. */
  get edits(): CorrectedFlags {
    return {
      label: this.label !== this.served.label,
      reasoning: this.reasoning !== this.served.reasoning,
    };
  }

  get isAccept(): boolean {
    const edits = this.edits;
    return !edits.label && !edits.reasoning;
  }

  flip(): void {
    this.label = flipLabel(this.label);
  }

  /** Reset edits back to the served prediction. */
  revert(): void {
    this.label = this.served.label;
    this.reasoning = this.served.reasoning;
  }

  payload(): { final_label: LabelValue; final_reasoning: string } {
    return { final_label: this.label, final_reasoning: this.reasoning };
  }
}
