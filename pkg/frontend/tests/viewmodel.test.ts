import { describe, expect, it } from 'vitest';

import type { ReviewItem } from '../src/types.js';
import {
  flipLabel,
  labelCaption,
  ReviewFormState,
  splitHighlight,
} from '../src/viewmodel.js';

function pendingItem(overrides: Partial<ReviewItem> = {}): ReviewItem {
  return {
    item_id: 'item-1',
    status: 'pending',
    requirement_id: 'REQ-1',
    text: 'The system shall log certain events.',
    weak_word: 'certain',
    span: { start: 21, end: 28 },
    marked_text: 'The system shall log «certain» events.',
    prediction: { label: 'defect', reasoning: 'The event set is unbounded.' },
    shots_used: [],
    k_used: 0,
    ...overrides,
  };
}

describe('splitHighlight', () => {
  it('splits text around the span', () => {
    const segments = splitHighlight('log certain events', { start: 4, end: 11 });
    expect(segments).toEqual({ before: 'log ', word: 'certain', after: ' events' });
  });

  it('reassembles to the original text', () => {
    const text = pendingItem().text;
    const { before, word, after } = splitHighlight(text, pendingItem().span);
    expect(before + word + after).toBe(text);
    expect(word).toBe('certain');
  });

  it('rejects spans that do not fit', () => {
    expect(() => splitHighlight('short', { start: 2, end: 9 })).toThrow(RangeError);
    expect(() => splitHighlight('short', { start: -1, end: 3 })).toThrow(RangeError);
    expect(() => splitHighlight('short', { start: 3, end: 3 })).toThrow(RangeError);
  });
});

describe('label helpers', () => {
  it('flip is an involution', () => {
    expect(flipLabel('defect')).toBe('not_defect');
    expect(flipLabel('not_defect')).toBe('defect');
    expect(flipLabel(flipLabel('defect'))).toBe('defect');
  });

  it('captions both labels', () => {
    expect(labelCaption('defect')).toBe('Defect');
    expect(labelCaption('not_defect')).toBe('Not a defect');
  });
});

describe('ReviewFormState', () => {
  it('starts at the served prediction', () => {
    const form = new ReviewFormState(pendingItem());
    expect(form.label).toBe('defect');
    expect(form.reasoning).toBe('The event set is unbounded.');
    expect(form.isAccept).toBe(true);
    expect(form.edits).toEqual({ label: false, reasoning: false });
  });

  it('requires a prediction', () => {
    expect(() => new ReviewFormState(pendingItem({ prediction: undefined }))).toThrow(
      /without a prediction/,
    );
  });

  it('tracks label and reasoning edits independently', () => {
    const form = new ReviewFormState(pendingItem());
    form.flip();
    expect(form.edits).toEqual({ label: true, reasoning: false });
    form.reasoning = 'Actually the events are enumerated in appendix B.';
    expect(form.edits).toEqual({ label: true, reasoning: true });
    form.revert();
    expect(form.isAccept).toBe(true);
  });

  it('blocks submit on empty reasoning', () => {
    const form = new ReviewFormState(pendingItem());
    expect(form.canSubmit).toBe(true);
    form.reasoning = '   ';
    expect(form.canSubmit).toBe(false);
    form.reasoning = 'ok';
    expect(form.canSubmit).toBe(true);
  });

  it('blocks submit after submission', () => {
    const form = new ReviewFormState(pendingItem());
    form.submitted = true;
    expect(form.canSubmit).toBe(false);
  });

  it('builds the validation payload from current edits', () => {
    const form = new ReviewFormState(pendingItem());
    form.flip();
    form.reasoning = 'Scoped by section 4.';
    expect(form.payload()).toEqual({
      final_label: 'not_defect',
      final_reasoning: 'Scoped by section 4.',
    });
  });
});
