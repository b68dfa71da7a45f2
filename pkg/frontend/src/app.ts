/**
 * Single-item review screen.
 *
 * One finding is in focus at a time: the requirement with its weak word
 * highlighted, the model's reasoning and label (both editable), and the
 * retrieved examples behind the prediction. Accept submits the prediction
 * unchanged; Submit sends the edited fields. Keyboard: a = accept,
 * f = flip label, r = focus reasoning.
 */

import { ApiError, ReviewApiClient } from './api.js';
import type { ReviewItem, ServiceStats, ShotSummary } from './types.js';
import { labelCaption, ReviewFormState } from './viewmodel.js';

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  testId?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (testId) node.setAttribute('data-testid', testId);
  return node;
}

export class ReviewApp {
  private readonly root: HTMLElement;
  private readonly doc: Document;
  private readonly client: ReviewApiClient;
  private form: ReviewFormState | null = null;
  private stats: ServiceStats | null = null;
  private busy = false;
  private errorMessage: string | null = null;

  constructor(root: HTMLElement, client: ReviewApiClient) {
    this.root = root;
    this.doc = root.ownerDocument;
    this.client = client;
    this.doc.addEventListener('keydown', (event) => this.onKeydown(event));
  }

  /** Load stats and the first pending item, then render. */
  async start(): Promise<void> {
    await this.refreshStats();
    await this.loadNext();
  }

  get currentForm(): ReviewFormState | null {
    return this.form;
  }

  private async refreshStats(): Promise<void> {
    try {
      this.stats = await this.client.stats();
    } catch (error) {
      this.errorMessage = describeError(error);
    }
  }

  private async loadNext(): Promise<void> {
    try {
      const item = await this.client.nextItem();
      this.form = item === null ? null : new ReviewFormState(item);
      this.errorMessage = null;
    } catch (error) {
      this.form = null;
      this.errorMessage = describeError(error);
    }
    this.render();
  }

  /** Submit the served prediction unchanged. */
  async accept(): Promise<void> {
    if (!this.form) return;
    this.form.revert();
    await this.submit();
  }

  flipLabel(): void {
    if (!this.form || this.form.submitted) return;
    this.form.flip();
    this.render();
  }

  focusReasoning(): void {
    const area = this.root.querySelector<HTMLTextAreaElement>('[data-testid=reasoning]');
    area?.focus();
  }

  /** Send the form's current label and reasoning; advance on success. */
  async submit(): Promise<void> {
    const form = this.form;
    if (!form || !form.canSubmit || this.busy) return;
    this.busy = true;
    this.render();
    try {
      const { final_label, final_reasoning } = form.payload();
      await this.client.validate(form.item.item_id, final_label, final_reasoning);
      form.submitted = true; // 2xx: this item can never be submitted again
      this.errorMessage = null;
      await this.refreshStats();
      this.busy = false;
      await this.loadNext();
    } catch (error) {
      // Transient failure: keep every edit, offer retry.
      this.busy = false;
      this.errorMessage = describeError(error);
      this.render();
    }
  }

  private onKeydown(event: KeyboardEvent): void {
    const target = event.target as HTMLElement | null;
    const tag = target?.tagName?.toLowerCase();
    if (tag === 'textarea' || tag === 'input') return;
    if (event.key === 'a') void this.accept();
    else if (event.key === 'f') this.flipLabel();
    else if (event.key === 'r') {
      event.preventDefault();
      this.focusReasoning();
    }
  }

  // -- rendering ----------------------------------------------------------

  private render(): void {
    this.root.textContent = '';
    this.root.appendChild(this.renderStats());
    if (this.errorMessage !== null) {
      this.root.appendChild(this.renderError(this.errorMessage));
    }
    if (this.form === null) {
      if (this.errorMessage === null) {
        const empty = el(this.doc, 'p', 'empty-state', 'empty');
        empty.textContent = 'No pending findings.';
        this.root.appendChild(empty);
      }
      return;
    }
    this.root.appendChild(this.renderItem(this.form));
  }

  private renderStats(): HTMLElement {
    const bar = el(this.doc, 'header', 'stats-bar', 'stats');
    const stats = this.stats;
    const parts = stats
      ? [
          `pending ${stats.pending}`,
          `validated ${stats.validated}`,
          `corrections ${(stats.correction_rate * 100).toFixed(0)}%`,
          `pool ${stats.pool.total}`,
        ]
      : ['stats unavailable'];
    for (const part of parts) {
      const cell = el(this.doc, 'span', 'stats-cell');
      cell.textContent = part;
      bar.appendChild(cell);
    }
    return bar;
  }

  private renderError(message: string): HTMLElement {
    const banner = el(this.doc, 'div', 'error-banner', 'error');
    const text = el(this.doc, 'span');
    text.textContent = message;
    const retry = el(this.doc, 'button', 'retry-button', 'retry');
    retry.textContent = 'Retry';
    retry.addEventListener('click', () => {
      if (this.form && !this.form.submitted) void this.submit();
      else void this.start();
    });
    banner.append(text, retry);
    return banner;
  }

  private renderItem(form: ReviewFormState): HTMLElement {
    const card = el(this.doc, 'section', 'item-card', 'item');
    card.setAttribute('data-item-id', form.item.item_id);

    const heading = el(this.doc, 'h2');
    heading.textContent = `${form.item.requirement_id} — “${form.item.weak_word}”`;
    card.appendChild(heading);

    card.appendChild(this.renderHighlightedText(form));
    card.appendChild(this.renderLabelToggle(form));
    card.appendChild(this.renderReasoning(form));
    card.appendChild(this.renderShots(form.item.shots_used ?? []));
    card.appendChild(this.renderActions(form));
    return card;
  }

  private renderHighlightedText(form: ReviewFormState): HTMLElement {
    const block = el(this.doc, 'blockquote', 'requirement-text');
    const { before, word, after } = form.highlight;
    const mark = el(this.doc, 'mark', 'weak-word', 'highlight');
    mark.textContent = word;
    block.append(
      this.doc.createTextNode(before),
      mark,
      this.doc.createTextNode(after),
    );
    return block;
  }

  private renderLabelToggle(form: ReviewFormState): HTMLElement {
    const row = el(this.doc, 'div', 'label-row');
    const toggle = el(this.doc, 'button', 'label-toggle', 'label-toggle');
    toggle.textContent = labelCaption(form.label);
    toggle.setAttribute('data-label', form.label);
    toggle.disabled = form.submitted || this.busy;
    toggle.addEventListener('click', () => this.flipLabel());
    const hint = el(this.doc, 'span', 'label-hint');
    hint.textContent = form.edits.label ? 'edited' : 'as predicted';
    row.append(toggle, hint);
    return row;
  }

  private renderReasoning(form: ReviewFormState): HTMLElement {
    const wrap = el(this.doc, 'div', 'reasoning-row');
    const area = el(this.doc, 'textarea', 'reasoning-input', 'reasoning');
    area.value = form.reasoning;
    area.rows = 3;
    area.disabled = form.submitted || this.busy;
    area.addEventListener('input', () => {
      form.reasoning = area.value;
      this.updateActionState();
    });
    wrap.appendChild(area);
    return wrap;
  }

  private renderShots(shots: ShotSummary[]): HTMLElement {
    const panel = el(this.doc, 'aside', 'shots-panel', 'shots');
    const title = el(this.doc, 'h3');
    title.textContent = shots.length
      ? `Examples behind this prediction (${shots.length})`
      : 'No examples used (zero-shot)';
    panel.appendChild(title);
    const list = el(this.doc, 'ol');
    for (const shot of shots) {
      const entry = el(this.doc, 'li', 'shot-row');
      const snippet = shot.text.length > 90 ? `${shot.text.slice(0, 87)}…` : shot.text;
      entry.textContent = `[${shot.label}] sim ${shot.similarity.toFixed(3)} — ${snippet}`;
      list.appendChild(entry);
    }
    panel.appendChild(list);
    return panel;
  }

  private renderActions(form: ReviewFormState): HTMLElement {
    const row = el(this.doc, 'div', 'action-row');
    const accept = el(this.doc, 'button', 'accept-button', 'accept');
    accept.textContent = 'Accept (a)';
    const submit = el(this.doc, 'button', 'submit-button', 'submit');
    submit.textContent = form.isAccept ? 'Submit' : 'Submit correction';
    accept.disabled = form.submitted || this.busy;
    submit.disabled = !form.canSubmit || this.busy;
    accept.addEventListener('click', () => void this.accept());
    submit.addEventListener('click', () => void this.submit());
    row.append(accept, submit);
    return row;
  }

  /** Re-evaluate button disabled state without rebuilding the card. */
  private updateActionState(): void {
    const form = this.form;
    if (!form) return;
    const submit = this.root.querySelector<HTMLButtonElement>('[data-testid=submit]');
    if (submit) {
      submit.disabled = !form.canSubmit || this.busy;
      submit.textContent = form.isAccept ? 'Submit' : 'Submit correction';
    }
  }
}

function describeError(error: unknown): string {
  if (error instanceof ApiError) {
    return `${error.code}: ${error.message}`;
  }
  return error instanceof Error ? error.message : String(error);
}

/** Entry point for the browser page. */
export function mountReviewApp(root: HTMLElement, baseUrl: string): ReviewApp {
  const app = new ReviewApp(root, new ReviewApiClient(baseUrl));
  void app.start();
  return app;
}
