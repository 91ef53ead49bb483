// Session state machine for the query-refine loop: a selected dataset, an
// append-only history of (query, result) pages, and a cursor into it. At
// most one synthesis request is in flight; resubmitting cancels it.

import { ApiClient, SessionResult, SynthesizeConfig } from './api.js';

export interface HistoryEntry {
  query: string;
  result: SessionResult;
}

export type SessionListener = (session: UiSession) => void;

const PAGE_STEP = 10;

export class UiSession {
  datasetId: string | null = null;
  readonly history: HistoryEntry[] = [];
  currentIndex = -1;
  pending: string | null = null;
  error: string | null = null;
  private controller: AbortController | null = null;
  private listeners: SessionListener[] = [];
  private lastMaxResults = PAGE_STEP;

  constructor(private api: ApiClient, private config: SynthesizeConfig = {}) {}

  onChange(listener: SessionListener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const l of this.listeners) l(this);
  }

  selectDataset(id: string): void {
    this.datasetId = id;
    this.error = null;
    this.notify();
  }

  current(): HistoryEntry | null {
    return this.currentIndex >= 0 ? this.history[this.currentIndex] : null;
  }

  /** Validation failures return a message without touching the server. */
  validateQuery(query: string): string | null {
    if (this.datasetId === null) return 'select a dataset first';
    if (!query.trim()) return 'enter a query';
    return null;
  }

  async submitQuery(query: string, maxResults = PAGE_STEP): Promise<void> {
    const invalid = this.validateQuery(query);
    if (invalid !== null) {
      this.error = invalid;
      this.notify();
      return;
    }
    if (this.controller !== null) this.controller.abort();
    this.controller = new AbortController();
    this.pending = query;
    this.error = null;
    this.lastMaxResults = maxResults;
    this.notify();
    try {
      const result = await this.api.synthesize(
        this.datasetId as string,
        query,
        { ...this.config, max_results: maxResults },
        this.controller.signal,
      );
      this.history.push({ query, result });
      this.currentIndex = this.history.length - 1;
      this.pending = null;
      this.controller = null;
      this.notify();
    } catch (err) {
      if ((err as Error).name === 'AbortError') return; // superseded
      this.pending = null;
      this.controller = null;
      this.error = (err as Error).message;
      this.notify();
    }
  }

  /** Re-run the current query asking for the next page of options. */
  async moreOptions(): Promise<void> {
    const entry = this.current();
    if (entry === null) return;
    await this.submitQuery(entry.query, this.lastMaxResults + PAGE_STEP);
  }

  back(): void {
    if (this.currentIndex > 0) {
      this.currentIndex -= 1;
      this.notify();
    }
  }

  forward(): void {
    if (this.currentIndex < this.history.length - 1) {
      this.currentIndex += 1;
      this.notify();
    }
  }
}
