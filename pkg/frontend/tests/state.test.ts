import { describe, expect, it } from 'vitest';

import { ApiClient, SessionResult } from '../src/api.js';
import { UiSession } from '../src/state.js';

function fakeResult(tag: string, n = 2): SessionResult {
  return {
    version: 'v1',
    result: {
      programs: Array.from({ length: n }, (_, i) => ({
        program: {
          text: `let T = ${tag}#${i}`,
          dsl: `(${tag} ${i})`,
          plot: { kind: 'bar', x: 'a', y: 'b', color: null, subplot: 'c' },
        },
        vega_lite: { mark: 'bar', encoding: { column: { field: 'c' } } },
        spec_rank: 0,
        score: 0.5,
        ast_size: 2,
      })),
      counters: {},
    },
    timing: { parse_ms: 1, synth_ms: 2 },
  };
}

class FakeApi extends ApiClient {
  calls: { query: string; maxResults: number | undefined }[] = [];
  delayMs = 0;
  private seq = 0;

  constructor() {
    super('http://unused');
  }

  override synthesize(
    _dataset: string,
    query: string,
    config: { max_results?: number } = {},
    signal?: AbortSignal,
  ): Promise<SessionResult> {
    this.calls.push({ query, maxResults: config.max_results });
    const tag = `${query}-${this.seq++}`;
    return new Promise((resolve, reject) => {
      const t = setTimeout(() => resolve(fakeResult(tag)), this.delayMs);
      signal?.addEventListener('abort', () => {
        clearTimeout(t);
        const err = new Error('aborted');
        err.name = 'AbortError';
        reject(err);
      });
    });
  }
}

describe('UiSession', () => {
  it('validates dataset selection and empty queries client-side', async () => {
    const api = new FakeApi();
    const session = new UiSession(api);
    await session.submitQuery('a chart');
    expect(session.error).toMatch(/select a dataset/);
    session.selectDataset('cars');
    await session.submitQuery('   ');
    expect(session.error).toMatch(/enter a query/);
    expect(api.calls.length).toBe(0);
  });

  it('appends to history and navigates back to earlier grids', async () => {
    const api = new FakeApi();
    const session = new UiSession(api);
    session.selectDataset('cars');
    await session.submitQuery('first query');
    await session.submitQuery('second query');
    expect(session.history.length).toBe(2);
    expect(session.current()?.query).toBe('second query');
    const secondPrograms = session.current()!.result.result.programs;

    session.back();
    expect(session.current()?.query).toBe('first query');
    session.forward();
    expect(session.current()!.result.result.programs).toEqual(secondPrograms);

    // history is append-only: navigation never removes entries
    session.back();
    await session.submitQuery('third query');
    expect(session.history.map((h) => h.query)).toEqual([
      'first query',
      'second query',
      'third query',
    ]);
  });

  it('cancels an in-flight request on resubmit', async () => {
    const api = new FakeApi();
    api.delayMs = 30;
    const session = new UiSession(api);
    session.selectDataset('cars');
    const first = session.submitQuery('slow one');
    const second = session.submitQuery('fast one');
    await Promise.all([first, second]);
    expect(session.history.length).toBe(1);
    expect(session.current()?.query).toBe('fast one');
    expect(session.error).toBeNull();
  });

  it('more options re-queries with a larger page', async () => {
    const api = new FakeApi();
    const session = new UiSession(api);
    session.selectDataset('cars');
    await session.submitQuery('bars please');
    await session.moreOptions();
    expect(api.calls.map((c) => c.maxResults)).toEqual([10, 20]);
    expect(session.history.length).toBe(2);
  });
});
