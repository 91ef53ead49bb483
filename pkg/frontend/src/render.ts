// Gallery rendering: each result becomes one card with an embedded chart
// and its program text (collapsible). Cards are keyed by a hash of the
// program so re-renders are stable, and rendering N results issues exactly
// N embed calls.

import { ProgramEntry, SessionResult } from './api.js';

export interface CardModel {
  key: string;
  title: string;
  score: number;
  specRank: number;
  programText: string;
  dsl: string;
  spec: Record<string, unknown>;
  faceted: boolean;
}

export type EmbedFn = (
  el: HTMLElement,
  spec: Record<string, unknown>,
) => Promise<unknown> | unknown;

export function programKey(entry: ProgramEntry): string {
  // FNV-1a over the canonical program text
  const s = entry.program.dsl;
  let h = 0x811c9dc5;
  for (let i = 0; i < s.length; i++) {
    h ^= s.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return (h >>> 0).toString(16);
}

export function cardModels(result: SessionResult): CardModel[] {
  return result.result.programs.map((entry, i) => ({
    key: programKey(entry),
    title: `#${i + 1} · ${entry.program.plot.kind} · score ${entry.score.toFixed(3)}`,
    score: entry.score,
    specRank: entry.spec_rank,
    programText: entry.program.text,
    dsl: entry.program.dsl,
    spec: entry.vega_lite,
    faceted:
      typeof entry.vega_lite === 'object' &&
      entry.vega_lite !== null &&
      'encoding' in entry.vega_lite &&
      'column' in ((entry.vega_lite as { encoding: object }).encoding ?? {}),
  }));
}

export function renderGallery(
  container: HTMLElement,
  result: SessionResult,
  embed: EmbedFn,
): CardModel[] {
  const models = cardModels(result);
  const existing = new Map<string, HTMLElement>();
  for (const child of Array.from(container.children)) {
    const key = (child as HTMLElement).dataset.key;
    if (key) existing.set(key, child as HTMLElement);
  }
  container.replaceChildren();
  for (const model of models) {
    const card = document.createElement('div');
    card.className = 'card';
    card.dataset.key = model.key;

    const title = document.createElement('div');
    title.className = 'card-title';
    title.textContent = model.title;
    card.appendChild(title);

    const chart = document.createElement('div');
    chart.className = 'chart';
    card.appendChild(chart);

    const details = document.createElement('details');
    const summary = document.createElement('summary');
    summary.textContent = 'program';
    const pre = document.createElement('pre');
    pre.textContent = `${model.programText}\n${model.dsl}`;
    details.appendChild(summary);
    details.appendChild(pre);
    card.appendChild(details);

    container.appendChild(card);
    embed(chart, model.spec);
  }
  return models;
}
