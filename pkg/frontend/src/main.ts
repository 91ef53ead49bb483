// Page wiring: dataset selector + upload, query box, ranked gallery with
// back/forward history and a "more options" pager.

import { ApiClient, DatasetInfo } from './api.js';
import { renderGallery, EmbedFn } from './render.js';
import { UiSession } from './state.js';

declare global {
  interface Window {
    vegaEmbed?: (el: HTMLElement, spec: unknown, opts?: unknown) => Promise<unknown>;
  }
}

const embed: EmbedFn = (el, spec) => {
  if (window.vegaEmbed) {
    return window.vegaEmbed(el, spec, { actions: false });
  }
  const pre = document.createElement('pre');
  pre.textContent = JSON.stringify(spec, null, 2).slice(0, 2000);
  el.appendChild(pre);
  return Promise.resolve();
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function boot(baseUrl = ''): UiSession {
  const api = new ApiClient(baseUrl || window.location.origin.replace(/:\d+$/, ':8571'));
  const session = new UiSession(api, { k: 3 });

  const selector = el<HTMLSelectElement>('dataset');
  const schema = el<HTMLDivElement>('schema');
  const queryBox = el<HTMLInputElement>('query');
  const status = el<HTMLDivElement>('status');
  const gallery = el<HTMLDivElement>('gallery');
  const fileInput = el<HTMLInputElement>('upload');

  let datasets: DatasetInfo[] = [];

  async function refreshDatasets(): Promise<void> {
    datasets = await api.listDatasets();
    selector.replaceChildren();
    for (const d of datasets) {
      const opt = document.createElement('option');
      opt.value = d.id;
      opt.textContent = `${d.id} (${d.rows} rows)`;
      selector.appendChild(opt);
    }
    if (datasets.length && session.datasetId === null) {
      session.selectDataset(datasets[0].id);
    }
  }

  function showSchema(): void {
    const d = datasets.find((x) => x.id === session.datasetId);
    schema.textContent = d
      ? d.columns.map((c) => `${c.name}: ${c.type}`).join('  ·  ')
      : '';
  }

  selector.addEventListener('change', () => session.selectDataset(selector.value));

  fileInput.addEventListener('change', async () => {
    const file = fileInput.files?.[0];
    if (!file) return;
    if (!file.name.toLowerCase().endsWith('.csv')) {
      status.textContent = 'only .csv files can be uploaded';
      return;
    }
    try {
      const text = await file.text();
      const info = await api.uploadDataset(file.name.replace(/\.csv$/i, ''), text);
      await refreshDatasets();
      session.selectDataset(info.id);
      status.textContent = `uploaded ${info.id}: ${info.columns.length} columns`;
    } catch (err) {
      status.textContent = `upload failed: ${(err as Error).message}`;
    }
  });

  el<HTMLButtonElement>('go').addEventListener('click', () => {
    void session.submitQuery(queryBox.value);
  });
  queryBox.addEventListener('keydown', (e) => {
    if (e.key === 'Enter') void session.submitQuery(queryBox.value);
  });
  el<HTMLButtonElement>('back').addEventListener('click', () => session.back());
  el<HTMLButtonElement>('forward').addEventListener('click', () => session.forward());
  el<HTMLButtonElement>('more').addEventListener('click', () => {
    void session.moreOptions();
  });

  session.onChange(() => {
    showSchema();
    if (session.pending !== null) {
      status.textContent = `synthesizing for: ${session.pending} ...`;
      return;
    }
    if (session.error !== null) {
      status.textContent = session.error;
      return;
    }
    const entry = session.current();
    if (entry) {
      const n = entry.result.result.programs.length;
      const t = entry.result.timing;
      status.textContent =
        `${n} programs for "${entry.query}" ` +
        `(page ${session.currentIndex + 1}/${session.history.length}, ` +
        `${(t.parse_ms + t.synth_ms).toFixed(0)} ms)`;
      renderGallery(gallery, entry.result, embed);
    }
  });

  void refreshDatasets().then(showSchema);
  return session;
}

if (typeof document !== 'undefined' && document.getElementById('gallery')) {
  boot();
}
