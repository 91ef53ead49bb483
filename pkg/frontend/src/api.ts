// Typed client for the synthesis service's HTTP API. The UI is a pure
// client of this API: no synthesis logic lives browser-side.

export interface ColumnInfo {
  name: string;
  type: string;
}

export interface DatasetInfo {
  id: string;
  columns: ColumnInfo[];
  rows: number;
}

export interface ProgramEntry {
  program: {
    text: string;
    dsl: string;
    plot: {
      kind: string;
      x: string;
      y: string;
      color: string | null;
      subplot: string | null;
    };
  };
  vega_lite: Record<string, unknown>;
  spec_rank: number;
  score: number;
  ast_size: number;
}

export interface SessionResult {
  version: string;
  result: {
    programs: ProgramEntry[];
    counters: Record<string, number>;
    lemmas_in_store?: number;
  };
  timing: { parse_ms: number; synth_ms: number };
}

export interface SynthesizeConfig {
  k?: number;
  max_results?: number;
  [key: string]: unknown;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function asJson<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = (await res.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export class ApiClient {
  constructor(private baseUrl: string, private fetchFn: typeof fetch = fetch) {}

  async health(): Promise<boolean> {
    try {
      const res = await this.fetchFn(`${this.baseUrl}/health`);
      return res.ok;
    } catch {
      return false;
    }
  }

  listDatasets(): Promise<DatasetInfo[]> {
    return this.fetchFn(`${this.baseUrl}/datasets`).then((r) =>
      asJson<DatasetInfo[]>(r),
    );
  }

  uploadDataset(id: string, csv: string): Promise<DatasetInfo> {
    return this.fetchFn(`${this.baseUrl}/datasets`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ id, csv }),
    }).then((r) => asJson<DatasetInfo>(r));
  }

  synthesize(
    datasetId: string,
    query: string,
    config: SynthesizeConfig = {},
    signal?: AbortSignal,
  ): Promise<SessionResult> {
    return this.fetchFn(`${this.baseUrl}/synthesize`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ dataset_id: datasetId, query, config }),
      signal,
    }).then((r) => asJson<SessionResult>(r));
  }
}
