"""JSON-over-HTTP service: dataset registry plus synthesis endpoint.

Lemma stores are keyed by dataset fingerprint and persist across requests
(bounded by an LRU cap), which is what realizes cross-query lemma reuse in
the interactive loop.
"""

from __future__ import annotations

import threading
import time
from collections import OrderedDict
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .cli import result_to_json
from .engine import LemmaStore, SynthConfig, synthesize_session
from .heuristics import heuristic_parse
from .specs import SpecFileError, parse_spec_file
from .tables import Table, TableError, load_table

LEMMA_STORE_CAP = 64


class UploadRequest(BaseModel):
    id: str = Field(min_length=1)
    csv: str


class SynthesizeRequest(BaseModel):
    dataset_id: str
    query: Optional[str] = None
    specs: Optional[dict] = None  # inline spec-file document
    config: dict = Field(default_factory=dict)


class _Registry:
    def __init__(self) -> None:
        self._lock = threading.RLock()
        self.tables: dict[str, Table] = {}
        self.lemma_stores: OrderedDict[str, LemmaStore] = OrderedDict()

    def add(self, dataset_id: str, table: Table) -> None:
        with self._lock:
            self.tables[dataset_id] = table

    def get(self, dataset_id: str) -> Table:
        with self._lock:
            if dataset_id not in self.tables:
                raise KeyError(dataset_id)
            return self.tables[dataset_id]

    def lemma_store(self, table: Table) -> LemmaStore:
        with self._lock:
            key = table.fingerprint()
            store = self.lemma_stores.get(key)
            if store is None:
                store = LemmaStore()
                self.lemma_stores[key] = store
                while len(self.lemma_stores) > LEMMA_STORE_CAP:
                    self.lemma_stores.popitem(last=False)
            else:
                self.lemma_stores.move_to_end(key)
            return store


def _config_from_overrides(overrides: dict) -> SynthConfig:
    allowed = {
        "k": "max_depth",
        "max_depth": "max_depth",
        "max_results": "max_results",
        "ablation": "ablation",
        "enable_mutate": "enable_mutate",
        "filter_constant_cap": "filter_constant_cap",
        "bin_counts": "bin_counts",
        "max_specs": "max_specs",
    }
    kwargs = {}
    for key, value in overrides.items():
        if key not in allowed:
            raise ValueError(f"unknown config key {key!r}")
        if key == "bin_counts":
            value = tuple(int(v) for v in value)
        kwargs[allowed[key]] = value
    return SynthConfig(**kwargs)


def create_app(data_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="vizsynth", version="0.1.0")
    registry = _Registry()
    synth_lock = threading.Lock()

    if data_dir is not None:
        for path in sorted(Path(data_dir).glob("*.csv")):
            try:
                registry.add(path.stem, load_table(path.read_bytes()))
            except TableError:
                continue

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/datasets")
    def datasets() -> list:
        out = []
        for dataset_id in sorted(registry.tables):
            t = registry.tables[dataset_id]
            out.append(
                {
                    "id": dataset_id,
                    "columns": [
                        {"name": c, "type": ct.value} for c, ct in t.columns
                    ],
                    "rows": len(t.rows),
                }
            )
        return out

    @app.post("/datasets", status_code=201)
    def upload(req: UploadRequest) -> dict:
        try:
            table = load_table(req.csv)
        except TableError as e:
            raise HTTPException(status_code=400, detail=str(e))
        registry.add(req.id, table)
        return {
            "id": req.id,
            "columns": [{"name": c, "type": ct.value} for c, ct in table.columns],
            "rows": len(table.rows),
        }

    @app.post("/synthesize")
    def synthesize(req: SynthesizeRequest) -> dict:
        try:
            table = registry.get(req.dataset_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown dataset {req.dataset_id!r}")
        if (req.query is None) == (req.specs is None):
            raise HTTPException(
                status_code=400, detail="exactly one of query or specs is required"
            )
        try:
            cfg = _config_from_overrides(req.config)
        except (ValueError, TypeError) as e:
            raise HTTPException(status_code=422, detail=str(e))
        t0 = time.perf_counter()
        if req.query is not None:
            if not req.query.strip():
                raise HTTPException(status_code=400, detail="empty query")
            specs = heuristic_parse(req.query, table, max_specs=cfg.max_specs)
        else:
            import json as _json

            try:
                specs, _warnings = parse_spec_file(_json.dumps(req.specs), table)
            except SpecFileError as e:
                raise HTTPException(status_code=400, detail=str(e))
        parse_ms = (time.perf_counter() - t0) * 1000.0
        if not specs:
            raise HTTPException(status_code=400, detail="no specifications")
        store = registry.lemma_store(table)
        with synth_lock:
            result = synthesize_session(specs, table, cfg, lemma_store=store)
        result.parse_ms = parse_ms
        doc = result_to_json(result)
        doc["result"]["lemmas_in_store"] = len(store)
        return doc

    return app
