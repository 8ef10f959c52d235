"""HTTP facade over ingest, training, diagnosis, explanations, analytics.

State is an in-memory session store: datasets and models are immutable
once created, ids are assigned monotonically, and only the two POST-create
endpoints mutate anything. Training runs synchronously; desk-scale class
data fits in seconds.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass, field

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.requests import Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import payloads
from .analytics import compute_bundle
from .errors import WorkbenchError
from .explain import (
    ContrastiveQuery,
    CounterfactualQuery,
    build_reasoning_chain,
    contrastive,
    counterfactual,
)
from .ingest import EncodedDataset, ItemInfo, load_dataset, parse_items
from .model import ModelParams, check_mastery
from .posterior import diagnose
from .train import TrainConfig, TrainReport, fit


@dataclass
class StoredDataset:
    dataset: EncodedDataset
    items_meta: dict[str, ItemInfo] | None = None


@dataclass
class StoredModel:
    dataset_id: str
    params: ModelParams
    report: TrainReport


@dataclass
class SessionStore:
    datasets: dict[str, StoredDataset] = field(default_factory=dict)
    models: dict[str, StoredModel] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)
    _next: dict[str, int] = field(default_factory=lambda: {"ds": 0, "m": 0})

    def add_dataset(self, entry: StoredDataset) -> str:
        with self._lock:
            self._next["ds"] += 1
            ds_id = f"ds-{self._next['ds']}"
            self.datasets[ds_id] = entry
        return ds_id

    def add_model(self, entry: StoredModel) -> str:
        with self._lock:
            self._next["m"] += 1
            m_id = f"m-{self._next['m']}"
            self.models[m_id] = entry
        return m_id

    def dataset(self, ds_id: str) -> StoredDataset:
        entry = self.datasets.get(ds_id)
        if entry is None:
            raise WorkbenchError("NotFound", f"no dataset {ds_id!r}")
        return entry

    def model(self, m_id: str) -> StoredModel:
        entry = self.models.get(m_id)
        if entry is None:
            raise WorkbenchError("NotFound", f"no model {m_id!r}")
        return entry


class DatasetUpload(BaseModel):
    responses_csv: str
    qmatrix_csv: str
    items_csv: str | None = None


class TrainRequest(BaseModel):
    dataset_id: str
    learning_rate: float | None = None
    epochs: int | None = None
    optimizer: str | None = None
    seed: int | None = None
    init_scale: float | None = None
    holdout_fraction: float | None = None
    hidden1: int | None = None
    hidden2: int | None = None
    discrimination_mode: str | None = None

    def to_config(self) -> TrainConfig:
        overrides = {
            k: v
            for k, v in self.model_dump().items()
            if k != "dataset_id" and v is not None
        }
        return TrainConfig(**overrides)


class ResponseIn(BaseModel):
    item_id: str
    correct: int


class DiagnoseRequest(BaseModel):
    responses: list[ResponseIn]


class ContrastiveRequest(BaseModel):
    responses: list[ResponseIn]
    flip_items: list[str] | None = None
    variant_responses: list[ResponseIn] | None = None


class CounterfactualBase(BaseModel):
    responses: list[ResponseIn] | None = None
    mastery: dict[str, float] | None = None


class CounterfactualRequest(BaseModel):
    base: CounterfactualBase
    overrides: dict[str, float] = {}
    target_items: list[str] | None = None
    threshold: float = 0.5


def resolve_items(params: ModelParams, item_ids: list[str]) -> list[int]:
    index = {item: e for e, item in enumerate(params.qmatrix.item_ids)}
    out = []
    for item in item_ids:
        if item not in index:
            raise WorkbenchError("UnknownItem", f"item {item!r} is not in the model")
        out.append(index[item])
    return out


def resolve_responses(params: ModelParams, responses: list[ResponseIn]):
    idx = resolve_items(params, [r.item_id for r in responses])
    for r in responses:
        if r.correct not in (0, 1):
            raise WorkbenchError(
                "BadCorrectValue", f"correct must be 0 or 1, got {r.correct!r}"
            )
    return [(e, r.correct) for e, r in zip(idx, responses)]


def resolve_kcs(params: ModelParams, kc_values: dict[str, float]) -> dict[int, float]:
    index = {kc: k for k, kc in enumerate(params.qmatrix.kc_ids)}
    out = {}
    for kc, value in kc_values.items():
        if kc not in index:
            raise WorkbenchError("UnknownKC", f"KC {kc!r} is not in the model")
        out[index[kc]] = value
    return out


def counterfactual_base_mastery(params: ModelParams, base: CounterfactualBase):
    if (base.responses is None) == (base.mastery is None):
        raise WorkbenchError(
            "BadRequest", "base must carry exactly one of responses or mastery"
        )
    if base.mastery is not None:
        by_index = resolve_kcs(params, base.mastery)
        if len(by_index) != params.K:
            raise WorkbenchError(
                "BadRequest", "base mastery must name every KC exactly once"
            )
        values = [by_index[k] for k in range(params.K)]
        return check_mastery(values, "base mastery")
    state = diagnose(params, resolve_responses(params, base.responses))
    return state.mastery


def create_app(store: SessionStore | None = None) -> FastAPI:
    store = store if store is not None else SessionStore()
    app = FastAPI(title="cdworkbench", docs_url="/docs")
    app.state.store = store

    origins = os.environ.get("CDW_CORS_ORIGINS", "*").split(",")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=origins,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(WorkbenchError)
    async def workbench_error(_: Request, exc: WorkbenchError):
        status = 404 if exc.code == "NotFound" else 400
        return JSONResponse(status_code=status, content=exc.to_dict())

    @app.exception_handler(RequestValidationError)
    async def body_error(_: Request, exc: RequestValidationError):
        details = [
            {"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(
            status_code=400,
            content={"code": "BadRequest", "message": "invalid request body",
                     "details": details},
        )

    @app.post("/api/datasets", status_code=201)
    def upload_dataset(body: DatasetUpload):
        result = load_dataset(body.responses_csv, body.qmatrix_csv)
        if not isinstance(result, EncodedDataset):
            return JSONResponse(status_code=422, content=result.to_dict())
        items_meta = parse_items(body.items_csv) if body.items_csv else None
        ds_id = store.add_dataset(StoredDataset(result, items_meta))
        return {"dataset_id": ds_id}

    @app.get("/api/datasets")
    def list_datasets():
        return {
            "datasets": [
                {
                    "dataset_id": ds_id,
                    "n_students": e.dataset.N,
                    "n_items": e.dataset.M,
                    "n_kcs": e.dataset.K,
                    "n_records": len(e.dataset.records),
                }
                for ds_id, e in store.datasets.items()
            ]
        }

    @app.get("/api/datasets/{ds_id}")
    def get_dataset(ds_id: str):
        entry = store.dataset(ds_id)
        ds = entry.dataset
        return {
            "dataset_id": ds_id,
            "n_students": ds.N,
            "n_items": ds.M,
            "n_kcs": ds.K,
            "n_records": len(ds.records),
            "student_ids": ds.student_ids,
            "item_ids": ds.item_ids,
            "kc_ids": ds.kc_ids,
        }

    @app.get("/api/datasets/{ds_id}/items")
    def get_dataset_items(ds_id: str):
        entry = store.dataset(ds_id)
        ds = entry.dataset
        meta = entry.items_meta or {}
        items = []
        for e, item_id in enumerate(ds.item_ids):
            kcs = [
                kc
                for k, kc in enumerate(ds.kc_ids)
                if ds.qmatrix.entries[e, k] == 1
            ]
            info = meta.get(item_id)
            items.append(
                {
                    "item_id": item_id,
                    "kcs": kcs,
                    "text": info.text if info else None,
                    "answer_key": info.answer_key if info else None,
                    "options": info.options if info else None,
                }
            )
        return {"items": items}

    @app.get("/api/datasets/{ds_id}/students/{student_id}")
    def get_student(ds_id: str, student_id: str):
        ds = store.dataset(ds_id).dataset
        if student_id not in ds.student_index:
            raise WorkbenchError("NotFound", f"no student {student_id!r} in {ds_id}")
        responses = [
            {
                "item_id": ds.item_ids[obs.item],
                "correct": obs.correct,
                "selected_option": obs.option,
            }
            for obs in ds.records
            if obs.student == ds.student_index[student_id]
        ]
        return {"student_id": student_id, "responses": responses}

    @app.post("/api/models")
    def train_model(body: TrainRequest):
        entry = store.dataset(body.dataset_id)
        params, report = fit(entry.dataset, body.to_config())
        m_id = store.add_model(StoredModel(body.dataset_id, params, report))
        return {
            "model_id": m_id,
            "train_report": payloads.train_report_payload(report),
        }

    @app.get("/api/models")
    def list_models():
        return {
            "models": [
                {
                    "model_id": m_id,
                    "dataset_id": e.dataset_id,
                    "n_students": e.params.N,
                    "n_items": e.params.M,
                    "n_kcs": e.params.K,
                }
                for m_id, e in store.models.items()
            ]
        }

    @app.get("/api/models/{m_id}")
    def get_model(m_id: str):
        entry = store.model(m_id)
        return {
            "model_id": m_id,
            "dataset_id": entry.dataset_id,
            "params": payloads.model_payload(entry.params),
            "train_report": payloads.train_report_payload(entry.report),
        }

    @app.post("/api/models/{m_id}/diagnose")
    def diagnose_student(m_id: str, body: DiagnoseRequest):
        params = store.model(m_id).params
        responses = resolve_responses(params, body.responses)
        state = diagnose(params, responses)
        chain = build_reasoning_chain(params, state)
        return payloads.diagnose_payload(params, state, chain)

    @app.post("/api/models/{m_id}/explain/contrastive")
    def explain_contrastive(m_id: str, body: ContrastiveRequest):
        params = store.model(m_id).params
        base = resolve_responses(params, body.responses)
        flip = (
            resolve_items(params, body.flip_items)
            if body.flip_items is not None
            else None
        )
        variant = (
            resolve_responses(params, body.variant_responses)
            if body.variant_responses is not None
            else None
        )
        result = contrastive(
            params,
            ContrastiveQuery(base, variant_responses=variant, flip_items=flip),
        )
        return payloads.contrastive_payload(params, result)

    @app.post("/api/models/{m_id}/explain/counterfactual")
    def explain_counterfactual(m_id: str, body: CounterfactualRequest):
        params = store.model(m_id).params
        base_mastery = counterfactual_base_mastery(params, body.base)
        query = CounterfactualQuery(
            base_mastery=base_mastery,
            overrides=resolve_kcs(params, body.overrides),
            threshold=body.threshold,
            target_items=(
                resolve_items(params, body.target_items)
                if body.target_items is not None
                else None
            ),
        )
        result = counterfactual(params, query)
        return payloads.counterfactual_payload(params, query, result)

    @app.get("/api/models/{m_id}/analytics/{view}")
    def model_analytics(m_id: str, view: str):
        if view not in payloads.ANALYTICS_VIEWS:
            raise WorkbenchError(
                "NotFound",
                f"no analytics view {view!r}; expected one of"
                f" {', '.join(payloads.ANALYTICS_VIEWS)}",
            )
        entry = store.model(m_id)
        dataset = store.dataset(entry.dataset_id).dataset
        bundle = compute_bundle(dataset, entry.params)
        return payloads.analytics_payload(bundle, view)

    return app


def serve(host: str = "127.0.0.1", port: int | None = None, ui_dir: str | None = None):
    """Run the service with uvicorn; `PORT` env is honored when set."""
    import uvicorn

    app = create_app()
    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    if port is None:
        port = int(os.environ.get("PORT", "8000"))
    uvicorn.run(app, host=host, port=port)
