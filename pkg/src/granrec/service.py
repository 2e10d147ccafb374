"""HTTP service over the rule miner: train or load stores once, serve
cold-start recommendations to many clients."""
from __future__ import annotations

import threading
import uuid

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field, model_validator

from . import __version__
from .datasets import MovieLensConfig, load_csv_mmer, load_movielens
from .errors import GranrecError
from .recommend import recommend
from .rules import DEFAULT_TARGET_ATTR_CAP, RuleStore, load_store, train


class DatasetSpec(BaseModel):
    movielens_dir: str | None = None
    users_csv: str | None = None
    items_csv: str | None = None
    relation_csv: str | None = None
    genre_mode: str = "presence-only"

    @model_validator(mode="after")
    def _one_source(self):
        csv_parts = (self.users_csv, self.items_csv, self.relation_csv)
        if self.movielens_dir is not None:
            if any(p is not None for p in csv_parts):
                raise ValueError("give either movielens_dir or the three CSV paths")
        elif not all(p is not None for p in csv_parts):
            raise ValueError("users_csv, items_csv and relation_csv are all required")
        return self

    def load(self):
        if self.movielens_dir is not None:
            return load_movielens(
                MovieLensConfig(self.movielens_dir, genre_mode=self.genre_mode)
            )
        return load_csv_mmer(self.users_csv, self.items_csv, self.relation_csv)


class TrainRequest(BaseModel):
    dataset: DatasetSpec
    ms: float = Field(gt=0.0, le=1.0)
    mt: float = Field(gt=0.0, le=1.0)
    max_source_attrs: int | None = Field(default=None, ge=1)
    max_target_attrs: int | None = Field(default=DEFAULT_TARGET_ATTR_CAP, ge=1)
    allow_absence: bool = False
    name: str | None = None


class LoadRequest(BaseModel):
    path: str
    name: str | None = None


class StoreInfo(BaseModel):
    id: str
    name: str | None
    ms: float
    mt: float
    n_users: int
    n_items: int
    n_source_granules: int
    n_target_granules: int
    nonzero_rules: int
    max_confidence: float


class RecommendRequest(BaseModel):
    profile: dict[str, str]
    k: int = Field(default=1, ge=1)


class RecommendEntryModel(BaseModel):
    rank: int
    target: str
    confidence: float


class RecommendResponse(BaseModel):
    store_id: str
    k: int
    entries: list[RecommendEntryModel]


class HealthResponse(BaseModel):
    status: str
    version: str


class _Registry:
    def __init__(self):
        self._lock = threading.Lock()
        self._stores: dict[str, tuple[str | None, RuleStore]] = {}

    def add(self, name: str | None, store: RuleStore) -> str:
        with self._lock:
            store_id = uuid.uuid4().hex[:12]
            self._stores[store_id] = (name, store)
            return store_id

    def get(self, store_id: str) -> tuple[str | None, RuleStore]:
        with self._lock:
            if store_id not in self._stores:
                raise HTTPException(status_code=404,
                                    detail=f"no store with id {store_id!r}")
            return self._stores[store_id]

    def remove(self, store_id: str) -> None:
        with self._lock:
            if store_id not in self._stores:
                raise HTTPException(status_code=404,
                                    detail=f"no store with id {store_id!r}")
            del self._stores[store_id]

    def items(self):
        with self._lock:
            return list(self._stores.items())


def _info(store_id: str, name: str | None, store: RuleStore) -> StoreInfo:
    conf = store.confidence_matrix
    return StoreInfo(
        id=store_id,
        name=name,
        ms=store.ms,
        mt=store.mt,
        n_users=store.n_users,
        n_items=store.n_items,
        n_source_granules=len(store.source_granules),
        n_target_granules=len(store.target_granules),
        nonzero_rules=int((store.pair_counts > 0).sum()),
        max_confidence=float(conf.max(initial=0.0)),
    )


def create_app() -> FastAPI:
    app = FastAPI(title="granrec", version=__version__)
    registry = _Registry()

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/stores/train", response_model=StoreInfo, status_code=201)
    def train_store(request: TrainRequest):
        try:
            es = request.dataset.load()
            store = train(
                es, request.ms, request.mt,
                max_source_attrs=request.max_source_attrs,
                max_target_attrs=request.max_target_attrs,
                allow_absence=request.allow_absence,
            )
        except GranrecError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        store_id = registry.add(request.name, store)
        return _info(store_id, request.name, store)

    @app.post("/stores/load", response_model=StoreInfo, status_code=201)
    def load_serialized(request: LoadRequest):
        try:
            store = load_store(request.path)
        except GranrecError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        store_id = registry.add(request.name, store)
        return _info(store_id, request.name, store)

    @app.get("/stores", response_model=list[StoreInfo])
    def list_stores():
        return [
            _info(store_id, name, store)
            for store_id, (name, store) in registry.items()
        ]

    @app.get("/stores/{store_id}", response_model=StoreInfo)
    def get_store(store_id: str):
        name, store = registry.get(store_id)
        return _info(store_id, name, store)

    @app.delete("/stores/{store_id}", status_code=204)
    def delete_store(store_id: str):
        registry.remove(store_id)

    @app.post("/stores/{store_id}/recommend", response_model=RecommendResponse)
    def recommend_for_profile(store_id: str, request: RecommendRequest):
        _, store = registry.get(store_id)
        try:
            rec = recommend(store, request.profile, request.k)
        except GranrecError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return RecommendResponse(
            store_id=store_id,
            k=request.k,
            entries=[
                RecommendEntryModel(rank=rank, target=cond, confidence=e.confidence)
                for rank, (cond, e) in enumerate(
                    zip(rec.conditions(), rec.entries), start=1
                )
            ],
        )

    return app


app = create_app()
