"""FastAPI application implementing the scorer wire protocol.

Endpoints: POST /embed, /sentiment, /acceptability, /verbalize, /fill_mask,
plus GET /health. Responses preserve input order and length. Batches larger
than max_batch are chunked internally before hitting a model. Malformed
bodies return 400; a capability whose model cannot serve returns 503 naming
the capability.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import stubs
from .config import ServiceConfig
from .models import CapabilityUnavailable, ModelRegistry

CAPABILITIES = ("embed", "sentiment", "acceptability", "verbalize", "fill_mask")


class TextsRequest(BaseModel):
    texts: list[str]


class FillMaskRequest(BaseModel):
    texts: list[str]
    k: int = Field(ge=1)


class TripleItem(BaseModel):
    s: str
    p: str
    o: str


class VerbalizeRequest(BaseModel):
    triples: list[TripleItem]


def _chunked(items, size):
    for start in range(0, len(items), size):
        yield items[start : start + size]


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    app = FastAPI(title="scorer-service")
    registry = None if config.stub_mode else ModelRegistry(config)
    app.state.config = config
    app.state.registry = registry

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.exception_handler(CapabilityUnavailable)
    async def unavailable(request: Request, exc: CapabilityUnavailable):
        return JSONResponse(
            status_code=503,
            content={"capability": exc.capability, "detail": exc.reason},
        )

    def run_batched(items, fn):
        out = []
        for chunk in _chunked(items, config.max_batch):
            out.extend(fn(chunk))
        return out

    @app.post("/embed")
    def embed(req: TextsRequest):
        if config.stub_mode:
            vectors = [stubs.embed_one(t, config.seed) for t in req.texts]
        else:
            vectors = run_batched(req.texts, registry.embed)
        return {"vectors": vectors}

    @app.post("/sentiment")
    def sentiment(req: TextsRequest):
        if config.stub_mode:
            labels = [stubs.sentiment_one(t) for t in req.texts]
        else:
            labels = run_batched(req.texts, registry.sentiment)
        return {"labels": labels}

    @app.post("/acceptability")
    def acceptability(req: TextsRequest):
        if config.stub_mode:
            scores = [stubs.acceptability_one(t, config.seed) for t in req.texts]
        else:
            scores = run_batched(req.texts, registry.acceptability)
        return {"scores": scores}

    @app.post("/verbalize")
    def verbalize(req: VerbalizeRequest):
        triples = [(t.s, t.p, t.o) for t in req.triples]
        if config.stub_mode:
            sentences = [stubs.verbalize_one(*t) for t in triples]
        else:
            sentences = run_batched(triples, registry.verbalize)
        return {"sentences": sentences}

    @app.post("/fill_mask")
    def fill_mask(req: FillMaskRequest):
        if config.stub_mode:
            topk = [stubs.fill_mask_one(t, req.k) for t in req.texts]
        else:
            topk = run_batched(req.texts, lambda chunk: registry.fill_mask(chunk, req.k))
        return {"topk": topk}

    @app.get("/health")
    def health():
        if config.stub_mode:
            capabilities = {name: True for name in CAPABILITIES}
        else:
            capabilities = {name: registry.ready(name) for name in CAPABILITIES}
        return {
            "capabilities": capabilities,
            "stub_mode": config.stub_mode,
            "errors": {} if config.stub_mode else {
                name: registry.error(name)
                for name in CAPABILITIES
                if registry.error(name)
            },
        }

    return app
