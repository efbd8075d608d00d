"""The HTTP service.

Wire protocol (shared with the ranking toolkit's remote embedding
client):

    POST /embed   {"texts": ["...", ...]}
                  -> 200 {"dim": D, "vectors": [[...], ...]}
    GET  /health  -> 200 {"model": name, "dim": D} once the model is
                  loaded, 503 before

400 on an empty text list, an oversized batch, or malformed JSON.
Configuration via environment: MODEL_NAME (hub name or local path),
MAX_BATCH (default 256), PORT (serving only).
"""

from __future__ import annotations

import logging
import os
from contextlib import asynccontextmanager

import anyio
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .encoder import SentenceEncoder

logger = logging.getLogger(__name__)

DEFAULT_MODEL = "sentence-transformers/all-MiniLM-L6-v2"


class EmbedRequest(BaseModel):
    texts: list[str] = Field(min_length=1)


class EmbedResponse(BaseModel):
    dim: int
    vectors: list[list[float]]


def create_app(model_name: str | None = None, max_batch: int | None = None) -> FastAPI:
    model_name = model_name or os.environ.get("MODEL_NAME", DEFAULT_MODEL)
    max_batch = max_batch or int(os.environ.get("MAX_BATCH", "256"))
    state: dict = {"encoder": None}

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        logger.info("loading model %s", model_name)
        state["encoder"] = await anyio.to_thread.run_sync(SentenceEncoder, model_name)
        logger.info("model ready, dim=%d", state["encoder"].dim)
        yield
        state["encoder"] = None

    app = FastAPI(title="embed-service", lifespan=lifespan)

    @app.exception_handler(RequestValidationError)
    async def malformed_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": "malformed request"})

    @app.get("/health")
    async def health():
        encoder = state["encoder"]
        if encoder is None:
            return JSONResponse(status_code=503, content={"detail": "model loading"})
        return {"model": encoder.model_name, "dim": encoder.dim}

    @app.post("/embed", response_model=EmbedResponse)
    async def embed(request: EmbedRequest):
        encoder = state["encoder"]
        if encoder is None:
            return JSONResponse(status_code=503, content={"detail": "model loading"})
        if len(request.texts) > max_batch:
            return JSONResponse(
                status_code=400,
                content={"detail": f"batch too large (max {max_batch}); chunk the request"},
            )
        # inference off the event loop; the encoder itself serializes on the GIL
        vectors = await anyio.to_thread.run_sync(encoder.encode, request.texts)
        return {"dim": encoder.dim, "vectors": vectors}

    return app


def main() -> None:
    import uvicorn

    logging.basicConfig(level=logging.INFO)
    uvicorn.run(create_app(), host="0.0.0.0", port=int(os.environ.get("PORT", "8000")))


if __name__ == "__main__":
    main()
