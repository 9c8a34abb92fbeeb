"""HTTP surface: JSON over POST /v1/logprobs, /v1/embed, /v1/generate.

Endpoints are synchronous handlers (FastAPI runs them in a worker pool);
per-slot locks inside ModelSlot serialize each model's forward passes
while different slots serve concurrently. Errors travel as structured
JSON payloads {code, message}.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .models import ModelSlot, SlotError


class LogprobsRequest(BaseModel):
    model: str
    text: str


class EmbedRequest(BaseModel):
    model: str
    text: str


class GenerateRequest(BaseModel):
    model: str
    prompt: str
    max_tokens: int = 256
    n_samples: int = 1
    temperature: float = 1.0
    seed: int = 0


def create_app(slots: dict[str, ModelSlot]) -> FastAPI:
    app = FastAPI(title="lmbridge")

    @app.exception_handler(SlotError)
    async def slot_error_handler(request: Request, exc: SlotError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": str(exc)}
        )

    def get_slot(name: str) -> ModelSlot:
        slot = slots.get(name)
        if slot is None:
            raise SlotError("UNKNOWN_MODEL", f"no slot named {name!r}", status=404)
        return slot

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "models": sorted(slots)}

    @app.get("/v1/models")
    def models():
        return {"models": [slots[name].describe() for name in sorted(slots)]}

    @app.post("/v1/logprobs")
    def logprobs(request: LogprobsRequest):
        slot = get_slot(request.model)
        tokens, values = slot.logprobs(request.text)
        return {
            "model": slot.name,
            "fingerprint": slot.fingerprint,
            "tokens": tokens,
            "logprobs": values,
        }

    @app.post("/v1/embed")
    def embed(request: EmbedRequest):
        slot = get_slot(request.model)
        tokens, vectors, special, dim = slot.embed(request.text)
        return {
            "model": slot.name,
            "fingerprint": slot.fingerprint,
            "tokens": tokens,
            "vectors": vectors,
            "special": special,
            "dim": dim,
        }

    @app.post("/v1/generate")
    def generate(request: GenerateRequest):
        slot = get_slot(request.model)
        texts, clamped = slot.generate(
            request.prompt,
            max_tokens=request.max_tokens,
            n_samples=request.n_samples,
            temperature=request.temperature,
            seed=request.seed,
        )
        return {
            "model": slot.name,
            "fingerprint": slot.fingerprint,
            "texts": texts,
            "clamped": clamped,
        }

    return app
