"""Uniform access to language-model scoring: log-probs, embeddings, generation.

Three backends share one interface:

* cache  -- a content-addressed on-disk store; fully offline and
  bit-deterministic. Misses raise unless a fallback backend is configured.
* http   -- a client for the model-serving sidecar protocol
  (POST /v1/logprobs, /v1/embed, /v1/generate).
* stub   -- deterministic hash-derived pseudo-outputs for tests and offline
  pipeline runs; no model involved.

Every response carries the model_id it was computed with, and a handle
never issues more than max_parallel concurrent backend calls.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import requests

from .affinity import SentenceEmbeddings
from .style import TokenLogProbs, make_token_logprobs

log = logging.getLogger(__name__)

LOGPROBS = "logprobs"
EMBED = "embed"
GENERATE = "generate"
ALL_CAPABILITIES = frozenset({LOGPROBS, EMBED, GENERATE})


class ScorerError(Exception):
    """Base class for scorer failures."""


class CapabilityError(ScorerError):
    """The handle does not support the requested operation."""


class TransportError(ScorerError):
    """Network-level failure; retryable."""


class BackendError(ScorerError):
    """The backend returned an error payload; not retryable."""


class CacheMiss(ScorerError):
    """No cached response for the request; names the input hash."""


class EmptyInput(ScorerError):
    code = "EMPTY_INPUT"


class ScorerConfigError(ScorerError):
    """Bad scorer configuration file."""


@dataclass(frozen=True)
class GenerationConfig:
    max_tokens: int = 1024
    n_samples: int = 4
    temperature: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.max_tokens <= 0 or self.n_samples <= 0 or self.temperature < 0:
            raise ValueError("invalid generation config")

    def payload(self) -> dict:
        return {
            "max_tokens": self.max_tokens,
            "n_samples": self.n_samples,
            "temperature": self.temperature,
            "seed": self.seed,
        }


def request_hash(op: str, payload: dict) -> str:
    """Content address of one request: sha256 over the canonical JSON payload."""
    canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def normalized_embeddings(
    sentence: str, vectors: Sequence[Sequence[float]], special: Sequence[bool] | None = None
) -> SentenceEmbeddings:
    """L2-normalize backend vectors and drop special-token rows."""
    arr = np.asarray(vectors, dtype=np.float64)
    if special is not None:
        keep = ~np.asarray(special, dtype=bool)
        arr = arr[keep]
    if arr.size == 0:
        raise BackendError("no content tokens in embedding response")
    norms = np.linalg.norm(arr, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise BackendError("zero-norm embedding vector")
    return SentenceEmbeddings(sentence=sentence, vectors=arr / norms)


class Scorer:
    """Base handle: capability checks plus a parallelism bound."""

    def __init__(self, model_id: str, capabilities: frozenset[str], max_parallel: int = 4):
        if not model_id:
            raise ScorerConfigError("model_id must be non-empty")
        if max_parallel < 1:
            raise ScorerConfigError("max_parallel must be >= 1")
        unknown = capabilities - ALL_CAPABILITIES
        if unknown:
            raise ScorerConfigError(f"unknown capabilities: {sorted(unknown)}")
        self.model_id = model_id
        self.capabilities = capabilities
        self.max_parallel = max_parallel
        self._slots = threading.BoundedSemaphore(max_parallel)

    def _require(self, cap: str) -> None:
        if cap not in self.capabilities:
            raise CapabilityError(f"{self.model_id}: no {cap} capability")

    def get_logprobs(self, text: str) -> TokenLogProbs:
        self._require(LOGPROBS)
        with self._slots:
            return self._logprobs(text)

    def get_embeddings(self, sentence: str) -> SentenceEmbeddings:
        self._require(EMBED)
        if not sentence.strip():
            raise EmptyInput("empty sentence")
        with self._slots:
            return self._embeddings(sentence)

    def generate(self, prompt: str, config: GenerationConfig) -> list[str]:
        self._require(GENERATE)
        with self._slots:
            return self._generate(prompt, config)

    def _logprobs(self, text: str) -> TokenLogProbs:
        raise NotImplementedError

    def _embeddings(self, sentence: str) -> SentenceEmbeddings:
        raise NotImplementedError

    def _generate(self, prompt: str, config: GenerationConfig) -> list[str]:
        raise NotImplementedError


class StubScorer(Scorer):
    """Deterministic pseudo-model: outputs derive from sha256 of the inputs.

    Useful for offline pipeline runs and CI; identical inputs produce
    identical outputs on every platform.
    """

    def __init__(self, model_id: str, capabilities: frozenset[str] = ALL_CAPABILITIES,
                 max_parallel: int = 4, dim: int = 16, mode: str = "sample"):
        super().__init__(model_id, capabilities, max_parallel)
        if dim < 2:
            raise ScorerConfigError("stub dim must be >= 2")
        if mode not in ("sample", "echo"):
            raise ScorerConfigError(f"unknown stub mode {mode!r}")
        self.dim = dim
        self.mode = mode

    def _floats(self, key: str, n: int) -> list[float]:
        out: list[float] = []
        counter = 0
        while len(out) < n:
            digest = hashlib.sha256(f"{self.model_id}|{key}|{counter}".encode("utf-8")).digest()
            for i in range(0, 32, 8):
                if len(out) >= n:
                    break
                val = int.from_bytes(digest[i : i + 8], "big")
                out.append(val / 2.0**64 * 2.0 - 1.0)
            counter += 1
        return out

    def _logprobs(self, text: str) -> TokenLogProbs:
        tokens = text.split()
        logprobs = []
        for j, tok in enumerate(tokens):
            u = (self._floats(f"lp|{j}|{tok}", 1)[0] + 1.0) / 2.0
            logprobs.append(-0.5 - 5.0 * u)
        return make_token_logprobs(self.model_id, tokens, logprobs)

    def _embeddings(self, sentence: str) -> SentenceEmbeddings:
        tokens = sentence.split()
        vectors = [self._floats(f"emb|{tok}", self.dim) for tok in tokens]
        return normalized_embeddings(sentence, vectors)

    def _generate(self, prompt: str, config: GenerationConfig) -> list[str]:
        if self.mode == "echo":
            return [prompt] * config.n_samples
        words = prompt.split() or ["blank"]
        seed_key = request_hash(GENERATE, {"prompt": prompt, **config.payload()})
        rng = random.Random(int(seed_key, 16))
        length = min(config.max_tokens, max(8, 2 * len(words)))
        return [
            " ".join(rng.choice(words) for _ in range(length))
            for _ in range(config.n_samples)
        ]


class CacheScorer(Scorer):
    """Content-addressed response store: store/<model_id>/<op>/<sha256(input)>.json.

    A miss raises CacheMiss naming the hash unless a fallback scorer is
    configured, in which case the fallback's response is stored and
    returned. Cache files are bit-deterministic.
    """

    def __init__(self, model_id: str, store: str | Path, capabilities: frozenset[str] = ALL_CAPABILITIES,
                 max_parallel: int = 4, fallback: Scorer | None = None, write: bool = True):
        super().__init__(model_id, capabilities, max_parallel)
        self.store = Path(store)
        self.fallback = fallback
        self.write = write
        if fallback is not None and fallback.model_id != model_id:
            log.warning(
                "cache model_id %r differs from fallback model_id %r",
                model_id, fallback.model_id,
            )

    def _path(self, op: str, digest: str) -> Path:
        return self.store / self.model_id / op / f"{digest}.json"

    def _load(self, op: str, payload: dict) -> dict | None:
        path = self._path(op, request_hash(op, payload))
        if not path.is_file():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def _save(self, op: str, payload: dict, record: dict) -> None:
        if not self.write:
            return
        path = self._path(op, request_hash(op, payload))
        path.parent.mkdir(parents=True, exist_ok=True)
        blob = json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        tmp = path.with_suffix(".tmp")
        tmp.write_text(blob + "\n", encoding="utf-8")
        os.replace(tmp, path)

    def _miss(self, op: str, payload: dict) -> CacheMiss:
        return CacheMiss(f"{self.model_id}/{op}: no cached response for {request_hash(op, payload)}")

    def _logprobs(self, text: str) -> TokenLogProbs:
        payload = {"text": text}
        record = self._load(LOGPROBS, payload)
        if record is None:
            if self.fallback is None:
                raise self._miss(LOGPROBS, payload)
            result = self.fallback.get_logprobs(text)
            record = {
                "model_id": result.model_id,
                "tokens": list(result.tokens),
                "logprobs": list(result.logprobs),
            }
            self._save(LOGPROBS, payload, record)
        return make_token_logprobs(record["model_id"], record["tokens"], record["logprobs"])

    def _embeddings(self, sentence: str) -> SentenceEmbeddings:
        payload = {"text": sentence}
        record = self._load(EMBED, payload)
        if record is None:
            if self.fallback is None:
                raise self._miss(EMBED, payload)
            result = self.fallback.get_embeddings(sentence)
            record = {
                "model_id": self.model_id,
                "dim": result.dim,
                "vectors": [[float(x) for x in row] for row in result.vectors],
            }
            self._save(EMBED, payload, record)
        return SentenceEmbeddings(sentence=sentence, vectors=np.asarray(record["vectors"], dtype=np.float64))

    def _generate(self, prompt: str, config: GenerationConfig) -> list[str]:
        payload = {"prompt": prompt, **config.payload()}
        record = self._load(GENERATE, payload)
        if record is None:
            if self.fallback is None:
                raise self._miss(GENERATE, payload)
            texts = self.fallback.generate(prompt, config)
            record = {"model_id": self.model_id, "texts": list(texts)}
            self._save(GENERATE, payload, record)
        return list(record["texts"])


class HttpScorer(Scorer):
    """Client for the model-serving sidecar protocol.

    Transport failures are retried with exponential backoff; backend error
    payloads ({code, message}) are deterministic and never retried.
    """

    def __init__(self, model_id: str, url: str, capabilities: frozenset[str] = ALL_CAPABILITIES,
                 max_parallel: int = 4, timeout: float = 60.0,
                 backoff: Sequence[float] = (0.5, 2.0, 8.0)):
        super().__init__(model_id, capabilities, max_parallel)
        self.url = url.rstrip("/")
        self.timeout = timeout
        self.backoff = tuple(backoff)

    def _post(self, endpoint: str, payload: dict) -> dict:
        last_exc: Exception | None = None
        for attempt, delay in enumerate(self.backoff + (None,)):
            try:
                resp = requests.post(self.url + endpoint, json=payload, timeout=self.timeout)
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_exc = exc
                if delay is None:
                    break
                log.warning("transport error on %s (attempt %d): %s", endpoint, attempt + 1, exc)
                time.sleep(delay)
                continue
            if resp.status_code != 200:
                try:
                    err = resp.json()
                    message = f"{err.get('code', 'ERROR')}: {err.get('message', resp.text)}"
                except ValueError:
                    message = f"HTTP {resp.status_code}: {resp.text[:200]}"
                raise BackendError(f"{self.model_id}{endpoint} -> {message}")
            try:
                return resp.json()
            except ValueError as exc:
                raise BackendError(f"{self.model_id}{endpoint}: non-JSON response") from exc
        raise TransportError(f"{self.model_id}{endpoint}: {last_exc}")

    def _logprobs(self, text: str) -> TokenLogProbs:
        record = self._post("/v1/logprobs", {"model": self.model_id, "text": text})
        return make_token_logprobs(self.model_id, record["tokens"], record["logprobs"])

    def _embeddings(self, sentence: str) -> SentenceEmbeddings:
        record = self._post("/v1/embed", {"model": self.model_id, "text": sentence})
        return normalized_embeddings(sentence, record["vectors"], record.get("special"))

    def _generate(self, prompt: str, config: GenerationConfig) -> list[str]:
        payload = {"model": self.model_id, "prompt": prompt, **config.payload()}
        record = self._post("/v1/generate", payload)
        return list(record["texts"])


# --------------------------------------------------------------------------
# configuration files
# --------------------------------------------------------------------------

def _parse_kv(path: Path) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScorerConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out

def _parse_capabilities(raw: str | None) -> frozenset[str]:
    if raw is None:
        return ALL_CAPABILITIES
    caps = frozenset(c.strip() for c in raw.split(",") if c.strip())
    unknown = caps - ALL_CAPABILITIES
    if unknown:
        raise ScorerConfigError(f"unknown capabilities: {sorted(unknown)}")
    return caps


def load_scorer(config_path: str | Path, allow_network: bool = False) -> Scorer:
    """Build a scorer from a key=value config file.

    Relative paths inside the config resolve against the config file's
    directory. A cache backend may name a `fallback` config; an http
    fallback additionally requires allow_network (the --allow-network flag)
    so cache misses never silently reach the network.
    """
    path = Path(config_path)
    if not path.is_file():
        raise ScorerConfigError(f"scorer config not found: {path}")
    kv = _parse_kv(path)
    backend = kv.get("backend")
    model_id = kv.get("model_id", "")
    caps = _parse_capabilities(kv.get("capabilities"))
    max_parallel = int(kv.get("max_parallel", "4"))

    if backend == "stub":
        return StubScorer(model_id, caps, max_parallel, dim=int(kv.get("dim", "16")),
                          mode=kv.get("mode", "sample"))
    if backend == "http":
        if "url" not in kv:
            raise ScorerConfigError(f"{path}: http backend requires url")
        return HttpScorer(model_id, kv["url"], caps, max_parallel,
                          timeout=float(kv.get("timeout", "60")))
    if backend == "cache":
        if "path" not in kv:
            raise ScorerConfigError(f"{path}: cache backend requires path")
        store = Path(kv["path"])
        if not store.is_absolute():
            store = path.parent / store
        fallback = None
        if "fallback" in kv:
            fb_path = Path(kv["fallback"])
            if not fb_path.is_absolute():
                fb_path = path.parent / fb_path
            fallback = load_scorer(fb_path, allow_network=allow_network)
            if isinstance(fallback, HttpScorer) and not allow_network:
                raise ScorerConfigError(
                    f"{path}: http fallback requires --allow-network"
                )
        return CacheScorer(model_id, store, caps, max_parallel, fallback=fallback,
                           write=kv.get("write", "true").lower() != "false")
    raise ScorerConfigError(f"{path}: unknown backend {backend!r}")
