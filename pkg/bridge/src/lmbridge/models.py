"""Model slot runtime: checkpoint loading, windowed scoring, seeded generation.

Each slot owns a lock so its forward passes are serialized (one in-flight
batch per model keeps memory bounded); different slots run concurrently.
"""

from __future__ import annotations

import hashlib
import logging
import threading
from pathlib import Path

import torch

from .config import CAUSAL_LM, ENCODER, SlotConfig

log = logging.getLogger(__name__)


class SlotError(Exception):
    """Request-level failure; `code` travels in the error payload."""

    def __init__(self, code: str, message: str, status: int = 400):
        super().__init__(message)
        self.code = code
        self.status = status


def checkpoint_fingerprint(path: str | Path) -> str:
    """Digest of the checkpoint directory contents (names + bytes)."""
    digest = hashlib.sha256()
    root = Path(path)
    for file in sorted(p for p in root.rglob("*") if p.is_file()):
        digest.update(file.relative_to(root).as_posix().encode())
        digest.update(file.read_bytes())
    return digest.hexdigest()[:16]


class ModelSlot:
    """One served checkpoint: a causal LM (logprobs + generate) or an encoder (embed)."""

    def __init__(self, config: SlotConfig):
        from transformers import AutoModel, AutoModelForCausalLM, AutoTokenizer

        self.config = config
        self.name = config.name
        self.role = config.role
        self.tokenizer = AutoTokenizer.from_pretrained(config.tokenizer_path)
        if config.role == CAUSAL_LM:
            self.model = AutoModelForCausalLM.from_pretrained(config.path)
        else:
            self.model = AutoModel.from_pretrained(config.path)
        self.model.eval()
        self.fingerprint = checkpoint_fingerprint(config.path)
        model_config = self.model.config
        self.context_length = int(
            getattr(model_config, "n_positions", None)
            or getattr(model_config, "max_position_embeddings")
        )
        self._lock = threading.Lock()

    @property
    def capabilities(self) -> list[str]:
        return ["logprobs", "generate"] if self.role == CAUSAL_LM else ["embed"]

    @property
    def embedding_dim(self) -> int | None:
        if self.role != ENCODER:
            return None
        return int(self.model.config.hidden_size)

    def describe(self) -> dict:
        info = {
            "name": self.name,
            "role": self.role,
            "capabilities": self.capabilities,
            "context_length": self.context_length,
            "tokenizer": self.config.tokenizer_path,
            "fingerprint": self.fingerprint,
        }
        if self.role == ENCODER:
            info["dim"] = self.embedding_dim
            info["embedding_layer"] = self.config.embedding_layer
        return info

    def _require_role(self, role: str, op: str) -> None:
        if self.role != role:
            raise SlotError("CAPABILITY", f"slot {self.name} ({self.role}) cannot serve {op}")

    def _bos_id(self) -> int:
        tok = self.tokenizer
        for candidate in (tok.bos_token_id, tok.cls_token_id, tok.eos_token_id):
            if candidate is not None:
                return int(candidate)
        return 0

    # ------------------------------------------------------------------
    # logprobs
    # ------------------------------------------------------------------

    def logprobs(self, text: str) -> tuple[list[str], list[float]]:
        """Per-position conditional natural-log probabilities for text.

        Position j conditions on positions 1..j-1; the first token is
        scored against the beginning-of-sequence token. Texts longer than
        the context window are scored through overlapping windows, each
        position taking the window giving it the longest left context.
        """
        self._require_role(CAUSAL_LM, "logprobs")
        ids = self.tokenizer.encode(text, add_special_tokens=False)
        if not ids:
            raise SlotError("EMPTY_INPUT", "text produced no tokens")
        with self._lock:
            logprobs = self._causal_logprobs(ids, window=self.context_length - 1)
        tokens = self.tokenizer.convert_ids_to_tokens(ids)
        return tokens, logprobs

    def _causal_logprobs(self, ids: list[int], window: int | None) -> list[float]:
        """Windowed scoring; window=None scores the whole sequence at once."""
        n = len(ids)
        if window is None or window >= n:
            window = n
        if window < 2 and n > window:
            raise SlotError("CONTEXT", f"context window {window} too small", status=500)
        bos = self._bos_id()
        out: list[float | None] = [None] * n
        best_context = [-1] * n
        stride = max(1, window // 2)
        start = 0
        while True:
            chunk = ids[start : start + window]
            prefix = [bos] if start == 0 else []
            input_ids = torch.tensor([prefix + chunk])
            with torch.no_grad():
                logits = self.model(input_ids).logits[0].float()
            logsm = torch.log_softmax(logits, dim=-1)
            offset = len(prefix)
            for j, token_id in enumerate(chunk):
                pred_index = j + offset - 1
                if pred_index < 0:
                    continue  # window-initial token without context; earlier window covered it
                position = start + j
                context = j + offset
                if context > best_context[position]:
                    best_context[position] = context
                    out[position] = min(float(logsm[pred_index, token_id]), 0.0)
            if start + window >= n:
                break
            start += stride
        assert all(v is not None for v in out)
        return out  # type: ignore[return-value]

    # ------------------------------------------------------------------
    # embeddings
    # ------------------------------------------------------------------

    def embed(self, text: str) -> tuple[list[str], list[list[float]], list[bool], int]:
        """Hidden states from the configured layer; vectors are NOT normalized.

        Special tokens are kept but flagged so the client can drop them.
        """
        self._require_role(ENCODER, "embed")
        if not text.strip():
            raise SlotError("EMPTY_INPUT", "empty text")
        encoding = self.tokenizer(
            text,
            return_special_tokens_mask=True,
            truncation=True,
            max_length=self.context_length,
        )
        ids = encoding["input_ids"]
        special = [bool(flag) for flag in encoding["special_tokens_mask"]]
        if not any(not flag for flag in special):
            raise SlotError("EMPTY_INPUT", "text produced no content tokens")
        with self._lock:
            with torch.no_grad():
                output = self.model(torch.tensor([ids]), output_hidden_states=True)
            hidden = output.hidden_states[self.config.embedding_layer][0].float()
        tokens = self.tokenizer.convert_ids_to_tokens(ids)
        return tokens, hidden.tolist(), special, int(hidden.shape[1])

    # ------------------------------------------------------------------
    # generation
    # ------------------------------------------------------------------

    def generate(
        self, prompt: str, max_tokens: int, n_samples: int, temperature: float, seed: int
    ) -> tuple[list[str], bool]:
        """n_samples continuations; greedy at temperature 0, else seeded sampling.

        max_tokens is clamped to the context room left after the prompt;
        the clamp is reported to the caller.
        """
        self._require_role(CAUSAL_LM, "generate")
        if max_tokens <= 0 or n_samples <= 0 or temperature < 0:
            raise SlotError("BAD_REQUEST", "invalid generation parameters")
        ids = self.tokenizer.encode(prompt, add_special_tokens=False)
        if not ids:
            ids = [self._bos_id()]
        window = self.context_length - 1
        if len(ids) >= window:
            ids = ids[-(window // 2) :]  # keep the tail of an over-long prompt
        room = self.context_length - len(ids) - 1
        clamped = max_tokens > room
        max_new = min(max_tokens, room)
        eos = self.tokenizer.eos_token_id

        texts = []
        with self._lock:
            for sample in range(n_samples):
                generator = torch.Generator().manual_seed(seed + sample)
                sequence = list(ids)
                for _ in range(max_new):
                    input_ids = torch.tensor([sequence[-window:]])
                    with torch.no_grad():
                        logits = self.model(input_ids).logits[0, -1].float()
                    if temperature == 0.0:
                        next_id = int(torch.argmax(logits))
                    else:
                        probs = torch.softmax(logits / temperature, dim=-1)
                        next_id = int(torch.multinomial(probs, 1, generator=generator))
                    if eos is not None and next_id == eos:
                        break
                    sequence.append(next_id)
                texts.append(
                    self.tokenizer.decode(sequence[len(ids) :], skip_special_tokens=True)
                )
        return texts, clamped


def load_slots(configs) -> dict[str, ModelSlot]:
    slots = {}
    for config in configs:
        log.info("loading slot %s (%s) from %s", config.name, config.role, config.path)
        slots[config.name] = ModelSlot(config)
    return slots
