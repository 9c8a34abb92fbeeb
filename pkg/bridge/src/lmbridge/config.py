"""Slot configuration: which checkpoints to serve, and in what role."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

CAUSAL_LM = "causal_lm"
ENCODER = "encoder"
ROLES = (CAUSAL_LM, ENCODER)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SlotConfig:
    name: str
    path: str
    role: str
    tokenizer: str | None = None  # defaults to the checkpoint path
    embedding_layer: int = -1     # index into hidden_states; encoders only

    def __post_init__(self):
        if not self.name:
            raise ConfigError("slot name must be non-empty")
        if self.role not in ROLES:
            raise ConfigError(f"slot {self.name}: role must be one of {ROLES}")

    @property
    def tokenizer_path(self) -> str:
        return self.tokenizer or self.path


def load_config(path: str | Path) -> list[SlotConfig]:
    """Read the slot list from a JSON config file.

    Format: {"slots": [{"name", "path", "role", "tokenizer"?, "embedding_layer"?}, ...]}
    Checkpoints are operator-supplied local paths; nothing is ever downloaded.
    """
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    slots_raw = raw.get("slots")
    if not slots_raw:
        raise ConfigError(f"{path}: config must list at least one slot")
    slots = [SlotConfig(**entry) for entry in slots_raw]
    names = [s.name for s in slots]
    if len(set(names)) != len(names):
        raise ConfigError(f"{path}: slot names must be unique: {names}")
    return slots
