"""Style-appropriateness as a log-likelihood ratio between two language models.

The score contrasts a domain-tuned model A with a general model V over the
same token sequence: C = -sum_j (log p_A(t_j | ctx) - log p_V(t_j | ctx)).
Positive C means the text is more probable under the general model, i.e.
written in a style better suited to a lay audience.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

# per-token floor in nats, guarding against backend -inf for filtered tokens
LOGPROB_FLOOR = -30.0


class TokenizationMismatch(ValueError):
    """The two models tokenized the text differently; their ratios are incomparable."""


@dataclass(frozen=True)
class TokenLogProbs:
    """Per-position conditional natural-log probabilities from one model."""

    model_id: str
    tokens: tuple[str, ...]
    logprobs: tuple[float, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.logprobs):
            raise ValueError("tokens and logprobs must have equal length")
        for lp in self.logprobs:
            if lp > 0.0:
                raise ValueError(f"logprob {lp} > 0")

    def __len__(self) -> int:
        return len(self.tokens)


def style_appropriateness(lp_a: TokenLogProbs, lp_v: TokenLogProbs) -> float:
    """Negated summed log ratio of A over V; positive favors the general model V.

    Both sequences must share one tokenization. Each logprob is floored at
    LOGPROB_FLOOR before differencing so the sum is always finite.
    """
    if lp_a.tokens != lp_v.tokens:
        raise TokenizationMismatch(
            f"incomparable tokenizations: {lp_a.model_id} vs {lp_v.model_id}"
        )
    total = 0.0
    for a, v in zip(lp_a.logprobs, lp_v.logprobs):
        total += max(a, LOGPROB_FLOOR) - max(v, LOGPROB_FLOOR)
    return -total


@dataclass(frozen=True)
class StyleScore:
    doc_id: str
    value: float
    per_token: float
    n_tokens: int
    model_a: str
    model_v: str


def score_sa(pair, scorer_a, scorer_v) -> StyleScore:
    """Score one pair's abstract under the tuned model A and general model V.

    A tokenizer disagreement between the two scorers is a configuration
    error, surfaced as TokenizationMismatch.
    """
    lp_a = scorer_a.get_logprobs(pair.abstract_text)
    lp_v = scorer_v.get_logprobs(pair.abstract_text)
    value = style_appropriateness(lp_a, lp_v)
    n = len(lp_a)
    return StyleScore(
        doc_id=pair.id,
        value=value,
        per_token=value / n if n else math.nan,
        n_tokens=n,
        model_a=lp_a.model_id,
        model_v=lp_v.model_id,
    )


def make_token_logprobs(model_id: str, tokens: Sequence[str], logprobs: Sequence[float]) -> TokenLogProbs:
    """Build a TokenLogProbs, clamping tiny positive rounding noise to zero."""
    cleaned = []
    for lp in logprobs:
        if 0.0 < lp <= 1e-6:
            lp = 0.0
        cleaned.append(float(lp))
    return TokenLogProbs(model_id=model_id, tokens=tuple(tokens), logprobs=tuple(cleaned))
