"""Likelihood scoring primitives.

All scores live in the log domain and are per-token means, so windows and
sequences of different lengths stay commensurable. For an original/shuffled
pair the token counts are identical, so the decision rule (higher mean wins)
is equivalent to comparing total log-likelihoods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

from .corpus import Document

Span = tuple[int, int]


@dataclass(frozen=True)
class ScoreResult:
    doc_id: str
    score: float
    token_count: int
    per_window: tuple[tuple[Span, float], ...] | None = None

    def __post_init__(self):
        if math.isnan(self.score):
            raise ValueError("score must not be NaN")
        if self.token_count < 1:
            raise ValueError("token_count must be positive")


@dataclass(frozen=True)
class WindowConfig:
    """Sliding-window parameters for sequences past a model's length limit."""

    window_tokens: int = 512
    overlap_fraction: float = 0.5

    def __post_init__(self):
        if self.window_tokens < 1:
            raise ValueError("window_tokens must be positive")
        if not 0.0 < self.overlap_fraction < 1.0:
            raise ValueError("overlap_fraction must be in (0, 1)")
        if self.stride < 1:
            raise ValueError("window stride must be at least 1 token")

    @property
    def stride(self) -> int:
        return int(self.window_tokens * (1.0 - self.overlap_fraction))


class ConditionalProvider(Protocol):
    """log P(token | prefix) for autoregressive (chain-rule) scoring."""

    def log_prob(self, prefix: Sequence[str], token: str) -> float: ...


class MaskedProvider(Protocol):
    """log P(tokens[index] | all other tokens) for masked-LM scoring."""

    def masked_log_prob(self, tokens: Sequence[str], index: int) -> float: ...


class DocumentScorer(Protocol):
    """What the evaluation runner needs from any scorer, built-in or external."""

    name: str

    def score_document(self, doc: Document) -> ScoreResult: ...


def _checked_mean(logps: list[float], what: str) -> float:
    for lp in logps:
        if math.isnan(lp):
            raise ValueError(f"non-finite log-probability from {what}")
    return math.fsum(logps) / len(logps)


def generative_score(
    tokens: Sequence[str], model: ConditionalProvider, doc_id: str = ""
) -> ScoreResult:
    """Per-token mean of the chain-rule log-likelihood:
    (1/N) * sum_i log P(W_i | W_1 .. W_{i-1})."""
    if not tokens:
        raise ValueError("empty sequence")
    logps = [model.log_prob(tokens[:i], tokens[i]) for i in range(len(tokens))]
    return ScoreResult(doc_id=doc_id, score=_checked_mean(logps, "provider"), token_count=len(tokens))


def window_spans(n: int, cfg: WindowConfig) -> list[Span]:
    """Window start/end offsets: 0, stride, 2*stride, ... with the final
    window right-aligned so the tail is never left unscored."""
    if n <= cfg.window_tokens:
        return [(0, n)]
    spans: list[Span] = []
    start = 0
    while start + cfg.window_tokens < n:
        spans.append((start, start + cfg.window_tokens))
        start += cfg.stride
    spans.append((n - cfg.window_tokens, n))
    return spans


def sliding_window_score(
    tokens: Sequence[str],
    model: ConditionalProvider,
    cfg: WindowConfig | None = None,
    doc_id: str = "",
) -> ScoreResult:
    """Generative score with windowing: short sequences are scored whole
    (bit-identical to generative_score); long ones are split into
    overlapping windows, each scored independently, and the document score
    is the unweighted mean of the per-window per-token means."""
    cfg = cfg or WindowConfig()
    if not tokens:
        raise ValueError("empty sequence")
    if len(tokens) <= cfg.window_tokens:
        return generative_score(tokens, model, doc_id)
    per_window: list[tuple[Span, float]] = []
    for start, end in window_spans(len(tokens), cfg):
        result = generative_score(tokens[start:end], model)
        per_window.append(((start, end), result.score))
    score = math.fsum(s for _, s in per_window) / len(per_window)
    return ScoreResult(
        doc_id=doc_id, score=score, token_count=len(tokens), per_window=tuple(per_window)
    )


def mlm_score(
    tokens: Sequence[str], mlm: MaskedProvider, doc_id: str = ""
) -> ScoreResult:
    """Masked-LM pseudo-log-likelihood: (1/N) * sum_i log P(W_i | W_\\i),
    one provider call per position."""
    if not tokens:
        raise ValueError("empty sequence")
    logps = [mlm.masked_log_prob(tokens, i) for i in range(len(tokens))]
    return ScoreResult(doc_id=doc_id, score=_checked_mean(logps, "mlm provider"), token_count=len(tokens))


def sliding_window_mlm_score(
    tokens: Sequence[str],
    mlm: MaskedProvider,
    cfg: WindowConfig | None = None,
    doc_id: str = "",
) -> ScoreResult:
    """mlm_score with the same windowing rule as sliding_window_score, for
    masked providers with a context-length limit."""
    cfg = cfg or WindowConfig()
    if not tokens:
        raise ValueError("empty sequence")
    if len(tokens) <= cfg.window_tokens:
        return mlm_score(tokens, mlm, doc_id)
    per_window: list[tuple[Span, float]] = []
    for start, end in window_spans(len(tokens), cfg):
        result = mlm_score(tokens[start:end], mlm)
        per_window.append(((start, end), result.score))
    score = math.fsum(s for _, s in per_window) / len(per_window)
    return ScoreResult(
        doc_id=doc_id, score=score, token_count=len(tokens), per_window=tuple(per_window)
    )
