"""Per-token mean log-likelihood scoring over the tiny models.

Long inputs are split into 50%-overlap windows (final window right-aligned
to cover the tail); each window is scored independently and the document
score is the unweighted mean of per-window per-token means, matching the
harness's own windowing semantics.
"""

from __future__ import annotations

import math

import torch
import torch.nn.functional as F

from .model import TinyTransformerLM
from .vocab import Vocab, sentence_stream

MLM_BATCH_ROWS = 64


def window_spans(n: int, window: int, overlap: float = 0.5) -> list[tuple[int, int]]:
    if n <= window:
        return [(0, n)]
    stride = max(1, int(window * (1.0 - overlap)))
    spans = []
    start = 0
    while start + window < n:
        spans.append((start, start + window))
        start += stride
    spans.append((n - window, n))
    return spans


class BridgeScorer:
    def __init__(self, causal: tuple[TinyTransformerLM, Vocab] | None = None,
                 masked: tuple[TinyTransformerLM, Vocab] | None = None):
        self.causal = causal
        self.masked = masked
        if causal is None and masked is None:
            raise ValueError("at least one model is required")

    @property
    def modes(self) -> list[str]:
        modes = []
        if self.causal is not None:
            modes.append("generative")
        if self.masked is not None:
            modes.append("mlm")
        return modes

    @property
    def max_tokens(self) -> int:
        models = [pair[0] for pair in (self.causal, self.masked) if pair is not None]
        # one position is reserved for the BOS prefix in generative mode
        return min(m.config.max_positions for m in models) - 1

    def score(self, sentences: list[str], mode: str) -> tuple[float, int]:
        if mode == "generative":
            if self.causal is None:
                raise ValueError("generative mode not loaded")
            return self._score_causal(sentences)
        if mode == "mlm":
            if self.masked is None:
                raise ValueError("mlm mode not loaded")
            return self._score_masked(sentences)
        raise ValueError(f"unsupported mode {mode!r}")

    @torch.no_grad()
    def _score_causal(self, sentences: list[str]) -> tuple[float, int]:
        model, vocab = self.causal
        model.eval()
        ids = sentence_stream(sentences, vocab)
        if not ids:
            raise ValueError("nothing to score")
        window_scores = []
        for start, end in window_spans(len(ids), self.max_tokens):
            target = torch.tensor(ids[start:end], dtype=torch.long)
            inputs = torch.cat(
                [torch.tensor([vocab.bos_id], dtype=torch.long), target[:-1]]
            ).unsqueeze(0)
            logits = model(inputs)
            logprobs = F.log_softmax(logits[0], dim=-1)
            token_logprobs = logprobs[torch.arange(len(target)), target]
            window_scores.append(token_logprobs.mean().item())
        return math.fsum(window_scores) / len(window_scores), len(ids)

    @torch.no_grad()
    def _score_masked(self, sentences: list[str]) -> tuple[float, int]:
        model, vocab = self.masked
        model.eval()
        ids = sentence_stream(sentences, vocab)
        if not ids:
            raise ValueError("nothing to score")
        window_scores = []
        for start, end in window_spans(len(ids), self.max_tokens):
            window = torch.tensor(ids[start:end], dtype=torch.long)
            length = len(window)
            position_logprobs = []
            for row_start in range(0, length, MLM_BATCH_ROWS):
                row_end = min(row_start + MLM_BATCH_ROWS, length)
                rows = window.unsqueeze(0).repeat(row_end - row_start, 1)
                positions = torch.arange(row_start, row_end)
                rows[torch.arange(len(positions)), positions] = vocab.mask_id
                logits = model(rows)
                logprobs = F.log_softmax(logits, dim=-1)
                picked = logprobs[
                    torch.arange(len(positions)), positions, window[positions]
                ]
                position_logprobs.append(picked)
            all_logprobs = torch.cat(position_logprobs)
            window_scores.append(all_logprobs.mean().item())
        return math.fsum(window_scores) / len(window_scores), len(ids)
