"""Built-in interpolated n-gram language model.

A desk-scale stand-in for large generative scorers: deterministic, trains in
seconds, and exhibits the coherence signal because boundary markers let
cross-sentence n-grams straddle exactly the transitions that shuffling
destroys. Never train it on shuffled text; the zero-shot setting forbids it
and train_ngram does not provide a way to do it by accident.

Smoothing is recursive interpolation with per-order weights over a uniform
floor:

    P_0(w)       = 1 / |V|
    P_k(w | ctx) = lam_k * ML_k(w | ctx) + (1 - lam_k) * P_{k-1}(w | ctx[1:])

with unseen contexts falling through to the next order down. Every token in
the vocabulary keeps probability > 0 in every context.
"""

from __future__ import annotations

import gzip
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

from .corpus import Corpus, Document
from .scoring import ScoreResult, WindowConfig, sliding_window_score

BOUNDARY = "<sb>"
BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

# lam_1 high because unigram estimates are reliable; higher orders split the
# remainder evenly.
DEFAULT_UNIGRAM_WEIGHT = 0.9
DEFAULT_HIGHER_WEIGHT = 0.5

_CTX_SEP = "\x1f"


def default_smoothing(order: int) -> tuple[float, ...]:
    return (DEFAULT_UNIGRAM_WEIGHT,) + (DEFAULT_HIGHER_WEIGHT,) * (order - 1)


def assemble_document_tokens(doc: Document) -> list[str]:
    """Token stream for a document: sentence tokens joined by a boundary
    marker, closed with an end marker. Shared by training and scoring."""
    stream: list[str] = []
    for i, sentence in enumerate(doc.sentences):
        if i > 0:
            stream.append(BOUNDARY)
        stream.extend(sentence.tokens)
    stream.append(EOS)
    return stream


@dataclass
class NgramModel:
    """Counts plus interpolation weights; immutable in practice after
    train_ngram returns, and safe to share across threads."""

    order: int
    counts: dict[int, dict[tuple[str, ...], dict[str, int]]]
    totals: dict[int, dict[tuple[str, ...], int]]
    vocabulary: frozenset[str]
    smoothing: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be at least 1")
        if not self.smoothing:
            self.smoothing = default_smoothing(self.order)
        if len(self.smoothing) != self.order:
            raise ValueError("need one interpolation weight per order")
        if any(not 0.0 < lam < 1.0 for lam in self.smoothing):
            raise ValueError("interpolation weights must be in (0, 1)")

    def _normalize(self, token: str) -> str:
        if token == BOS or token in self.vocabulary:
            return token
        return UNK

    def prob(self, context: Sequence[str], token: str) -> float:
        """Interpolated P(token | context); context is the full prefix, of
        which only the last order-1 tokens matter (BOS-padded when short)."""
        w = self._normalize(token)
        ctx = [self._normalize(c) for c in context[-(self.order - 1) :]] if self.order > 1 else []
        ctx = [BOS] * (self.order - 1 - len(ctx)) + ctx
        p = 1.0 / len(self.vocabulary)
        for k in range(1, self.order + 1):
            ctx_k = tuple(ctx[len(ctx) - (k - 1) :]) if k > 1 else ()
            total = self.totals[k].get(ctx_k)
            if not total:
                continue
            ml = self.counts[k][ctx_k].get(w, 0) / total
            lam = self.smoothing[k - 1]
            p = lam * ml + (1.0 - lam) * p
        return p

    def log_prob(self, prefix: Sequence[str], token: str) -> float:
        return math.log(self.prob(prefix, token))


def train_ngram(
    corpus: Corpus, order: int = 3, smoothing: Sequence[float] | None = None
) -> NgramModel:
    """Accumulate counts for orders 1..order over every document stream.

    Training text must be original-order text only; the zero-shot protocol
    forbids exposing any scorer to shuffled text.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    if not corpus.documents:
        raise ValueError("empty training corpus")
    counts: dict[int, dict[tuple[str, ...], dict[str, int]]] = {
        k: {} for k in range(1, order + 1)
    }
    totals: dict[int, dict[tuple[str, ...], int]] = {k: {} for k in range(1, order + 1)}
    vocab: set[str] = {BOUNDARY, EOS, UNK}
    for doc in corpus.documents:
        stream = [BOS] * (order - 1) + assemble_document_tokens(doc)
        for i in range(order - 1, len(stream)):
            w = stream[i]
            vocab.add(w)
            for k in range(1, order + 1):
                ctx = tuple(stream[i - (k - 1) : i])
                level = counts[k]
                bucket = level.get(ctx)
                if bucket is None:
                    bucket = level[ctx] = {}
                bucket[w] = bucket.get(w, 0) + 1
                totals[k][ctx] = totals[k].get(ctx, 0) + 1
    model = NgramModel(
        order=order,
        counts=counts,
        totals=totals,
        vocabulary=frozenset(vocab),
        smoothing=tuple(smoothing) if smoothing else (),
    )
    return model


def save_model(model: NgramModel, path: str) -> None:
    """Persist as gzipped JSON (mtime pinned, so the bytes are stable)."""
    payload = {
        "order": model.order,
        "smoothing": list(model.smoothing),
        "vocabulary": sorted(model.vocabulary),
        "counts": {
            str(k): {_CTX_SEP.join(ctx): bucket for ctx, bucket in level.items()}
            for k, level in model.counts.items()
        },
    }
    raw = json.dumps(payload, sort_keys=True, ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as fh:
        with gzip.GzipFile(filename="", fileobj=fh, mode="wb", mtime=0) as gz:
            gz.write(raw)


def load_model(path: str) -> NgramModel:
    with gzip.open(path, "rt", encoding="utf-8") as fh:
        payload = json.load(fh)
    counts: dict[int, dict[tuple[str, ...], dict[str, int]]] = {}
    totals: dict[int, dict[tuple[str, ...], int]] = {}
    for k_str, level in payload["counts"].items():
        k = int(k_str)
        counts[k] = {}
        totals[k] = {}
        for ctx_str, bucket in level.items():
            ctx = tuple(ctx_str.split(_CTX_SEP)) if ctx_str else ()
            counts[k][ctx] = {str(w): int(n) for w, n in bucket.items()}
            totals[k][ctx] = sum(counts[k][ctx].values())
    return NgramModel(
        order=int(payload["order"]),
        counts=counts,
        totals=totals,
        vocabulary=frozenset(payload["vocabulary"]),
        smoothing=tuple(payload["smoothing"]),
    )


class NgramScorer:
    """DocumentScorer over an NgramModel with sliding-window handling."""

    def __init__(self, model: NgramModel, window: WindowConfig | None = None):
        self.model = model
        self.window = window or WindowConfig()
        self.name = f"ngram-{model.order}"

    def score_document(self, doc: Document) -> ScoreResult:
        tokens = assemble_document_tokens(doc)
        return sliding_window_score(tokens, self.model, self.window, doc_id=doc.id)
