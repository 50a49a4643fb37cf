from __future__ import annotations

import sys
from pathlib import Path

import pytest

from kblock.corpus import Corpus, Document, make_sentence
from kblock.rng import derive_seed

MOCK_PROVIDER = Path(__file__).parent / "mock_provider.py"


def mock_cmd(*extra: str) -> list[str]:
    return [sys.executable, str(MOCK_PROVIDER), *extra]


def make_doc(doc_id: str, texts: list[str]) -> Document:
    return Document(id=doc_id, sentences=tuple(make_sentence(t) for t in texts))


def numbered_doc(doc_id: str, n: int) -> Document:
    return make_doc(doc_id, [f"line {i} of {doc_id}" for i in range(n)])


def numbered_corpus(n_docs: int, sentences_each: int, domain: str = "test") -> Corpus:
    docs = tuple(numbered_doc(f"doc-{i:04d}", sentences_each) for i in range(n_docs))
    return Corpus(documents=docs, domain=domain)


class OracleScorer:
    """+1 for documents still in their original order, -1 otherwise."""

    name = "oracle"

    def __init__(self, corpus: Corpus):
        self._originals = {doc.id: doc.sentence_texts() for doc in corpus.documents}

    def score_document(self, doc):
        from kblock.scoring import ScoreResult

        original = self._originals[doc.id][: len(doc.sentences)]
        score = 1.0 if doc.sentence_texts() == original else -1.0
        return ScoreResult(doc_id=doc.id, score=score, token_count=1)


class AntiOracleScorer(OracleScorer):
    name = "anti-oracle"

    def score_document(self, doc):
        from dataclasses import replace

        result = super().score_document(doc)
        return replace(result, score=-result.score)


class ConstantScorer:
    name = "constant"

    def __init__(self, value: float = -2.0):
        self.value = value

    def score_document(self, doc):
        from kblock.scoring import ScoreResult

        return ScoreResult(doc_id=doc.id, score=self.value, token_count=1)


class CoinScorer:
    """Seeded fair coin: scores are uniform hashes of (seed, content)."""

    name = "coin"

    def __init__(self, seed: int):
        self.seed = seed

    def score_document(self, doc):
        from kblock.scoring import ScoreResult

        u = derive_seed(self.seed, *doc.sentence_texts()) / 2.0**64
        return ScoreResult(doc_id=doc.id, score=u, token_count=1)


@pytest.fixture
def tiny_corpus() -> Corpus:
    return numbered_corpus(6, 8)
