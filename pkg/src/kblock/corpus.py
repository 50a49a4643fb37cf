"""Corpus ingestion: JSONL/plain-text loading, sentence segmentation,
word tokenization, and the 20-sentence truncation rule.

Segmentation is rule-based on purpose: deterministic, dependency-free, and
good enough for a harness that operates on whole sentences. Callers with
gold sentence boundaries should ingest pre-segmented JSONL instead.
"""

from __future__ import annotations

import json
import string
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

# Abbreviations whose trailing period never ends a sentence. Extend via the
# `abbreviations` argument of segment_sentences / ingest_*.
DEFAULT_ABBREVIATIONS = (
    "Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "St.", "Jr.", "Sr.",
    "U.S.", "U.K.", "e.g.", "i.e.", "etc.", "vs.", "Inc.", "Co.",
    "Fig.", "No.", "a.m.", "p.m.",
)

_TERMINALS = ".!?"
_CLOSERS = "\"')]}’”"


def _is_punct(ch: str) -> bool:
    return ch in string.punctuation or unicodedata.category(ch).startswith("P")


@dataclass(frozen=True)
class Sentence:
    """One sentence: raw text plus its deterministic word tokenization."""

    text: str
    tokens: tuple[str, ...]

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("sentence must have at least one token")
        if self.text != self.text.strip():
            raise ValueError("sentence text must not have surrounding whitespace")


def make_sentence(text: str) -> Sentence:
    return Sentence(text=text, tokens=tokenize(text))


@dataclass(frozen=True)
class Document:
    id: str
    sentences: tuple[Sentence, ...]
    source_meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.sentences:
            raise ValueError(f"document {self.id!r} has no sentences")

    def __len__(self) -> int:
        return len(self.sentences)

    def sentence_texts(self) -> tuple[str, ...]:
        return tuple(s.text for s in self.sentences)


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]
    domain: str = "unknown"

    def __post_init__(self):
        seen: set[str] = set()
        for doc in self.documents:
            if doc.id in seen:
                raise ValueError(f"duplicate document id {doc.id!r} in corpus")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)


@dataclass
class SkippedLine:
    line_no: int
    doc_id: str
    reason: str


@dataclass
class IngestReport:
    """What ingestion dropped and why; documents are never dropped silently."""

    skipped: list[SkippedLine] = field(default_factory=list)
    n_ingested: int = 0


def tokenize(text: str) -> tuple[str, ...]:
    """Lowercase word tokenization for the built-in scorer.

    Splits on whitespace, then peels leading/trailing punctuation into
    standalone tokens. A trailing period stays attached when the word body
    contains an internal period ("U.S." stays one token), so abbreviations
    survive as units. External scorers never see these tokens; they
    tokenize raw sentence text themselves.
    """
    tokens: list[str] = []
    for chunk in text.lower().split():
        left: list[str] = []
        right: list[str] = []
        while chunk and _is_punct(chunk[0]):
            left.append(chunk[0])
            chunk = chunk[1:]
        while chunk and _is_punct(chunk[-1]):
            if chunk[-1] == "." and "." in chunk[:-1]:
                break
            right.append(chunk[-1])
            chunk = chunk[:-1]
        right.reverse()
        tokens.extend(left)
        if chunk:
            tokens.append(chunk)
        tokens.extend(right)
    return tuple(tokens)


def _abbrev_set(abbreviations: Iterable[str] | None) -> frozenset[str]:
    items = DEFAULT_ABBREVIATIONS if abbreviations is None else tuple(abbreviations)
    return frozenset(a.lower() for a in items)


def _is_boundary(text: str, i: int, abbrevs: frozenset[str]) -> int | None:
    """If the terminal at index ``i`` ends a sentence, return the index just
    past the terminal and any closing quotes/brackets; otherwise None."""
    j = i + 1
    while j < len(text) and text[j] in _CLOSERS:
        j += 1
    if j < len(text) and not text[j].isspace():
        # mid-token period: "U.S", "3.14", "e.g"
        return None
    if text[i] == ".":
        k = i
        while k > 0 and not text[k - 1].isspace():
            k -= 1
        word = text[k : i + 1]
        while word and _is_punct(word[0]) and word[0] != ".":
            word = word[1:]
        if word.lower() in abbrevs:
            return None
    return j


def segment_sentences(
    text: str, abbreviations: Iterable[str] | None = None
) -> list[Sentence]:
    """Split raw text into sentences at terminal punctuation (., !, ?).

    A terminal period attached to a known abbreviation does not split.
    Internal whitespace is normalized to single spaces; no non-whitespace
    character is ever dropped. Text with no terminal punctuation is one
    sentence.
    """
    if not text.strip():
        raise ValueError("empty document")
    abbrevs = _abbrev_set(abbreviations)
    sentences: list[Sentence] = []
    start = 0
    i = 0
    while i < len(text):
        if text[i] in _TERMINALS:
            end = _is_boundary(text, i, abbrevs)
            if end is not None:
                piece = " ".join(text[start:end].split())
                if piece:
                    sentences.append(make_sentence(piece))
                start = end
                i = end
                continue
        i += 1
    tail = " ".join(text[start:].split())
    if tail:
        sentences.append(make_sentence(tail))
    return sentences


def truncate(doc: Document, max_sentences: int = 20) -> Document:
    """First ``max_sentences`` sentences of ``doc``; a no-op at or under the
    limit. Runs before any shuffling so both members of a test pair see the
    same truncation."""
    if max_sentences < 1:
        raise ValueError("max_sentences must be positive")
    if len(doc.sentences) <= max_sentences:
        return doc
    return Document(
        id=doc.id,
        sentences=doc.sentences[:max_sentences],
        source_meta=doc.source_meta,
    )


def _doc_from_sentence_texts(
    doc_id: str, texts: Sequence[str], meta: Mapping[str, str]
) -> Document | None:
    kept = [" ".join(t.split()) for t in texts]
    sentences = tuple(make_sentence(t) for t in kept if t)
    if not sentences:
        return None
    return Document(id=doc_id, sentences=sentences, source_meta=dict(meta))


def ingest_jsonl(
    path: str | Path,
    pre_segmented: bool = False,
    domain: str | None = None,
    abbreviations: Iterable[str] | None = None,
) -> tuple[Corpus, IngestReport]:
    """Load a JSONL corpus: one document per line, file order preserved.

    Each line is an object with "text" (string) or "sentences" (list of
    strings), optional "id" and "meta". With ``pre_segmented`` the given
    sentences are used verbatim; otherwise "text" runs through
    segment_sentences. Empty documents are skipped and recorded in the
    returned IngestReport. A malformed line raises, naming its line number.
    """
    path = Path(path)
    report = IngestReport()
    documents: list[Document] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {line_no}: malformed JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise ValueError(f"{path}: line {line_no}: expected a JSON object")
            doc_id = str(obj.get("id", f"doc-{line_no}"))
            meta = {str(k): str(v) for k, v in (obj.get("meta") or {}).items()}
            doc: Document | None
            if "sentences" in obj and (pre_segmented or "text" not in obj):
                raw = obj["sentences"]
                if not isinstance(raw, list) or not all(isinstance(s, str) for s in raw):
                    raise ValueError(
                        f"{path}: line {line_no}: 'sentences' must be a list of strings"
                    )
                doc = _doc_from_sentence_texts(doc_id, raw, meta)
            elif "text" in obj:
                if not isinstance(obj["text"], str):
                    raise ValueError(f"{path}: line {line_no}: 'text' must be a string")
                if not obj["text"].strip():
                    doc = None
                else:
                    sentences = segment_sentences(obj["text"], abbreviations)
                    doc = Document(id=doc_id, sentences=tuple(sentences), source_meta=meta)
            else:
                raise ValueError(
                    f"{path}: line {line_no}: object needs a 'text' or 'sentences' field"
                )
            if doc is None:
                report.skipped.append(SkippedLine(line_no, doc_id, "empty text"))
                continue
            documents.append(doc)
    report.n_ingested = len(documents)
    corpus = Corpus(documents=tuple(documents), domain=domain or path.stem)
    return corpus, report


def ingest_text(
    path: str | Path,
    domain: str | None = None,
    abbreviations: Iterable[str] | None = None,
) -> tuple[Corpus, IngestReport]:
    """Plain-text mode: one document per file, blank lines separate
    paragraphs (a sentence never spans a paragraph break). ``path`` may be
    a single file or a directory of ``*.txt`` files (read in sorted order).
    """
    path = Path(path)
    files = sorted(path.glob("*.txt")) if path.is_dir() else [path]
    report = IngestReport()
    documents: list[Document] = []
    for file_no, file in enumerate(files, start=1):
        text = file.read_text(encoding="utf-8")
        sentences: list[Sentence] = []
        for paragraph in text.split("\n\n"):
            if paragraph.strip():
                sentences.extend(segment_sentences(paragraph, abbreviations))
        if not sentences:
            report.skipped.append(SkippedLine(file_no, file.stem, "empty text"))
            continue
        documents.append(
            Document(id=file.stem, sentences=tuple(sentences), source_meta={"origin": str(file)})
        )
    report.n_ingested = len(documents)
    corpus = Corpus(documents=tuple(documents), domain=domain or path.stem)
    return corpus, report
