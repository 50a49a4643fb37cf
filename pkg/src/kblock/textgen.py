"""Seeded synthetic prose for self-contained benchmarks and demos.

Generates meeting-notes style documents: lowercase transcript lines, one
topic per document, with three kinds of sequential structure a likelihood
scorer can pick up on:

  * a distinctive opening line ("notes from the ... review"),
  * topic chaining, where a sentence opens by echoing the final noun of the
    sentence before it,
  * a closing line at the end.

The chain probability controls how strong the cross-sentence signal is.
Everything is driven by SplitMix64, so a (seed, config) pair always yields
byte-identical corpora.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus, Document, make_sentence
from .rng import SplitMix64, derive_seed

TOPICS = {
    "harbor": ["winch", "crane", "pier", "mooring", "dredger", "ferry", "buoy", "ramp"],
    "orchard": ["sapling", "irrigation", "trellis", "harvest", "press", "grafting", "crate", "fence"],
    "observatory": ["telescope", "dome", "mirror", "tracker", "sensor", "mount", "shutter", "archive"],
    "bakery": ["oven", "mixer", "proofer", "counter", "mill", "pantry", "register", "awning"],
    "railway": ["signal", "crossing", "platform", "ballast", "coupling", "depot", "switch", "trolley"],
    "library": ["catalog", "shelving", "scanner", "annex", "binding", "lectern", "skylight", "stacks"],
}

PEOPLE = ["mara", "jonas", "priya", "teodor", "lucia", "amir", "edith", "sol"]
PLACES = ["yard", "annex", "basement", "east wing", "storeroom", "office", "gate", "loft"]
WEEKDAYS = ["monday", "tuesday", "wednesday", "thursday", "friday"]
TIMES = ["nine", "ten", "noon", "two", "four", "five"]

OPENERS = [
    "notes from the {topic} review held on {weekday}",
    "minutes of the {weekday} {topic} session",
    "summary of this week's {topic} work",
]

BODIES = [
    "{person} said the {noun} needs a new {noun2}",
    "the crew moved the {noun} toward the {place}",
    "{person} checked the {noun} before the {noun2}",
    "work on the {noun} continued past the {noun2}",
    "{person} asked for another look at the {noun}",
    "everyone agreed the {noun} held up better than the {noun2}",
    "{person} and {person2} cleaned up around the {noun}",
    "the budget covered repairs to the {noun}",
]

CHAINS = [
    "{prev} repairs took most of the morning",
    "{prev} checks came back clean",
    "{prev} costs ran higher than planned",
    "{prev} work will resume on {weekday}",
    "{prev} parts arrived from the {place}",
    "{prev} duty passed to {person}",
]

CLOSERS = [
    "the session closed at {time}",
    "next review is set for {weekday}",
    "actions were assigned before {time}",
]


@dataclass(frozen=True)
class GeneratorConfig:
    p_chain: float = 0.25
    p_opener: float = 0.5
    p_closer: float = 0.4
    min_sentences: int = 12
    max_sentences: int = 26
    domain: str = "meeting-notes"


def _pick(rng: SplitMix64, items) -> str:
    return items[rng.below(len(items))]


def _fill(template: str, rng: SplitMix64, topic: str, prev_last: str | None) -> str:
    nouns = TOPICS[topic]
    noun = _pick(rng, nouns)
    noun2 = _pick(rng, [n for n in nouns if n != noun])
    person = _pick(rng, PEOPLE)
    person2 = _pick(rng, [p for p in PEOPLE if p != person])
    return template.format(
        topic=topic, noun=noun, noun2=noun2, person=person, person2=person2,
        place=_pick(rng, PLACES), weekday=_pick(rng, WEEKDAYS),
        time=_pick(rng, TIMES), prev=prev_last or "",
    )


def generate_document(doc_id: str, seed: int, config: GeneratorConfig = GeneratorConfig()) -> Document:
    rng = SplitMix64(seed)
    topic = _pick(rng, sorted(TOPICS))
    n = config.min_sentences + rng.below(config.max_sentences - config.min_sentences + 1)
    first = OPENERS if rng.uniform() < config.p_opener else BODIES
    texts = [_fill(_pick(rng, first), rng, topic, None)]
    while len(texts) < n - 1:
        prev_last = texts[-1].split()[-1]
        chainable = prev_last in TOPICS[topic]
        if chainable and rng.uniform() < config.p_chain:
            texts.append(_fill(_pick(rng, CHAINS), rng, topic, prev_last))
        else:
            texts.append(_fill(_pick(rng, BODIES), rng, topic, None))
    if rng.uniform() < config.p_closer:
        texts.append(_fill(_pick(rng, CLOSERS), rng, topic, None))
    else:
        texts.append(_fill(_pick(rng, BODIES), rng, topic, None))
    return Document(
        id=doc_id,
        sentences=tuple(make_sentence(t) for t in texts),
        source_meta={"topic": topic, "generator": "textgen"},
    )


def generate_corpus(
    n_docs: int,
    seed: int,
    id_prefix: str = "doc",
    config: GeneratorConfig = GeneratorConfig(),
) -> Corpus:
    docs = tuple(
        generate_document(f"{id_prefix}-{i:05d}", derive_seed(seed, id_prefix, i), config)
        for i in range(n_docs)
    )
    return Corpus(documents=docs, domain=config.domain)


def corpus_text_bytes(corpus: Corpus) -> int:
    """Total UTF-8 size of the raw sentence text (whitespace included)."""
    return sum(
        len(" ".join(doc.sentence_texts()).encode("utf-8")) for doc in corpus.documents
    )


def write_jsonl(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            fh.write(json.dumps(
                {"id": doc.id, "sentences": list(doc.sentence_texts()),
                 "meta": dict(doc.source_meta)},
                ensure_ascii=False,
            ) + "\n")
