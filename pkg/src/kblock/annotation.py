"""Human-annotation bundles and agreement statistics.

A bundle presents each shuffle instance as a blinded A/B pair; which side
holds the shuffled document is coin-flipped per item and stored only in a
separate answer key, never in the bundle itself. Annotators record the side
they believe is shuffled. Agreement is pairwise Cohen's kappa.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Corpus, truncate
from .rng import SplitMix64, derive_seed, fisher_yates
from .shuffle import make_instance, partition_blocks

SIDES = ("A", "B")
SMALL_BLOCKS = "1-2"
LARGE_BLOCKS = "3-5"


@dataclass(frozen=True)
class BundleItem:
    item_id: str
    k: int
    text_a: tuple[str, ...]
    text_b: tuple[str, ...]


@dataclass(frozen=True)
class KeyEntry:
    item_id: str
    k: int
    doc_id: str
    seed: int
    permutation: tuple[int, ...]
    shuffled_side: str


@dataclass
class AnnotationBundle:
    items: list[BundleItem]
    presentation_seed: int


@dataclass
class AnswerKey:
    entries: dict[str, KeyEntry]
    presentation_seed: int


@dataclass(frozen=True)
class AnnotationRecord:
    item_id: str
    annotator_id: str
    choice: str
    elapsed_seconds: float

    def __post_init__(self):
        if self.choice not in SIDES:
            raise ValueError(f"choice must be A or B, got {self.choice!r}")
        if self.elapsed_seconds < 0:
            raise ValueError("elapsed_seconds must be non-negative")


def generate_bundle(
    corpus: Corpus,
    ks: Sequence[int],
    per_k_count: int,
    seed: int,
    max_sentences: int = 20,
) -> tuple[AnnotationBundle, AnswerKey]:
    """Sample documents per k (without replacement within each k), shuffle
    them, and randomize which side each shuffled document appears on."""
    if per_k_count < 1:
        raise ValueError("per_k_count must be positive")
    presentation_seed = derive_seed(seed, "presentation")
    coin_rng = SplitMix64(presentation_seed)
    items: list[BundleItem] = []
    entries: dict[str, KeyEntry] = {}
    for k in ks:
        testable = [
            doc for doc in corpus.documents
            if partition_blocks(truncate(doc, max_sentences), k).num_blocks >= 2
        ]
        if len(testable) < per_k_count:
            raise ValueError(
                f"not enough testable documents for k={k}: "
                f"need {per_k_count}, have {len(testable)}"
            )
        order = list(range(len(testable)))
        fisher_yates(order, SplitMix64(derive_seed(seed, "sample", k)))
        for i, doc_index in enumerate(order[:per_k_count]):
            doc = truncate(testable[doc_index], max_sentences)
            instance_seed = derive_seed(seed, doc.id, k)
            instance = make_instance(doc, k, instance_seed)
            item_id = f"item-k{k}-{i:04d}"
            shuffled_side = "A" if coin_rng.coin() else "B"
            original = instance.original.sentence_texts()
            shuffled = instance.shuffled.sentence_texts()
            text_a, text_b = (
                (shuffled, original) if shuffled_side == "A" else (original, shuffled)
            )
            items.append(BundleItem(item_id=item_id, k=k, text_a=text_a, text_b=text_b))
            entries[item_id] = KeyEntry(
                item_id=item_id, k=k, doc_id=doc.id, seed=instance_seed,
                permutation=instance.permutation, shuffled_side=shuffled_side,
            )
    return (
        AnnotationBundle(items=items, presentation_seed=presentation_seed),
        AnswerKey(entries=entries, presentation_seed=presentation_seed),
    )


def bundle_to_json(bundle: AnnotationBundle) -> str:
    """Bundle file contents. Deliberately excludes the presentation seed and
    every other field the answer could be derived from."""
    payload = {
        "items": [
            {"item_id": it.item_id, "k": it.k,
             "text_A": list(it.text_a), "text_B": list(it.text_b)}
            for it in bundle.items
        ]
    }
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def key_to_json(key: AnswerKey) -> str:
    payload = {
        "presentation_seed": key.presentation_seed,
        "items": {
            entry.item_id: {
                "k": entry.k, "doc_id": entry.doc_id, "seed": entry.seed,
                "permutation": list(entry.permutation),
                "shuffled_side": entry.shuffled_side,
            }
            for entry in key.entries.values()
        },
    }
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def key_from_json(text: str) -> AnswerKey:
    payload = json.loads(text)
    entries = {
        item_id: KeyEntry(
            item_id=item_id, k=int(obj["k"]), doc_id=obj["doc_id"],
            seed=int(obj["seed"]), permutation=tuple(obj["permutation"]),
            shuffled_side=obj["shuffled_side"],
        )
        for item_id, obj in payload["items"].items()
    }
    return AnswerKey(entries=entries, presentation_seed=int(payload["presentation_seed"]))


def cohen_kappa(labels_x: Sequence[str], labels_y: Sequence[str]) -> float:
    """Chance-corrected agreement: kappa = (p_o - p_e) / (1 - p_e), with
    p_e from the two annotators' marginal label distributions."""
    if len(labels_x) != len(labels_y):
        raise ValueError("mismatched item sets: label vectors differ in length")
    n = len(labels_x)
    if n == 0:
        raise ValueError("mismatched item sets: no co-labeled items")
    count_x = Counter(labels_x)
    count_y = Counter(labels_y)
    # integer arithmetic up to the final divisions keeps kappa exactly
    # symmetric and relabeling-invariant
    agreement = sum(1 for x, y in zip(labels_x, labels_y) if x == y)
    chance = sum(count_x[label] * count_y.get(label, 0) for label in sorted(count_x))
    if chance == n * n:
        raise ValueError("degenerate marginals: chance agreement is 1")
    p_o = agreement / n
    p_e = chance / (n * n)
    return (p_o - p_e) / (1.0 - p_e)


def kappa_from_records(
    records_x: Mapping[str, str], records_y: Mapping[str, str]
) -> float:
    """Kappa over two item_id -> label mappings covering the same items."""
    if set(records_x) != set(records_y):
        raise ValueError("mismatched item sets between annotators")
    items = sorted(records_x)
    return cohen_kappa([records_x[i] for i in items], [records_y[i] for i in items])


@dataclass
class AnnotationReport:
    accuracy_by_annotator: dict[str, float]
    accuracy_by_annotator_k: dict[str, dict[int, float]]
    pairwise_kappa: dict[tuple[str, str], float | None]
    mean_kappa: float | None
    kappa_by_k: dict[int, dict[tuple[str, str], float | None]]
    kappa_range: tuple[float, float] | None
    mean_seconds: dict[str, float] = field(default_factory=dict)
    timing_ratio: float | None = None

    def to_dict(self) -> dict:
        return {
            "accuracy_by_annotator": self.accuracy_by_annotator,
            "accuracy_by_annotator_k": {
                a: {str(k): v for k, v in by_k.items()}
                for a, by_k in self.accuracy_by_annotator_k.items()
            },
            "pairwise_kappa": {" & ".join(pair): v for pair, v in self.pairwise_kappa.items()},
            "mean_kappa": self.mean_kappa,
            "kappa_by_k": {
                str(k): {" & ".join(pair): v for pair, v in pairs.items()}
                for k, pairs in self.kappa_by_k.items()
            },
            "kappa_range": list(self.kappa_range) if self.kappa_range else None,
            "mean_seconds": self.mean_seconds,
            "timing_ratio": self.timing_ratio,
        }


def _mean(values: list[float]) -> float:
    return math.fsum(values) / len(values)


def score_annotations(
    records: Iterable[AnnotationRecord], key: AnswerKey
) -> AnnotationReport:
    """Accuracy per annotator (overall and per k), pairwise kappas with
    their per-k range, and timing means for small (k 1-2) vs large (k 3-5)
    blocks. Items labeled by a single annotator count toward accuracy but
    not kappa."""
    records = list(records)
    seen: set[tuple[str, str]] = set()
    for record in records:
        if record.item_id not in key.entries:
            raise ValueError(f"unknown item_id {record.item_id!r}")
        pair = (record.item_id, record.annotator_id)
        if pair in seen:
            raise ValueError(
                f"duplicate record for item {record.item_id!r} "
                f"by annotator {record.annotator_id!r}"
            )
        seen.add(pair)

    by_annotator: dict[str, dict[str, str]] = {}
    for record in records:
        by_annotator.setdefault(record.annotator_id, {})[record.item_id] = record.choice

    accuracy: dict[str, float] = {}
    accuracy_k: dict[str, dict[int, float]] = {}
    for annotator, labels in sorted(by_annotator.items()):
        correct = [
            1.0 if choice == key.entries[item].shuffled_side else 0.0
            for item, choice in labels.items()
        ]
        accuracy[annotator] = _mean(correct)
        per_k: dict[int, list[float]] = {}
        for item, choice in labels.items():
            entry = key.entries[item]
            per_k.setdefault(entry.k, []).append(
                1.0 if choice == entry.shuffled_side else 0.0
            )
        accuracy_k[annotator] = {k: _mean(v) for k, v in sorted(per_k.items())}

    pairwise: dict[tuple[str, str], float | None] = {}
    kappa_by_k: dict[int, dict[tuple[str, str], float | None]] = {}
    all_ks = sorted({entry.k for entry in key.entries.values()})
    for a, b in combinations(sorted(by_annotator), 2):
        shared = sorted(set(by_annotator[a]) & set(by_annotator[b]))
        if not shared:
            continue
        pairwise[(a, b)] = _try_kappa(
            [by_annotator[a][i] for i in shared], [by_annotator[b][i] for i in shared]
        )
        for k in all_ks:
            shared_k = [i for i in shared if key.entries[i].k == k]
            if not shared_k:
                continue
            kappa_by_k.setdefault(k, {})[(a, b)] = _try_kappa(
                [by_annotator[a][i] for i in shared_k],
                [by_annotator[b][i] for i in shared_k],
            )

    computed = [v for v in pairwise.values() if v is not None]
    per_k_values = [
        v for pairs in kappa_by_k.values() for v in pairs.values() if v is not None
    ]

    small = [r.elapsed_seconds for r in records if key.entries[r.item_id].k <= 2]
    large = [r.elapsed_seconds for r in records if key.entries[r.item_id].k >= 3]
    mean_seconds: dict[str, float] = {}
    if small:
        mean_seconds[SMALL_BLOCKS] = _mean(small)
    if large:
        mean_seconds[LARGE_BLOCKS] = _mean(large)
    ratio = None
    if small and large and mean_seconds[SMALL_BLOCKS] > 0:
        ratio = mean_seconds[LARGE_BLOCKS] / mean_seconds[SMALL_BLOCKS]

    return AnnotationReport(
        accuracy_by_annotator=accuracy,
        accuracy_by_annotator_k=accuracy_k,
        pairwise_kappa=pairwise,
        mean_kappa=_mean(computed) if computed else None,
        kappa_by_k=kappa_by_k,
        kappa_range=(min(per_k_values), max(per_k_values)) if per_k_values else None,
        mean_seconds=mean_seconds,
        timing_ratio=ratio,
    )


def _try_kappa(x: list[str], y: list[str]) -> float | None:
    # Degenerate marginals (both annotators constant and identical) yield
    # no kappa; the report carries None and lets the caller decide.
    try:
        return cohen_kappa(x, y)
    except ValueError:
        return None


CSV_FIELDS = ("item_id", "annotator_id", "choice", "elapsed_seconds")


def read_records_csv(path: str | Path) -> list[AnnotationRecord]:
    """Annotation records from CSV with header
    item_id,annotator_id,choice,elapsed_seconds."""
    records: list[AnnotationRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_FIELDS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing CSV columns: {sorted(missing)}")
        for row_no, row in enumerate(reader, start=2):
            try:
                records.append(
                    AnnotationRecord(
                        item_id=row["item_id"],
                        annotator_id=row["annotator_id"],
                        choice=row["choice"].strip(),
                        elapsed_seconds=float(row["elapsed_seconds"]),
                    )
                )
            except ValueError as exc:
                raise ValueError(f"{path}: row {row_no}: {exc}") from exc
    return records
