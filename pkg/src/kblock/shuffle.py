"""Block partitioning and seeded non-identity block shuffling.

A document's sentences are grouped into contiguous blocks of k (the last
block may be short), the blocks are permuted with a seeded Fisher-Yates
draw, and sentence order inside each block is preserved. Identity
permutations are rejected and resampled: presenting a pair of identical
documents would corrupt discrimination accuracy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .corpus import Document, make_sentence
from .rng import SplitMix64, fisher_yates


@dataclass(frozen=True)
class BlockPartition:
    doc_id: str
    k: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        flat = [i for block in self.blocks for i in block]
        if flat != list(range(len(flat))):
            raise ValueError("blocks must cover 0..n-1 contiguously")
        for block in self.blocks[:-1]:
            if len(block) != self.k:
                raise ValueError("every block but the last must have exactly k indices")
        if not 1 <= len(self.blocks[-1]) <= self.k:
            raise ValueError("last block must have between 1 and k indices")

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True)
class ShuffleInstance:
    """An (original, shuffled) pair plus everything needed to reproduce it."""

    original: Document
    shuffled: Document
    k: int
    permutation: tuple[int, ...]
    seed: int

    def __post_init__(self):
        if sorted(self.permutation) != list(range(len(self.permutation))):
            raise ValueError("permutation must rearrange 0..num_blocks-1")
        if self.permutation == tuple(range(len(self.permutation))):
            raise ValueError("permutation must not be the identity")
        if sorted(self.original.sentence_texts()) != sorted(self.shuffled.sentence_texts()):
            raise ValueError("shuffling must preserve the sentence multiset")


def partition_blocks(doc: Document, k: int) -> BlockPartition:
    """ceil(n/k) contiguous blocks; block j covers [j*k, min((j+1)*k, n))."""
    if k < 1:
        raise ValueError("block size must be positive")
    n = len(doc.sentences)
    blocks = tuple(
        tuple(range(j * k, min((j + 1) * k, n))) for j in range((n + k - 1) // k)
    )
    return BlockPartition(doc_id=doc.id, k=k, blocks=blocks)


def shuffle_blocks(
    partition: BlockPartition, seed: int, max_retries: int = 64
) -> tuple[int, ...]:
    """Uniformly random non-identity permutation of the block indices.

    Fisher-Yates over a SplitMix64 stream seeded with ``seed``; identity
    draws are rejected and the stream continues, so the result stays
    deterministic for a fixed (seed, partition).
    """
    m = partition.num_blocks
    if m < 2:
        raise ValueError("un-shufflable: single block")
    identity = list(range(m))
    rng = SplitMix64(seed)
    for _ in range(max_retries):
        perm = list(identity)
        fisher_yates(perm, rng)
        if perm != identity:
            return tuple(perm)
    raise RuntimeError(f"identity resample limit reached after {max_retries} draws")


def make_instance(doc: Document, k: int, seed: int, max_retries: int = 64) -> ShuffleInstance:
    """Partition, draw a non-identity block permutation, and reassemble."""
    partition = partition_blocks(doc, k)
    permutation = shuffle_blocks(partition, seed, max_retries)
    order = [i for b in permutation for i in partition.blocks[b]]
    shuffled = Document(
        id=doc.id,
        sentences=tuple(doc.sentences[i] for i in order),
        source_meta=doc.source_meta,
    )
    return ShuffleInstance(
        original=doc, shuffled=shuffled, k=k, permutation=permutation, seed=seed
    )


def instance_to_dict(instance: ShuffleInstance) -> dict:
    return {
        "doc_id": instance.original.id,
        "k": instance.k,
        "seed": instance.seed,
        "permutation": list(instance.permutation),
        "original_sentences": list(instance.original.sentence_texts()),
        "shuffled_sentences": list(instance.shuffled.sentence_texts()),
    }


def instance_to_json(instance: ShuffleInstance) -> str:
    return json.dumps(instance_to_dict(instance), sort_keys=True, ensure_ascii=False)


def instance_from_dict(obj: dict) -> ShuffleInstance:
    def doc(texts: Sequence[str]) -> Document:
        return Document(id=obj["doc_id"], sentences=tuple(make_sentence(t) for t in texts))

    return ShuffleInstance(
        original=doc(obj["original_sentences"]),
        shuffled=doc(obj["shuffled_sentences"]),
        k=int(obj["k"]),
        permutation=tuple(obj["permutation"]),
        seed=int(obj["seed"]),
    )
