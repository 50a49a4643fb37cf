"""Word-level tokenization and vocabulary for the bridge's own models.

The bridge tokenizes independently of the harness; the wire protocol only
promises a per-token mean log-likelihood over the provider's own units.
"""

from __future__ import annotations

import re

PAD = "<pad>"
UNK = "<unk>"
BOS = "<bos>"
EOS = "<eos>"
SB = "<sb>"
MASK = "<mask>"
SPECIALS = (PAD, UNK, BOS, EOS, SB, MASK)

_TOKEN_RE = re.compile(r"[\w']+|[^\w\s]")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


class Vocab:
    def __init__(self, tokens: list[str]):
        self.itos = list(SPECIALS) + sorted(set(tokens) - set(SPECIALS))
        self.stoi = {tok: i for i, tok in enumerate(self.itos)}

    def __len__(self) -> int:
        return len(self.itos)

    def encode(self, tokens: list[str]) -> list[int]:
        unk = self.stoi[UNK]
        return [self.stoi.get(tok, unk) for tok in tokens]

    @property
    def pad_id(self) -> int:
        return self.stoi[PAD]

    @property
    def bos_id(self) -> int:
        return self.stoi[BOS]

    @property
    def mask_id(self) -> int:
        return self.stoi[MASK]


def sentence_stream(sentences: list[str], vocab: Vocab) -> list[int]:
    """Token ids for a document: sentences joined with a boundary marker,
    closed with the end marker. Mirrors how training streams are built."""
    tokens: list[str] = []
    for i, sentence in enumerate(sentences):
        if i > 0:
            tokens.append(SB)
        tokens.extend(tokenize(sentence))
    tokens.append(EOS)
    return vocab.encode(tokens)
