"""Pretraining loops for the bridge's tiny models.

Training text must be original-order prose; the zero-shot protocol of the
harness forbids exposing any scorer to shuffled text, and nothing here
shuffles sentence order (only segment sampling is randomized).
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import torch
import torch.nn.functional as F

from .model import ModelConfig, TinyTransformerLM
from .vocab import EOS, SB, Vocab, tokenize


def read_corpus(path: str | Path) -> list[list[str]]:
    """JSONL documents with a 'sentences' (list) or 'text' (string) field;
    returns one token stream per document, boundary markers included."""
    streams: list[list[str]] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            if "sentences" in obj:
                sentences = [str(s) for s in obj["sentences"]]
            else:
                sentences = [str(obj["text"])]
            tokens: list[str] = []
            for i, sentence in enumerate(sentences):
                if i > 0:
                    tokens.append(SB)
                tokens.extend(tokenize(sentence))
            tokens.append(EOS)
            streams.append(tokens)
    if not streams:
        raise ValueError(f"no documents in {path}")
    return streams


def _segments(streams: list[list[str]], vocab: Vocab, length: int) -> torch.Tensor:
    """Training rows: every document left-aligned at position 0 (padded or
    truncated to ``length``), plus flat chunks of the concatenated corpus so
    mid-document windows are in-distribution too."""
    rows: list[list[int]] = []
    flat: list[int] = []
    for stream in streams:
        ids = vocab.encode(stream)
        flat.extend(ids)
        row = ids[:length]
        rows.append(row + [vocab.pad_id] * (length - len(row)))
    for start in range(0, len(flat) - length + 1, length):
        rows.append(flat[start : start + length])
    if not rows:
        raise ValueError("corpus smaller than one training segment")
    return torch.tensor(rows, dtype=torch.long)


def train_model(
    corpus_path: str | Path,
    objective: str = "causal",
    steps: int = 600,
    batch_size: int = 32,
    segment_length: int = 128,
    lr: float = 3e-4,
    seed: int = 0,
    d_model: int = 128,
    n_layers: int = 2,
    log_every: int = 100,
) -> tuple[TinyTransformerLM, Vocab]:
    if objective not in ("causal", "masked"):
        raise ValueError(f"objective must be causal or masked, got {objective!r}")
    torch.manual_seed(seed)
    streams = read_corpus(corpus_path)
    vocab = Vocab([tok for stream in streams for tok in stream])
    segments = _segments(streams, vocab, segment_length)

    config = ModelConfig(
        vocab_size=len(vocab), d_model=d_model, n_layers=n_layers,
        max_positions=segment_length, causal=(objective == "causal"),
    )
    model = TinyTransformerLM(config)
    model.train()
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    generator = torch.Generator().manual_seed(seed)

    for step in range(1, steps + 1):
        rows = torch.randint(0, segments.size(0), (batch_size,), generator=generator)
        batch = segments[rows]
        if objective == "causal":
            inputs = torch.cat(
                [torch.full((batch_size, 1), vocab.bos_id, dtype=torch.long),
                 batch[:, :-1]],
                dim=1,
            )
            logits = model(inputs)
            loss = F.cross_entropy(
                logits.reshape(-1, len(vocab)), batch.reshape(-1),
                ignore_index=vocab.pad_id,
            )
        else:
            masked = batch.clone()
            mask = (torch.rand(batch.shape, generator=generator) < 0.15) & \
                (batch != vocab.pad_id)
            mask[:, 0] |= ~mask.any(dim=1)  # at least one mask per row
            masked[mask] = vocab.mask_id
            logits = model(masked)
            loss = F.cross_entropy(
                logits[mask].reshape(-1, len(vocab)), batch[mask].reshape(-1)
            )
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        if log_every and step % log_every == 0:
            print(f"step {step}/{steps} {objective} loss {loss.item():.3f} "
                  f"(ppl {math.exp(min(loss.item(), 20)):.1f})", flush=True)

    model.eval()
    return model, vocab
