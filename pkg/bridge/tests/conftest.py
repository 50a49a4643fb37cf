from __future__ import annotations

import os
import sys
from pathlib import Path

import pytest

from lmbridge.model import save_checkpoint
from lmbridge.train import train_model

# The fixtures lean on the primary harness for corpus generation and the
# shared conformance suite; the bridge itself never imports it.
from kblock.textgen import GeneratorConfig, generate_corpus, write_jsonl

DOC_SHAPE = GeneratorConfig(min_sentences=8, max_sentences=14)
TRAIN_STEPS_CAUSAL = 1000
TRAIN_STEPS_MASKED = 400


def serve_cmd(causal: Path, masked: Path | None = None) -> list[str]:
    cmd = [sys.executable, "-m", "lmbridge", "serve", "--causal", str(causal)]
    if masked is not None:
        cmd += ["--masked", str(masked)]
    return cmd


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory) -> Path:
    """Pretrained checkpoints plus corpora; honors LMBRIDGE_TEST_CACHE to
    skip retraining across runs."""
    cache = os.environ.get("LMBRIDGE_TEST_CACHE")
    base = Path(cache) if cache else tmp_path_factory.mktemp("models")
    base.mkdir(parents=True, exist_ok=True)
    train_path = base / "train.jsonl"
    eval_path = base / "eval.jsonl"
    causal_path = base / "causal.pt"
    masked_path = base / "masked.pt"
    if not train_path.exists():
        write_jsonl(generate_corpus(1600, seed=301, id_prefix="btr", config=DOC_SHAPE),
                    train_path)
    if not eval_path.exists():
        write_jsonl(generate_corpus(100, seed=302, id_prefix="bev", config=DOC_SHAPE),
                    eval_path)
    if not causal_path.exists():
        model, vocab = train_model(train_path, objective="causal",
                                   steps=TRAIN_STEPS_CAUSAL, log_every=0)
        save_checkpoint(str(causal_path), model, vocab)
    if not masked_path.exists():
        model, vocab = train_model(train_path, objective="masked",
                                   steps=TRAIN_STEPS_MASKED, log_every=0)
        save_checkpoint(str(masked_path), model, vocab)
    return base
