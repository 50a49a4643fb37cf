from __future__ import annotations

import math

import pytest
import torch

from lmbridge.model import ModelConfig, TinyTransformerLM, load_checkpoint, save_checkpoint
from lmbridge.scorer import BridgeScorer, window_spans
from lmbridge.train import train_model
from lmbridge.vocab import SB, Vocab, sentence_stream, tokenize

SENTENCES = ["the crew moved the winch", "winch checks came back clean"]


@pytest.fixture(scope="module")
def micro_model(tmp_path_factory):
    """A barely trained model: scoring-path tests only need valid numbers."""
    base = tmp_path_factory.mktemp("micro")
    corpus = base / "c.jsonl"
    corpus.write_text(
        "\n".join(
            '{"sentences": ["a tiny corpus line %d", "it continues here"]}' % i
            for i in range(40)
        ),
        encoding="utf-8",
    )
    causal = train_model(corpus, objective="causal", steps=5, d_model=32,
                         n_layers=1, segment_length=32, log_every=0)
    masked = train_model(corpus, objective="masked", steps=5, d_model=32,
                         n_layers=1, segment_length=32, log_every=0)
    return causal, masked


class TestVocab:
    def test_tokenize_words_and_punctuation(self):
        assert tokenize("The winch, fixed!") == ["the", "winch", ",", "fixed", "!"]

    def test_unknown_maps_to_unk(self):
        vocab = Vocab(["a", "b"])
        assert vocab.encode(["a", "zzz"])[1] == vocab.stoi["<unk>"]

    def test_sentence_stream_has_boundaries(self):
        vocab = Vocab(tokenize(" ".join(SENTENCES)) + [SB])
        ids = sentence_stream(SENTENCES, vocab)
        assert vocab.stoi[SB] in ids
        assert ids[-1] == vocab.stoi["<eos>"]


class TestWindowSpans:
    def test_short_is_single_window(self):
        assert window_spans(100, 127) == [(0, 100)]

    def test_long_right_aligned_tail(self):
        spans = window_spans(300, 128, 0.5)
        assert spans[0] == (0, 128)
        assert spans[-1] == (172, 300)
        assert all(end - start == 128 for start, end in spans)

    def test_every_position_covered(self):
        covered = set()
        for start, end in window_spans(500, 128, 0.5):
            covered.update(range(start, end))
        assert covered == set(range(500))


class TestScorer:
    def test_modes_follow_loaded_models(self, micro_model):
        causal, masked = micro_model
        assert BridgeScorer(causal=causal).modes == ["generative"]
        assert BridgeScorer(masked=masked).modes == ["mlm"]
        assert BridgeScorer(causal=causal, masked=masked).modes == ["generative", "mlm"]

    def test_requires_a_model(self):
        with pytest.raises(ValueError):
            BridgeScorer()

    def test_generative_score_finite_and_deterministic(self, micro_model):
        causal, _ = micro_model
        scorer = BridgeScorer(causal=causal)
        first = scorer.score(SENTENCES, "generative")
        second = scorer.score(SENTENCES, "generative")
        assert first == second
        assert math.isfinite(first[0])
        assert first[1] == len(sentence_stream(SENTENCES, causal[1]))

    def test_mlm_score_finite_and_deterministic(self, micro_model):
        _, masked = micro_model
        scorer = BridgeScorer(masked=masked)
        first = scorer.score(SENTENCES, "mlm")
        assert first == scorer.score(SENTENCES, "mlm")
        assert math.isfinite(first[0])

    def test_unsupported_mode_raises(self, micro_model):
        causal, _ = micro_model
        with pytest.raises(ValueError, match="mlm"):
            BridgeScorer(causal=causal).score(SENTENCES, "mlm")

    def test_long_input_uses_windows(self, micro_model):
        causal, _ = micro_model
        scorer = BridgeScorer(causal=causal)
        long_sentences = [f"tiny corpus line {i} keeps going" for i in range(40)]
        score, count = scorer.score(long_sentences, "generative")
        assert count > scorer.max_tokens
        assert math.isfinite(score)


class TestCheckpoint:
    def test_roundtrip_preserves_scores(self, micro_model, tmp_path):
        causal, _ = micro_model
        model, vocab = causal
        path = str(tmp_path / "model.pt")
        save_checkpoint(path, model, vocab)
        loaded_model, loaded_vocab = load_checkpoint(path)
        assert loaded_vocab.itos == vocab.itos
        before = BridgeScorer(causal=(model, vocab)).score(SENTENCES, "generative")
        after = BridgeScorer(causal=(loaded_model, loaded_vocab)).score(SENTENCES, "generative")
        assert before == after

    def test_config_restored(self, tmp_path):
        config = ModelConfig(vocab_size=10, d_model=16, n_heads=2, n_layers=1,
                             d_ff=32, max_positions=16, causal=True)
        model = TinyTransformerLM(config)
        vocab = Vocab(["x"])
        config.vocab_size = len(vocab)
        model = TinyTransformerLM(config)
        path = str(tmp_path / "m.pt")
        save_checkpoint(path, model, vocab)
        loaded, _ = load_checkpoint(path)
        assert loaded.config == config


def test_causal_mask_blocks_future():
    torch.manual_seed(0)
    config = ModelConfig(vocab_size=12, d_model=16, n_heads=2, n_layers=1,
                         d_ff=32, max_positions=8, causal=True)
    model = TinyTransformerLM(config)
    model.eval()
    with torch.no_grad():
        base = model(torch.tensor([[1, 2, 3, 4]]))
        changed = model(torch.tensor([[1, 2, 3, 5]]))
    # changing the last token must not affect earlier positions
    assert torch.allclose(base[0, :3], changed[0, :3], atol=1e-6)
    # a bidirectional model does let the change propagate backwards
    config_bi = ModelConfig(vocab_size=12, d_model=16, n_heads=2, n_layers=1,
                            d_ff=32, max_positions=8, causal=False)
    torch.manual_seed(0)
    model_bi = TinyTransformerLM(config_bi)
    model_bi.eval()
    with torch.no_grad():
        base_bi = model_bi(torch.tensor([[1, 2, 3, 4]]))
        changed_bi = model_bi(torch.tensor([[1, 2, 3, 5]]))
    assert not torch.allclose(base_bi[0, :3], changed_bi[0, :3], atol=1e-6)
