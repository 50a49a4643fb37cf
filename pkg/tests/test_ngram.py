from __future__ import annotations

import math

import pytest

from kblock.corpus import Corpus
from kblock.ngram import (
    BOS, BOUNDARY, EOS, UNK, assemble_document_tokens,
    default_smoothing, load_model, save_model, train_ngram,
)
from kblock.rng import SplitMix64
from kblock.scoring import generative_score

from .conftest import make_doc, numbered_corpus


def one_doc_corpus(text_tokens: str) -> Corpus:
    return Corpus(documents=(make_doc("d", [text_tokens]),), domain="toy")


class TestTrainNgram:
    def test_unsmoothed_count_is_deterministic_context(self):
        model = train_ngram(one_doc_corpus("a b a b"), order=2)
        # raw maximum-likelihood estimate before smoothing
        assert model.counts[2][("a",)] == {"b": 2}
        assert model.totals[2][("a",)] == 2

    def test_smoothing_floor_pulls_below_one(self):
        model = train_ngram(one_doc_corpus("a b a b"), order=2)
        p = model.prob(["a"], "b")
        # hand evaluation of the documented interpolation:
        # targets are a b a b </s>, so ML1(b) = 2/5, V = {a,b,<sb>,</s>,<unk>}
        lam1, lam2 = model.smoothing
        expected = lam2 * 1.0 + (1 - lam2) * (lam1 * (2 / 5) + (1 - lam1) * (1 / 5))
        assert p == pytest.approx(expected, abs=1e-12)
        assert p < 1.0

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError, match="empty training corpus"):
            train_ngram(Corpus(documents=(), domain="x"), order=2)

    def test_order_below_one_rejected(self):
        with pytest.raises(ValueError, match="order"):
            train_ngram(one_doc_corpus("a b"), order=0)

    def test_order_one_ignores_context(self):
        model = train_ngram(one_doc_corpus("a b a c"), order=1)
        assert model.prob(["a"], "b") == model.prob(["c"], "b")
        assert model.prob([], "b") == model.prob(["a", "c"], "b")

    def test_boundary_markers_inserted(self):
        doc = make_doc("d", ["a b", "c d"])
        assert assemble_document_tokens(doc) == ["a", "b", BOUNDARY, "c", "d", EOS]

    def test_unknown_tokens_map_to_unk(self):
        model = train_ngram(one_doc_corpus("a b a b"), order=2)
        assert model.prob(["a"], "zzz") == model.prob(["a"], UNK)
        assert model.prob(["a"], "zzz") > 0.0


class TestDistributions:
    def test_conditionals_sum_to_one(self):
        corpus = numbered_corpus(12, 6)
        model = train_ngram(corpus, order=3)
        vocab = sorted(model.vocabulary)
        rng = SplitMix64(5)
        contexts = [[], [BOS], ["line"], ["of", "doc-0001"], ["nonsense-token"],
                    [vocab[0], vocab[1]]]
        contexts += [
            [vocab[rng.below(len(vocab))], vocab[rng.below(len(vocab))]]
            for _ in range(1000)
        ]
        for context in contexts:
            total = math.fsum(model.prob(context, w) for w in vocab)
            assert abs(total - 1.0) < 1e-9, context

    def test_every_vocab_token_positive(self):
        model = train_ngram(one_doc_corpus("a b c"), order=2)
        for w in model.vocabulary:
            assert model.prob(["a"], w) > 0.0


class TestHandComputedScore:
    def test_two_token_document(self):
        # stream of the training doc is: a b </s>; ML tables are trivial to
        # write out, so the interpolated score of ["a", "b"] is hand-checkable
        model = train_ngram(one_doc_corpus("a b"), order=2)
        lam1, lam2 = model.smoothing
        v = len(model.vocabulary)  # a, b, <sb>, </s>, <unk>
        assert v == 5
        p_a = lam2 * 1.0 + (1 - lam2) * (lam1 * (1 / 3) + (1 - lam1) / v)
        p_b = lam2 * 1.0 + (1 - lam2) * (lam1 * (1 / 3) + (1 - lam1) / v)
        expected = (math.log(p_a) + math.log(p_b)) / 2
        result = generative_score(["a", "b"], model)
        assert result.score == pytest.approx(expected, abs=1e-12)

    def test_trigram_against_independent_reference(self):
        # reference implementation recomputes the documented smoothing
        # recursion straight from the count tables
        corpus = Corpus(
            documents=(
                make_doc("d1", ["the cat sat on the mat", "the dog sat too"]),
                make_doc("d2", ["a cat and a dog sat", "the mat was warm"]),
            ),
            domain="toy",
        )
        model = train_ngram(corpus, order=3)

        def reference_prob(context, token):
            w = token if token in model.vocabulary else UNK
            ctx = [c if (c in model.vocabulary or c == BOS) else UNK for c in context]
            ctx = [BOS] * (model.order - 1) + ctx
            p = 1.0 / len(model.vocabulary)
            for k in range(1, model.order + 1):
                tail = tuple(ctx[len(ctx) - (k - 1):]) if k > 1 else ()
                bucket = model.counts[k].get(tail)
                if bucket:
                    total = sum(bucket.values())
                    p = model.smoothing[k - 1] * (bucket.get(w, 0) / total) + \
                        (1 - model.smoothing[k - 1]) * p
            return p

        tokens = "the cat sat on a mat <oov> the dog sat".split()
        result = generative_score(tokens, model)
        expected = math.fsum(
            math.log(reference_prob(tokens[:i], tokens[i])) for i in range(len(tokens))
        ) / len(tokens)
        assert result.score == pytest.approx(expected, abs=1e-12)


class TestPersistence:
    def test_save_load_roundtrip(self, tmp_path):
        corpus = numbered_corpus(8, 5)
        model = train_ngram(corpus, order=3)
        path = str(tmp_path / "model.json.gz")
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.order == model.order
        assert loaded.smoothing == model.smoothing
        assert loaded.vocabulary == model.vocabulary
        probes = [([], "line"), (["line"], "0"), (["of", "doc-0002"], EOS),
                  (["strange"], "thing")]
        for context, token in probes:
            assert loaded.prob(context, token) == model.prob(context, token)

    def test_save_is_byte_stable(self, tmp_path):
        model = train_ngram(numbered_corpus(3, 4), order=2)
        a, b = str(tmp_path / "a.gz"), str(tmp_path / "b.gz")
        save_model(model, a)
        save_model(model, b)
        assert open(a, "rb").read() == open(b, "rb").read()


class TestModelValidation:
    def test_smoothing_length_must_match_order(self):
        with pytest.raises(ValueError, match="weight"):
            train_ngram(one_doc_corpus("a b"), order=2, smoothing=[0.5])

    def test_smoothing_weights_in_open_interval(self):
        with pytest.raises(ValueError, match="weights"):
            train_ngram(one_doc_corpus("a b"), order=2, smoothing=[0.5, 1.0])

    def test_default_smoothing_shape(self):
        assert default_smoothing(3) == (0.9, 0.5, 0.5)

    def test_training_is_deterministic(self):
        corpus = numbered_corpus(6, 7)
        a = train_ngram(corpus, order=3)
        b = train_ngram(corpus, order=3)
        assert a.counts == b.counts
        assert a.vocabulary == b.vocabulary
