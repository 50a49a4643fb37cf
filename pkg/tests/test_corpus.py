from __future__ import annotations

import json
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kblock.corpus import (
    Corpus, Document, ingest_jsonl, ingest_text, make_sentence,
    segment_sentences, tokenize, truncate,
)

from .conftest import numbered_doc


class TestTokenize:
    def test_punctuation_split(self):
        assert tokenize("Hello, world!") == ("hello", ",", "world", "!")

    def test_empty(self):
        assert tokenize("") == ()

    def test_internal_periods_kept(self):
        # hand-traced: "u.s." has an internal period, so the trailing one
        # stays attached; "bills" is plain
        assert tokenize("U.S. bills") == ("u.s.", "bills")

    def test_plain_trailing_period_splits(self):
        assert tokenize("He left.") == ("he", "left", ".")

    def test_leading_punctuation(self):
        assert tokenize('("quoted")') == ("(", '"', "quoted", '"', ")")

    def test_numbers_keep_decimal_point(self):
        assert tokenize("pi is 3.14.") == ("pi", "is", "3.14.")

    def test_deterministic(self):
        text = "Mixed CASE, with U.S. numbers 1.5 and (brackets)!"
        assert tokenize(text) == tokenize(text)


class TestSegmentSentences:
    def test_two_plain_sentences(self):
        assert [s.text for s in segment_sentences("I left. He stayed.")] == [
            "I left.", "He stayed.",
        ]

    def test_abbreviation_does_not_split(self):
        # "Dr." is on the abbreviation list; the period after "arrived" is a
        # genuine boundary
        texts = [s.text for s in segment_sentences("Dr. Smith arrived. We began.")]
        assert texts == ["Dr. Smith arrived.", "We began."]

    def test_no_terminal_punctuation_is_single_sentence(self):
        assert [s.text for s in segment_sentences("No terminal punctuation")] == [
            "No terminal punctuation",
        ]

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError, match="empty document"):
            segment_sentences("   \n ")

    def test_exclamation_and_question(self):
        texts = [s.text for s in segment_sentences("Really? Yes! Fine.")]
        assert texts == ["Really?", "Yes!", "Fine."]

    def test_closing_quote_stays_with_sentence(self):
        texts = [s.text for s in segment_sentences('He said "go." She went.')]
        assert texts == ['He said "go."', "She went."]

    def test_custom_abbreviations(self):
        texts = [s.text for s in segment_sentences("See Fig. 3. Then stop.")]
        assert texts == ["See Fig. 3.", "Then stop."]
        texts = [s.text for s in segment_sentences("See Zzz. 3. Then stop.", ["Zzz."])]
        assert texts == ["See Zzz. 3.", "Then stop."]

    def test_decimal_number_does_not_split(self):
        assert [s.text for s in segment_sentences("It cost 3.14 dollars.")] == [
            "It cost 3.14 dollars.",
        ]

    @given(st.text(min_size=1, max_size=200))
    @settings(max_examples=200)
    def test_no_nonwhitespace_characters_dropped(self, text):
        try:
            sentences = segment_sentences(text)
        except ValueError:
            assert not text.strip()
            return
        joined = " ".join(s.text for s in sentences)
        assert Counter(c for c in joined if not c.isspace()) == Counter(
            c for c in text if not c.isspace()
        )

    @given(st.text(min_size=1, max_size=200))
    @settings(max_examples=200)
    def test_tokens_roundtrip_from_text(self, text):
        try:
            sentences = segment_sentences(text)
        except ValueError:
            return
        for sentence in sentences:
            assert sentence.tokens == tokenize(sentence.text)


class TestTruncate:
    def test_over_limit(self):
        doc = numbered_doc("d", 25)
        out = truncate(doc, 20)
        assert len(out.sentences) == 20
        assert out.sentences == doc.sentences[:20]
        assert out.id == doc.id

    def test_under_limit_is_identity(self):
        doc = numbered_doc("d", 5)
        assert truncate(doc, 20) is doc

    def test_exact_limit_is_identity(self):
        doc = numbered_doc("d", 20)
        assert truncate(doc, 20) is doc

    def test_idempotent(self):
        doc = numbered_doc("d", 33)
        assert truncate(truncate(doc, 20), 20) == truncate(doc, 20)


class TestTypes:
    def test_document_requires_sentences(self):
        with pytest.raises(ValueError):
            Document(id="x", sentences=())

    def test_sentence_requires_tokens(self):
        with pytest.raises(ValueError):
            make_sentence("   ")

    def test_corpus_rejects_duplicate_ids(self):
        doc = numbered_doc("same", 3)
        with pytest.raises(ValueError, match="duplicate"):
            Corpus(documents=(doc, doc))


class TestIngestJsonl:
    def test_segments_text(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"text": "A. B."}\n', encoding="utf-8")
        corpus, report = ingest_jsonl(path, pre_segmented=False)
        assert [s.text for s in corpus.documents[0].sentences] == ["A.", "B."]
        assert report.n_ingested == 1

    def test_pre_segmented_passthrough(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"sentences": ["Hello there.", "Bye."]}\n', encoding="utf-8")
        corpus, _ = ingest_jsonl(path, pre_segmented=True)
        assert [s.text for s in corpus.documents[0].sentences] == ["Hello there.", "Bye."]

    def test_preserves_file_order_and_assigns_ids(self, tmp_path):
        path = tmp_path / "c.jsonl"
        lines = [
            '{"text": "First doc."}',
            '{"id": "named", "text": "Second doc."}',
            '{"text": "Third doc."}',
        ]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        corpus, _ = ingest_jsonl(path)
        assert [d.id for d in corpus.documents] == ["doc-1", "named", "doc-3"]

    def test_malformed_line_names_line_number(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"text": "Fine."}\n{oops\n', encoding="utf-8")
        with pytest.raises(ValueError, match="line 2"):
            ingest_jsonl(path)

    def test_empty_document_skipped_and_reported(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id": "empty", "text": "  "}\n{"text": "Kept."}\n',
                        encoding="utf-8")
        corpus, report = ingest_jsonl(path)
        assert [d.id for d in corpus.documents] == ["doc-2"]
        assert len(report.skipped) == 1
        assert report.skipped[0].doc_id == "empty"
        assert report.skipped[0].line_no == 1

    def test_meta_carried_through(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"text": "Hi there.", "meta": {"origin": "unit"}}\n',
                        encoding="utf-8")
        corpus, _ = ingest_jsonl(path)
        assert corpus.documents[0].source_meta == {"origin": "unit"}

    def test_domain_defaults_to_stem(self, tmp_path):
        path = tmp_path / "news.jsonl"
        path.write_text('{"text": "Hi."}\n', encoding="utf-8")
        corpus, _ = ingest_jsonl(path)
        assert corpus.domain == "news"

    def test_rejects_object_without_text_or_sentences(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id": "x"}\n', encoding="utf-8")
        with pytest.raises(ValueError, match="line 1"):
            ingest_jsonl(path)


class TestIngestText:
    def test_single_file_one_document(self, tmp_path):
        path = tmp_path / "story.txt"
        path.write_text("One. Two.\n\nThree here.\n", encoding="utf-8")
        corpus, _ = ingest_text(path)
        assert len(corpus.documents) == 1
        assert [s.text for s in corpus.documents[0].sentences] == [
            "One.", "Two.", "Three here.",
        ]

    def test_directory_of_files(self, tmp_path):
        (tmp_path / "b.txt").write_text("From b.", encoding="utf-8")
        (tmp_path / "a.txt").write_text("From a.", encoding="utf-8")
        corpus, _ = ingest_text(tmp_path)
        assert [d.id for d in corpus.documents] == ["a", "b"]

    def test_sentence_never_spans_paragraph_break(self, tmp_path):
        path = tmp_path / "p.txt"
        path.write_text("no terminal here\n\nnext paragraph", encoding="utf-8")
        corpus, _ = ingest_text(path)
        assert [s.text for s in corpus.documents[0].sentences] == [
            "no terminal here", "next paragraph",
        ]


def test_ingest_roundtrip_tokens(tmp_path):
    path = tmp_path / "c.jsonl"
    rows = [{"text": "Dr. Kim spoke. The U.S. panel listened!"},
            {"sentences": ["already split", "into two"]}]
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    corpus, _ = ingest_jsonl(path, pre_segmented=True)
    for doc in corpus.documents:
        for sentence in doc.sentences:
            assert sentence.tokens == tokenize(sentence.text)
