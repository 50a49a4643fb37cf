"""kblock: zero-shot coherence evaluation via the k-block shuffle test.

Shuffles documents at a configurable block granularity, scores original and
shuffled versions with pluggable likelihood scorers, and reports how reliably
each scorer tells them apart across block sizes.
"""

__version__ = "0.1.0"

from .annotation import (
    AnnotationBundle, AnnotationRecord, AnswerKey, cohen_kappa,
    generate_bundle, kappa_from_records, read_records_csv, score_annotations,
)
from .corpus import (
    Corpus, Document, IngestReport, Sentence, ingest_jsonl, ingest_text,
    make_sentence, segment_sentences, tokenize, truncate,
)
from .evaluation import (
    PerKStats, RunReport, TestOutcome, emit_report, kbst_sweep,
    parse_report, run_shuffle_test,
)
from .external import (
    ExternalScorer, ExternalScorerHandle, ExternalScorerError,
    ProtocolError, ProviderReportedError, ScoreTimeout, external_score,
)
from .ngram import NgramModel, NgramScorer, load_model, save_model, train_ngram
from .rng import SplitMix64, derive_seed, fisher_yates
from .scoring import (
    ScoreResult, WindowConfig, generative_score, mlm_score,
    sliding_window_mlm_score, sliding_window_score, window_spans,
)
from .shuffle import (
    BlockPartition, ShuffleInstance, instance_from_dict, instance_to_json,
    make_instance, partition_blocks, shuffle_blocks,
)

__all__ = [
    "AnnotationBundle", "AnnotationRecord", "AnswerKey", "BlockPartition",
    "Corpus", "Document", "ExternalScorer", "ExternalScorerError",
    "ExternalScorerHandle", "IngestReport", "NgramModel", "NgramScorer",
    "PerKStats", "ProtocolError", "ProviderReportedError", "RunReport",
    "ScoreResult", "ScoreTimeout", "Sentence", "ShuffleInstance",
    "SplitMix64", "TestOutcome", "WindowConfig", "cohen_kappa",
    "derive_seed", "emit_report", "external_score", "fisher_yates",
    "generate_bundle", "generative_score", "ingest_jsonl", "ingest_text",
    "kappa_from_records", "kbst_sweep", "load_model", "make_instance",
    "make_sentence", "mlm_score", "parse_report", "partition_blocks",
    "read_records_csv", "run_shuffle_test", "save_model", "score_annotations",
    "segment_sentences", "shuffle_blocks", "sliding_window_mlm_score",
    "sliding_window_score", "tokenize", "train_ngram", "truncate",
    "window_spans",
]
