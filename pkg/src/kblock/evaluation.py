"""Shuffle-test runs, k-block sweeps, and report emission.

Decision rule: the lower-scoring member of an (original, shuffled) pair is
predicted to be the shuffled one, so a prediction is correct iff
score_original > score_shuffled, strictly. Ties count as incorrect; they
are measure-zero for real scorers but constant mocks hit them, and counting
them as wins would flatter degenerate scorers.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

from .corpus import Corpus, truncate
from .rng import derive_seed
from .scoring import DocumentScorer
from .shuffle import make_instance, partition_blocks

DEFAULT_KS = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class TestOutcome:
    doc_id: str
    k: int
    seed: int
    score_original: float | None
    score_shuffled: float | None
    prediction_correct: bool
    skipped_reason: str | None = None
    failed_reason: str | None = None


@dataclass(frozen=True)
class PerKStats:
    accuracy: float
    n_tested: int
    n_skipped: int
    n_failed: int


@dataclass
class RunReport:
    scorer_name: str
    corpus_domain: str
    per_k: dict[int, PerKStats]
    config_snapshot: dict
    run_seed: int
    outcomes: list[TestOutcome] = field(default_factory=list)


class NoTestableDocumentsError(ValueError):
    """Every document was skipped; carries the stats so sweeps can still
    report the k instead of dropping it."""

    def __init__(self, k: int, stats: PerKStats, outcomes: list[TestOutcome]):
        super().__init__(f"no testable documents for k={k}")
        self.stats = stats
        self.outcomes = outcomes


def _evaluate_document(doc, scorer, k, run_seed, max_sentences, sample, hard_fail):
    trimmed = truncate(doc, max_sentences)
    seed = derive_seed(run_seed, doc.id, k, sample)
    if partition_blocks(trimmed, k).num_blocks < 2:
        return TestOutcome(
            doc_id=doc.id, k=k, seed=seed, score_original=None, score_shuffled=None,
            prediction_correct=False, skipped_reason="un-shufflable: single block",
        )
    instance = make_instance(trimmed, k, seed)
    try:
        original = scorer.score_document(instance.original)
        shuffled = scorer.score_document(instance.shuffled)
    except Exception as exc:
        if hard_fail:
            raise
        return TestOutcome(
            doc_id=doc.id, k=k, seed=seed, score_original=None, score_shuffled=None,
            prediction_correct=False, failed_reason=f"{type(exc).__name__}: {exc}",
        )
    return TestOutcome(
        doc_id=doc.id, k=k, seed=seed,
        score_original=original.score, score_shuffled=shuffled.score,
        prediction_correct=original.score > shuffled.score,
    )


def run_shuffle_test(
    corpus: Corpus,
    scorer: DocumentScorer,
    k: int,
    run_seed: int,
    max_sentences: int = 20,
    workers: int = 1,
    samples: int = 1,
    hard_fail: bool = False,
) -> tuple[PerKStats, list[TestOutcome]]:
    """One shuffle test per document (per sample) at block size k.

    Per-document seeds are derived from (run_seed, doc_id, k, sample), so
    adding or removing documents never perturbs the other documents'
    shuffles. Scorer failures are recorded per document and excluded from
    the accuracy denominator; ``hard_fail`` re-raises them instead, for CI.
    """
    if not corpus.documents:
        raise ValueError("empty corpus")
    if k < 1:
        raise ValueError("block size must be positive")
    if samples < 1:
        raise ValueError("samples must be positive")

    jobs = [(doc, sample) for doc in corpus.documents for sample in range(samples)]

    def run(job):
        doc, sample = job
        return _evaluate_document(doc, scorer, k, run_seed, max_sentences, sample, hard_fail)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, jobs))
    else:
        outcomes = [run(job) for job in jobs]
    outcomes.sort(key=lambda o: (o.doc_id, o.seed))

    n_skipped = sum(1 for o in outcomes if o.skipped_reason)
    n_failed = sum(1 for o in outcomes if o.failed_reason)
    n_tested = len(outcomes) - n_skipped - n_failed
    n_correct = sum(1 for o in outcomes if o.prediction_correct)
    stats = PerKStats(
        accuracy=n_correct / n_tested if n_tested else 0.0,
        n_tested=n_tested, n_skipped=n_skipped, n_failed=n_failed,
    )
    if n_tested == 0 and n_failed == 0:
        raise NoTestableDocumentsError(k, stats, outcomes)
    return stats, outcomes


def kbst_sweep(
    corpus: Corpus,
    scorer: DocumentScorer,
    ks: Sequence[int] = DEFAULT_KS,
    run_seed: int = 0,
    max_sentences: int = 20,
    workers: int = 1,
    samples: int = 1,
    hard_fail: bool = False,
    config_snapshot: dict | None = None,
    progress: Callable[[int, PerKStats], None] | None = None,
) -> RunReport:
    """Run the shuffle test at each block size and assemble one report.

    A k at which every document is un-shufflable is reported with
    n_tested = 0 rather than dropped.
    """
    if not ks:
        raise ValueError("ks must be non-empty")
    if any(k < 1 for k in ks):
        raise ValueError("every block size must be positive")
    report = RunReport(
        scorer_name=scorer.name,
        corpus_domain=corpus.domain,
        per_k={},
        config_snapshot=config_snapshot or {},
        run_seed=run_seed,
    )
    for k in ks:
        try:
            stats, outcomes = run_shuffle_test(
                corpus, scorer, k, run_seed,
                max_sentences=max_sentences, workers=workers,
                samples=samples, hard_fail=hard_fail,
            )
        except NoTestableDocumentsError as exc:
            stats, outcomes = exc.stats, exc.outcomes
        report.per_k[k] = stats
        report.outcomes.extend(outcomes)
        if progress is not None:
            progress(k, stats)
    report.outcomes.sort(key=lambda o: (o.k, o.doc_id, o.seed))
    return report


def report_to_dict(report: RunReport) -> dict:
    return {
        "scorer_name": report.scorer_name,
        "corpus_domain": report.corpus_domain,
        "run_seed": report.run_seed,
        "config_snapshot": report.config_snapshot,
        "per_k": {str(k): asdict(stats) for k, stats in report.per_k.items()},
        "outcomes": [asdict(o) for o in report.outcomes],
    }


def report_from_dict(obj: dict) -> RunReport:
    return RunReport(
        scorer_name=obj["scorer_name"],
        corpus_domain=obj["corpus_domain"],
        per_k={int(k): PerKStats(**stats) for k, stats in obj["per_k"].items()},
        config_snapshot=obj["config_snapshot"],
        run_seed=obj["run_seed"],
        outcomes=[TestOutcome(**o) for o in obj["outcomes"]],
    )


def parse_report(text: str) -> RunReport:
    return report_from_dict(json.loads(text))


def _format_table(report: RunReport) -> str:
    ks = sorted(report.per_k)
    label = f"{report.scorer_name} - {report.corpus_domain}"
    width = max(len(label), len("Model")) + 2
    header = "Model".ljust(width) + "".join(f"{k:>8}" for k in ks)
    title = " " * width + "Block Size".center(8 * len(ks))
    accuracy_row = label.ljust(width) + "".join(
        f"{100.0 * report.per_k[k].accuracy:>8.1f}" for k in ks
    )
    counts_row = "n tested".ljust(width) + "".join(
        f"{report.per_k[k].n_tested:>8}" for k in ks
    )
    return "\n".join([title, header, accuracy_row, counts_row]) + "\n"


def emit_report(report: RunReport, format: str = "json") -> str:
    """Serialize a report: 'json' (full audit, byte-stable), 'tsv', or
    'text-table' (accuracy grid in percent, one row per scorer/domain)."""
    if format == "json":
        return json.dumps(report_to_dict(report), sort_keys=True, indent=2,
                          ensure_ascii=False) + "\n"
    if format == "tsv":
        lines = ["k\taccuracy\tn_tested\tn_skipped\tn_failed"]
        for k in sorted(report.per_k):
            s = report.per_k[k]
            lines.append(f"{k}\t{s.accuracy!r}\t{s.n_tested}\t{s.n_skipped}\t{s.n_failed}")
        return "\n".join(lines) + "\n"
    if format == "text-table":
        return _format_table(report)
    raise ValueError(f"unknown report format {format!r}")
