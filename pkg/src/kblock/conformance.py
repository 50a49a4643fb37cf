"""Provider conformance checks for the external scorer wire protocol.

Any process claiming to implement the protocol (the test suite's mock, a
neural bridge, a third-party wrapper) should pass ``run_provider_conformance``
unmodified. Checks cover the handshake contract, id correlation under
randomized request ids, scoring determinism, finiteness, and per-request
error behavior (a bad request must produce an error object, not kill the
process).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

from .external import ExternalScorerHandle
from .rng import SplitMix64

CONFORMANCE_SENTENCES = [
    "The inspection began at nine.",
    "Two of the valves needed new seals.",
    "Everyone signed the summary before leaving.",
]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _check(results: list[CheckResult], name: str, condition: bool, detail: str = "") -> bool:
    results.append(CheckResult(name=name, passed=bool(condition), detail="" if condition else detail))
    return bool(condition)


def run_provider_conformance(
    cmd: Sequence[str] | str, timeout_s: float = 60.0
) -> list[CheckResult]:
    """Spawn the provider command and run every conformance vector against
    it. Returns one CheckResult per vector; all must pass."""
    results: list[CheckResult] = []
    handle = ExternalScorerHandle.spawn(cmd, timeout_s=timeout_s)
    try:
        try:
            handle.handshake()
            _check(results, "handshake", True)
        except Exception as exc:
            _check(results, "handshake", False, f"{type(exc).__name__}: {exc}")
            return results
        _check(
            results, "handshake-modes", bool(handle.modes),
            f"advertised modes: {handle.modes!r}",
        )
        _check(
            results, "handshake-max-tokens",
            handle.max_tokens is not None and handle.max_tokens >= 1,
            f"max_tokens: {handle.max_tokens!r}",
        )
        mode = handle.modes[0]

        try:
            first = handle.score(CONFORMANCE_SENTENCES, mode)
            _check(results, "score-basic", True)
            _check(
                results, "score-finite", math.isfinite(first.score),
                f"score: {first.score!r}",
            )
            _check(
                results, "score-token-count", first.token_count > 0,
                f"token_count: {first.token_count!r}",
            )
            second = handle.score(CONFORMANCE_SENTENCES, mode)
            _check(
                results, "score-deterministic",
                second.score == first.score and second.token_count == first.token_count,
                f"{(first.score, first.token_count)} vs {(second.score, second.token_count)}",
            )
        except Exception as exc:
            _check(results, "score-basic", False, f"{type(exc).__name__}: {exc}")
            return results

        # Every advertised mode must actually answer.
        for extra_mode in handle.modes[1:]:
            try:
                handle.score(CONFORMANCE_SENTENCES, extra_mode)
                _check(results, f"score-mode-{extra_mode}", True)
            except Exception as exc:
                _check(results, f"score-mode-{extra_mode}", False,
                       f"{type(exc).__name__}: {exc}")

        # Randomized-id correlation: 100 requests, each response must carry
        # its own request's id.
        rng = SplitMix64(0xC0FFEE)
        correlated = True
        detail = ""
        for i in range(100):
            rid = f"conf-{rng.next_u64():016x}"
            reply = handle.request(
                {"type": "score", "id": rid, "mode": mode,
                 "sentences": [CONFORMANCE_SENTENCES[i % len(CONFORMANCE_SENTENCES)]]}
            )
            if reply.get("type") != "result" or reply.get("id") != rid:
                correlated = False
                detail = f"request {i}: id {rid!r} answered with {json.dumps(reply)[:120]}"
                break
        _check(results, "id-correlation-randomized", correlated, detail)

        # A bad request must yield an error object with the request id, and
        # the provider must keep serving afterwards.
        reply = handle.request(
            {"type": "score", "id": "conf-bad-mode", "mode": "nonsense",
             "sentences": ["One sentence."]}
        )
        _check(
            results, "error-unknown-mode",
            reply.get("type") == "error" and reply.get("id") == "conf-bad-mode",
            f"got {json.dumps(reply)[:120]}",
        )
        reply = handle.request({"type": "score", "id": "conf-empty", "mode": mode, "sentences": []})
        _check(
            results, "error-empty-sentences",
            reply.get("type") == "error" and reply.get("id") == "conf-empty",
            f"got {json.dumps(reply)[:120]}",
        )
        reply = handle.request({"type": "bogus", "id": "conf-bogus"})
        _check(
            results, "error-unknown-type",
            reply.get("type") == "error" and reply.get("id") == "conf-bogus",
            f"got {json.dumps(reply)[:120]}",
        )
        try:
            survivor = handle.score(CONFORMANCE_SENTENCES, mode)
            _check(
                results, "keeps-serving-after-errors",
                survivor.score == first.score,
                f"{survivor.score!r} vs {first.score!r}",
            )
        except Exception as exc:
            _check(results, "keeps-serving-after-errors", False, f"{type(exc).__name__}: {exc}")
    finally:
        handle.close()
    return results


def format_conformance(results: list[CheckResult]) -> str:
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        suffix = f"  ({r.detail})" if r.detail and not r.passed else ""
        lines.append(f"{status}  {r.name}{suffix}")
    return "\n".join(lines)


def all_passed(results: list[CheckResult]) -> bool:
    return all(r.passed for r in results)
