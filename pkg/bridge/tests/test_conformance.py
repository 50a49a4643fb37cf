"""The bridge must pass the primary harness's provider conformance suite,
unmodified: the same vectors the protocol mock is held to."""

from __future__ import annotations

from kblock.conformance import all_passed, format_conformance, run_provider_conformance

from .conftest import serve_cmd


def test_bridge_passes_shared_conformance_suite(model_dir):
    results = run_provider_conformance(
        serve_cmd(model_dir / "causal.pt", model_dir / "masked.pt"),
        timeout_s=300.0,
    )
    print("\n" + format_conformance(results))
    assert all_passed(results), format_conformance(results)


def test_generative_only_bridge_is_also_conformant(model_dir):
    results = run_provider_conformance(
        serve_cmd(model_dir / "causal.pt"), timeout_s=300.0
    )
    assert all_passed(results), format_conformance(results)
    names = {r.name for r in results}
    assert "score-mode-mlm" not in names  # mode not advertised, not probed
