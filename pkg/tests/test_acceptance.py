"""Acceptance criteria at their stated tolerances; one printed line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the report lines.
"""

import pytest

from semtransport.cost_models import default_profile
from semtransport.experiments.acceptance import CRITERIA, check_acceptance


@pytest.fixture(scope="module")
def report():
    return check_acceptance()


@pytest.mark.parametrize("number", [n for n, _, _ in CRITERIA])
def test_criterion(report, number, capsys):
    (result,) = [r for r in report.results if r.number == number]
    with capsys.disabled():
        print("\n" + result.line())
    details = "\n".join(
        f"{c.name}: expected {c.expected}, actual {c.actual}, tolerance {c.tolerance}" for c in result.failures
    )
    assert result.within_budget, f"criterion {number} took {result.runtime_s:.2f} s"
    assert result.passed, details


def test_doubled_audio_encode_flags_crossover():
    low, high = default_profile().latency["audio_turn_encode"].low, default_profile().latency["audio_turn_encode"].high
    profile = default_profile().with_latency(audio_turn_encode=(2 * low, 2 * high))
    (result,) = check_acceptance(profile, only=[3]).results
    assert not result.passed
    assert [c.name for c in result.failures] == ["crossover with encode at Low (Mbps)"]


def test_zero_cushion_flags_batch_thresholds():
    (result,) = check_acceptance(beta=0.0, only=[4]).results
    assert not result.passed
    assert {c.name for c in result.failures} == {
        "gap-free threshold, 3 s batches (ms)",
        "gap-free threshold, 5 s batches (ms)",
    }
