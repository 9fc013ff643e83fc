"""Shared fixtures plus a per-criterion summary for the acceptance suite."""

from __future__ import annotations

import pytest

from eidkit.biometrics import MatchConfig, SensorModel
from eidkit.config import ScenarioConfig

# Criterion labels printed in the terminal summary, keyed by the acceptance
# test name prefix.
ACCEPTANCE_LABELS = {
    "test_c01": "C1  happy path: genuine scenario accepts, all steps pass, 50 seeds",
    "test_c02": "C2  clone resistance: reject at challenge_response, 50 seeds",
    "test_c03": "C3  revocation and expiry rejections, 50 seeds",
    "test_c04": "C4  privacy surface: no template/private-key exfiltration path",
    "test_c05": "C5  one-time enrollment over 1000 random command sequences",
    "test_c06": "C6  matcher oracle: greedy <= optimal, equal on >= 95/100",
    "test_c07": "C7  rates: FRR/FAR monotone, FER forced to 0, under 60 s",
    "test_c08": "C8  separation at defaults: 100/100 genuine, 100/100 impostor",
    "test_c09": "C9  determinism: transcripts and ledger byte-identical",
    "test_c10": "C10 encoding stability: golden certificate and CRL bytes",
}

_acceptance_results: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    prefix = name.split("_probe")[0][:8]
    if prefix in ACCEPTANCE_LABELS:
        _acceptance_results[prefix] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for prefix in sorted(ACCEPTANCE_LABELS):
        if prefix in _acceptance_results:
            outcome = _acceptance_results[prefix]
            mark = "PASS" if outcome == "passed" else "FAIL"
            terminalreporter.write_line(f"[{mark}] {ACCEPTANCE_LABELS[prefix]}")


@pytest.fixture
def match_config():
    return MatchConfig()


@pytest.fixture
def sensor():
    return SensorModel()


@pytest.fixture
def base_config():
    return ScenarioConfig(seed=11)


@pytest.fixture
def fast_config():
    """Cheaper matcher settings for tests that run many scenarios."""
    return ScenarioConfig(
        seed=11,
        finger_minutiae=20,
        match=MatchConfig(rotation_candidates=16),
    )
