import numpy as np
import pytest

from gaussgamma import paper_ground_truth


@pytest.fixture
def truth():
    return paper_ground_truth()


@pytest.fixture
def paper_sample(truth):
    return truth.sample(np.random.default_rng(2024), 1000)


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion, shown even under capture."""
    lines = []
    for outcome in ("passed", "failed", "error", "xfailed"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::" not in nodeid or rep.when not in ("call", "setup"):
                continue
            if rep.when == "setup" and outcome == "passed":
                continue
            detail = dict(getattr(rep, "user_properties", ())).get("detail", "")
            status = "PASS" if outcome == "passed" else "FAIL"
            lines.append((nodeid.split("::")[-1], f"{status} {nodeid.split('::')[-1]}: {detail}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
