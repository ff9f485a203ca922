import numpy as np
import pytest

# filled by tests/test_acceptance.py: (number, title, passed, seconds, detail)
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, passed, secs, detail in sorted(ACCEPTANCE_RESULTS):
        mark = "PASS" if passed else "FAIL"
        extra = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"[{mark}] {num}. {title}: {secs:.1f}s{extra}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
