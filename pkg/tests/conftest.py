import pytest

from hybridrec.dataset import build_dataset
from hybridrec.synthetic import make_followee_predictive

ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, label = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {label}")


@pytest.fixture
def small_corpus():
    """u1{a:.5,b:.5}, u2{a:.6,b:.4}, u3{c:1} with keyword ids a=1, b=2, c=3."""
    return build_dataset(
        users={1: (10, {1: 0.5, 2: 0.5}), 2: (10, {1: 0.6, 2: 0.4}), 3: (10, {3: 1.0})},
    )


@pytest.fixture(scope="session")
def fixture_dataset():
    return make_followee_predictive()
