import numpy as np
import pytest

from bowts.dataio import SyntheticSpec, gen_synthetic

ACCEPTANCE_RESULTS = []


@pytest.fixture(scope="session")
def small_dataset():
    """Three classes, 12 series each, short enough for fast end-to-end tests."""
    return gen_synthetic(SyntheticSpec(series_per_class=12, length_min=400, length_max=400, seed=11))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid, status, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{cid}: {status}  {detail}")
