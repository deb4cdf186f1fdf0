import pytest

from qdmcavity.model import QdmParams

ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])


@pytest.fixture
def eit():
    """Reference EIT point used throughout: Gamma20 = 1e-4, Te = 0.5."""
    return QdmParams(Gamma10=1.0, Gamma20=1e-4, Te=0.5, omega12=0.0)
