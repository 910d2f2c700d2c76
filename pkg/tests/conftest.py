from pathlib import Path

import pytest

from factualsg.embeddings import load_store
from factualsg.lexicons import Lexicons, MorphTable

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def lexicons():
    return Lexicons.load()


@pytest.fixture(scope="session")
def morphology():
    return MorphTable.load()


@pytest.fixture(scope="session")
def fixture_store():
    return load_store(DATA / "store.tsv", DATA / "images.tsv", fallback=False)


# one PASS/FAIL/SKIP line per acceptance criterion
_ACCEPTANCE: dict = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_ac" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[1]
    if report.when == "call" or report.outcome != "passed":
        prev = _ACCEPTANCE.get(name)
        if prev is None or prev[0] == "PASS":
            outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
            _ACCEPTANCE[name] = (outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        outcome, duration = _ACCEPTANCE[name]
        criterion = name[len("test_ac"):]
        number, _, title = criterion.partition("_")
        terminalreporter.write_line(f"AC{int(number):>2} {outcome:4}  {title.replace('_', ' '):<22} {duration:7.3f}s")
