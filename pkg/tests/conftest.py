import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tripindex.corpus import example_corpus, sort_trips  # noqa: E402
from tripindex.queryengine import build_index  # noqa: E402

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def corpus_e():
    return example_corpus()


@pytest.fixture(scope="session")
def sorted_e(corpus_e):
    return sort_trips(corpus_e)


@pytest.fixture(scope="session")
def index_e(corpus_e):
    return build_index(corpus_e, 64)


@pytest.fixture(scope="session")
def tcsa_e(index_e):
    return index_e.tcsa


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda s: int(s.split()[0][1:])):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
