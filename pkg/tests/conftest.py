from __future__ import annotations

from pathlib import Path

import pytest

from parasched.dag import parse_dag_text
from parasched.packages import bundled_corpus_path, load_corpus

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "parasched" / "data" / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(bundled_corpus_path())


@pytest.fixture(scope="session")
def kitchen_dag():
    return parse_dag_text(fixture_text("kitchen_dag.txt"))


@pytest.fixture(scope="session")
def deadlock_dag():
    return parse_dag_text(fixture_text("deadlock_dag.txt"))


@pytest.fixture
def pkg(corpus):
    def get(scene: str, letters: str):
        return [p for p in corpus.packages(scene) if p.package_id in letters]

    return get


# ---- acceptance report --------------------------------------------------------------

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    """Store one acceptance verdict; the summary hook prints them in order."""
    ACCEPTANCE[criterion] = (ok, detail)
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
