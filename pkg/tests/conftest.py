import os

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
VERDICTS: list[str] = []


@pytest.fixture(autouse=True)
def _repo_root(monkeypatch):
    # fixture paths are written relative to the repository root
    monkeypatch.chdir(ROOT)


@pytest.fixture
def verdict():
    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} | {detail}"
        print(line)
        VERDICTS.append(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS):
            terminalreporter.write_line(line)
