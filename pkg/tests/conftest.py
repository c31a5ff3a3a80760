from pathlib import Path

import pytest

from systema.parser import parse_protocol

PROTOCOLS = Path(__file__).resolve().parent.parent / "protocols"


def load(name: str):
    return parse_protocol((PROTOCOLS / f"{name}.sat").read_text(encoding="utf-8")).body


@pytest.fixture
def protocol():
    return load


# one line per acceptance criterion, filled in by test_acceptance
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
