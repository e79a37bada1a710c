from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
_ACCEPTANCE = {}


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def acceptance():
    """Record one verdict line per acceptance criterion."""

    def record(number, ok, detail):
        verdict = {True: "PASS", False: "FAIL", None: "SKIP"}[ok]
        _ACCEPTANCE[number] = f"criterion {number:>2}: {verdict}  {detail}"
        print(_ACCEPTANCE[number])
        if ok is None:
            pytest.skip(detail)
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
