from pathlib import Path

import pytest

from mlgap import kernels
from mlgap.core import BinaryCode, Entry, LabeledCodeSet

DATA = Path(__file__).parent / "data"


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    """Run a test once per available kernel backend."""
    previous = kernels.BACKEND
    kernels.use(request.param)
    yield request.param
    kernels.use(previous)


def code(s: str) -> BinaryCode:
    return BinaryCode.from_string(s)


@pytest.fixture
def worked_lgap():
    from mlgap.formats import load

    return load(DATA / "worked_lgap_db.txt"), load(DATA / "worked_lgap_query.txt")[0]


@pytest.fixture
def tie_block():
    db = LabeledCodeSet(4, [Entry(code("0101"), lab) for lab in [0] * 5 + [1] * 5])
    return db, Entry(code("0101"), 0)


ACCEPTANCE = {}


def record(number: int, title: str, ok: bool, detail: str = "") -> bool:
    """Store and print one acceptance line; returns ``ok`` so callers can assert on it."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
    ACCEPTANCE[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
