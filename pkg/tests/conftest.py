import pytest

from usosink.gf2 import BitMatrix, BitVector

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def mat(*rows: str) -> BitMatrix:
    return BitMatrix.from_rows(list(rows), ncols=len(rows[0]))


def vec(s: str) -> BitVector:
    return BitVector.from_str(s)


@pytest.fixture
def record_criterion():
    """Store a criterion verdict for the summary printed at the end of the run."""

    def record(number: int, ok: bool, detail: str = "") -> None:
        ACCEPTANCE_RESULTS[number] = (ok, detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
