import pytest

_VERDICTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def verdict():
    """Record one acceptance outcome; the line is printed and kept for the summary."""

    def record(number: int, ok: bool, detail: str) -> bool:
        prev = _VERDICTS.get(number)
        ok = ok and (prev is None or prev[0])
        detail = detail if prev is None else f"{prev[1]}; {detail}"
        _VERDICTS[number] = (ok, detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        ok, detail = _VERDICTS[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
