import pytest

_ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def record():
    """Record the verdict of one acceptance criterion for the summary."""

    def rec(key: str, ok: bool, detail: str) -> None:
        _ACCEPTANCE[key] = (ok, detail)
        print(f"{key}: {'PASS' if ok else 'FAIL'} {detail}")

    return rec


def _order(key: str):
    head = key.split()[1] if " " in key else key
    return (0, int(head), key) if head.isdigit() else (1, 0, key)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=_order):
        ok, detail = _ACCEPTANCE[key]
        verdict = "PASS" if ok else "FAIL"
        if key.startswith("info"):
            verdict = "INFO"
        terminalreporter.write_line(f"{key}: {verdict} {detail}")
