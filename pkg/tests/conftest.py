import pytest

# criterion id -> (passed, detail), filled by the acceptance module
VERDICTS = {}


@pytest.fixture
def verdict(request):
    """Record and print one line per acceptance criterion, then assert it."""

    def record(cid, ok, detail):
        ok = bool(ok)
        VERDICTS[cid] = (ok, detail)
        print(f"{cid} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, f"{cid}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(VERDICTS, key=lambda c: int(c[1:])):
        ok, detail = VERDICTS[cid]
        terminalreporter.write_line(f"{cid} {'PASS' if ok else 'FAIL'}: {detail}")
