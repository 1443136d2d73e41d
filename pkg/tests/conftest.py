import pytest

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture
def record():
    def _record(number, title, checks):
        """``checks`` is a list of (label, passed) pairs."""
        failed = [label for label, ok in checks if not ok]
        ACCEPTANCE[number] = (title, not failed, failed, [label for label, _ in checks])
        assert not failed, f"criterion {number} failed: {failed}"
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, failed, labels = ACCEPTANCE[number]
        tr.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")
        for label in labels:
            mark = "FAIL" if label in failed else "ok"
            tr.write_line(f"    [{mark}] {label}")
