import time
from contextlib import contextmanager

import pytest

_RESULTS = []


@pytest.fixture
def criterion():
    """Context manager that records one PASS/FAIL line for an acceptance criterion."""

    @contextmanager
    def record(number, title):
        notes = []
        start = time.perf_counter()
        try:
            yield notes
        except BaseException as exc:
            msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
            _RESULTS.append((number, title, False, f"{type(exc).__name__}: {msg}", time.perf_counter() - start))
            raise
        _RESULTS.append((number, title, True, "; ".join(notes), time.perf_counter() - start))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail, elapsed in sorted(_RESULTS, key=lambda r: r[0]):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number} {status} [{elapsed:.1f}s] {title}: {detail}")
