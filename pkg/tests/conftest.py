from functools import lru_cache

import pytest

from workbench.netfile import bundled_network
from workbench.workload import analyze


@lru_cache(maxsize=None)
def analysis(name: str):
    return analyze(bundled_network(name).net)


@pytest.fixture(scope="session")
def get():
    """Cached analysis of a bundled network by name."""
    return analysis


_ACCEPTANCE: dict[int, tuple[bool, float, str]] = {}


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, seconds, note = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'} "
                                    f"({seconds:.2f} s) {note}")
