import sys

import pytest

from randfun import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """JIT-compile the hot kernels once so criterion timings measure the
    computation, not compilation."""
    _kernels.warmup()
    yield


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for name in ("tests.test_acceptance", "test_acceptance"):
        mod = sys.modules.get(name)
        if mod is not None:
            lines = getattr(mod, "ACCEPTANCE_LINES", [])
            if lines:
                break
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
