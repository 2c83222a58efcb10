from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

import pytest

_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """record(n, ok, detail) logs one pass/fail line for an acceptance criterion."""
    def record(n, ok, detail=""):
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        _ACCEPTANCE.append((n, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
