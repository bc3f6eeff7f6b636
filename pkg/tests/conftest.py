import time

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# one line per acceptance criterion, printed in the terminal summary
_CRITERIA: dict = {}


class CriterionTimer:
    def __init__(self, number: int, title: str, budget: float):
        self.number, self.title, self.budget = number, title, budget
        self.details = []

    def note(self, text: str):
        self.details.append(text)

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        ok = exc_type is None and elapsed < self.budget
        why = "" if exc_type is None else f" [{exc_type.__name__}]"
        if exc_type is None and not ok:
            why = " [over time budget]"
        extra = ("; " + "; ".join(self.details)) if self.details else ""
        _CRITERIA[self.number] = (
            f"criterion {self.number:2d} {'PASS' if ok else 'FAIL'}  {self.title}  "
            f"({elapsed:.1f}s of {self.budget:g}s){why}{extra}"
        )
        if exc_type is None:
            assert elapsed < self.budget, f"criterion {self.number} took {elapsed:.1f}s"
        return False


@pytest.fixture
def criterion():
    return CriterionTimer


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[k])
