import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "netsep", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("netsep")


def h2(p: float) -> float:
    """Binary entropy oracle, written out independently of the library."""
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


@pytest.fixture
def binary_entropy_oracle():
    return h2


_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion, runtime budget included."""

    def record(cid: int, ok: bool, elapsed: float, budget: float | None, detail: str) -> bool:
        within = budget is None or elapsed < budget
        verdict = "PASS" if ok and within else "FAIL"
        limit = f" (budget {budget:g} s)" if budget is not None else ""
        line = f"C{cid} {verdict}: {detail}; {elapsed:.1f} s{limit}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok and within

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
