import numpy as np
import pytest

from pndm.schedule import Cosine, Exponential, LinearBeta, ToyLinear

_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; printed in the terminal summary whether it passes or not."""

    def record(number, name, passed, detail=""):
        status = "PASS" if passed else "FAIL"
        _CRITERIA.append(f"[{status}] criterion {number}: {name} {detail}".rstrip())
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


ALL_SCHEDULES = [
    LinearBeta(),
    Cosine(),
    ToyLinear(),
    Exponential(a=0.0, b=-1.0),
    Exponential(a=-1.0, b=0.0),
    Exponential(a=-2.0, b=-3.0),
]


@pytest.fixture(params=ALL_SCHEDULES, ids=lambda s: f"{s.kind}{tuple(s.params.values())}")
def schedule(request):
    return request.param
