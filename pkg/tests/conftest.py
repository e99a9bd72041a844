import pytest
from hypothesis import HealthCheck, settings

from dtoda.lax import LaxSystem

settings.register_profile(
    "dtoda",
    max_examples=200,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture, HealthCheck.data_too_large],
)
settings.load_profile("dtoda")


@pytest.fixture(scope="session")
def sys43():
    """n = 4, eps order 3, depth 3, flat (canonical jet) coefficients."""
    return LaxSystem(4, 3, 3)


@pytest.fixture(scope="session")
def sys44():
    return LaxSystem(4, 4, 3)


@pytest.fixture(scope="session")
def sys53():
    return LaxSystem(5, 3, 3)


# acceptance summary: one line per criterion -------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, printed=False): acceptance criterion n; printed=True marks a strict-xfail part")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    n = mark.args[0]
    side = "printed" if mark.kwargs.get("printed") else "main"
    failed = call.excinfo is not None
    _CRITERIA.setdefault(n, {"main": [], "printed": []})[side].append(failed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        main, printed = _CRITERIA[n]["main"], _CRITERIA[n]["printed"]
        ok = main and not any(main)
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({len(main)} checks)"
        if printed:
            expected = all(printed)
            line += f"; literal/printed variant {'strict xfail as expected' if expected else 'UNEXPECTEDLY PASSED'}"
        tr.write_line(line)
