import pytest
from hypothesis import settings

from toric_koszul import builtin_fan
from toric_koszul.fan import build_fan

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

BUILTINS = ["a2", "p1", "p2", "p1xp1", "hirzebruch1"]
COMPLETE = ["p1", "p2", "p1xp1", "hirzebruch1"]


@pytest.fixture(params=BUILTINS)
def any_fan(request):
    return builtin_fan(request.param)


@pytest.fixture(params=COMPLETE)
def complete_fan(request):
    return builtin_fan(request.param)


@pytest.fixture
def a3():
    return build_fan(3, [(1, 0, 0), (0, 1, 0), (0, 0, 1)], [(0, 1, 2)])


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.TITLES):
        terminalreporter.write_line(mod.RESULTS.get(n, f"[{n:2d}] {mod.TITLES[n]}: NOT RUN"))
