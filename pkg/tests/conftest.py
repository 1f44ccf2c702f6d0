import pytest

from sllambda.model.coh import CohBackend
from sllambda.model.strict import StrictBackend
from sllambda.parser import parse_term


@pytest.fixture(params=["strict", "coh"])
def backend(request):
    return StrictBackend() if request.param == "strict" else CohBackend()


def T(src, basis=()):
    return parse_term(src, basis)


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
