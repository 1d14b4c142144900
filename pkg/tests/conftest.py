import numpy as np
import pytest

from mdsfountain import field_new
from mdsfountain._backend import available
from mdsfountain.codes import build_lrfc_only, build_rs, build_spc

ACCEPTANCE_LINES = []

BACKENDS = available()


@pytest.fixture(scope="session")
def f2():
    return field_new(1)


@pytest.fixture(scope="session")
def f4():
    return field_new(2)


@pytest.fixture(scope="session")
def f16():
    return field_new(4)


@pytest.fixture(scope="session")
def f256():
    return field_new(8)


@pytest.fixture(scope="session")
def rs15(f16):
    return build_rs(15, 10, f16)


@pytest.fixture(scope="session")
def spc11():
    return build_spc(10)


@pytest.fixture(scope="session")
def lrfc16(f16):
    return build_lrfc_only(10, f16)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=sorted(BACKENDS))
def backend(request):
    return BACKENDS[request.param]


@pytest.fixture(scope="session")
def report():
    def record(number, ok, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
