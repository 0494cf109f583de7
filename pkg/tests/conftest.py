import math

import numpy as np
import pytest
from hypothesis import settings

from tauquant.discretize import Grid
from tauquant.quantize import ComplexSymbol
from tauquant.tau import from_spec, make_preset

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

NONLINEAR = "w/2 + 0.1*sin(w)"


def band(width: float = 4.0, centre: float = 0.0) -> str:
    """Gaussian band in k, negligible beyond a few widths."""
    return f"exp(-(((k - ({centre}))/{width})^2))"


def sym(re: str, im: str = "0", n: int = 1) -> ComplexSymbol:
    return ComplexSymbol.parse(re, im, n)


@pytest.fixture(scope="session")
def grid64():
    return Grid(1, 64, math.pi)


@pytest.fixture(scope="session")
def grid128():
    return Grid(1, 128, math.pi)


@pytest.fixture(scope="session")
def presets():
    return {name: make_preset(name, 1) for name in ("kn", "akn", "weyl")}


@pytest.fixture(scope="session")
def nonlinear_tau():
    return from_spec(NONLINEAR, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict = {}


def record(number: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = f"acceptance {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    print(ACCEPTANCE[number])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
