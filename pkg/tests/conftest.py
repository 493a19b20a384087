import random

import pytest

from selfsim.mealy import basilica, grigorchuk, odometer
from selfsim.zd import ZdAction


def random_products(backend, count, seed, max_factors=3):
    """``count`` random words in the generators and their inverses."""
    rng = random.Random(seed)
    gens = backend.default_generators()
    letters = gens + [g.inverse() for g in gens]
    out = []
    for _ in range(count):
        g = backend.identity
        for _ in range(rng.randint(1, max_factors)):
            g = g * rng.choice(letters)
        out.append(g)
    return out


BUILTINS = {
    "odometer4": lambda: odometer(4),
    "basilica": basilica,
    "grigorchuk": grigorchuk,
}


@pytest.fixture(params=sorted(BUILTINS))
def builtin(request):
    return BUILTINS[request.param]()


@pytest.fixture
def zd_2i():
    return ZdAction([[2, 0], [0, 2]])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
