import functools

import numpy as np
import pytest

from nmpovm import admissible_pairs, build


def classes(dims=(2, 3, 4, 5)):
    return [(d, p.N, p.M) for d in dims for p in admissible_pairs(d)]


@functools.lru_cache(maxsize=None)
def measurement(d, N, M, basis="gellmann", t="max"):
    return build(d, N, M, basis=basis, t=t)


def class_id(c):
    return "d{}-N{}-M{}".format(*c)


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
