import numpy as np
import pytest

from stairtest import CategoricalSpace, SparsePmf, build_stair


@pytest.fixture
def small_space():
    return CategoricalSpace(1, 6)


@pytest.fixture
def small_p(small_space):
    # regions {0,1}@0.3, {2,3}@0.2, {4,5}@0
    return build_stair(small_space, 3, 4 / 6, [0.6, 0.4])


@pytest.fixture
def small_q(small_space):
    return SparsePmf.from_dict(small_space, {0: 0.4, 1: 0.2, 2: 0.1, 3: 0.3})


@pytest.fixture
def default_space():
    return CategoricalSpace(6, 6)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# Acceptance tests append (label, passed, detail) here; the lines are printed
# in the terminal summary so they show up without ``-s``.
ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    def report(label, passed, detail=""):
        line = f"{'PASS' if passed else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
