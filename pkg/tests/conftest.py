import numpy as np
import pytest
from hypothesis import strategies as st

from ssgforms.mp_sequence import Constant, Explicit, Geometric, Harmonic

BUILTIN = {
    "constant": Constant(0.25),
    "geometric": Geometric(0.5, 0.5),
    "harmonic": Harmonic(0.5),
}

rho_values = st.floats(min_value=0.01, max_value=0.99, allow_nan=False)


@st.composite
def matching_sequences(draw, length=8):
    """Random explicit prefix continued by a constant tail."""
    head = draw(st.lists(rho_values, min_size=length, max_size=length))
    return Explicit(tuple(head), tail=Constant(draw(rho_values)))


@st.composite
def convergent_sequences(draw):
    return Geometric(
        draw(st.floats(min_value=0.01, max_value=0.9)),
        draw(st.floats(min_value=0.01, max_value=0.9)),
    )


def random_sequences(count, seed=2024, length=8):
    rng = np.random.default_rng(seed)
    return [
        Explicit(tuple(rng.uniform(0.01, 0.99, length)), tail=Constant(float(rng.uniform(0.01, 0.99))))
        for _ in range(count)
    ]


@pytest.fixture(params=sorted(BUILTIN))
def builtin_seq(request):
    return BUILTIN[request.param]


# Acceptance lines are collected here by tests/test_acceptance.py and echoed at the end.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
