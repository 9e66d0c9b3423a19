from fractions import Fraction

import hypothesis.strategies as st
from hypothesis import settings

from kruglab.dist import DiscreteDistribution
from kruglab.stepfn import StepFunction

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

lengths = st.floats(0.01, 1.0, allow_nan=False)
values = st.floats(0.0, 10.0, allow_nan=False)


@st.composite
def step_functions(draw, max_segments=6, unit=True):
    """Step functions; with ``unit`` the total length is rescaled into ``[0, 1]``."""
    n = draw(st.integers(0, max_segments))
    ls = [draw(lengths) for _ in range(n)]
    vs = [draw(values) for _ in range(n)]
    if unit and ls:
        s = sum(ls)
        if s > 1:
            ls = [l / s * 0.999 for l in ls]
    return StepFunction.from_pairs(zip(ls, vs))


@st.composite
def float_laws(draw, max_atoms=4, integer=False):
    n = draw(st.integers(1, max_atoms))
    if integer:
        vs = draw(st.lists(st.integers(-5, 5), min_size=n, max_size=n, unique=True))
        vs = [float(v) for v in vs]
    else:
        vs = draw(st.lists(st.floats(-5, 5, allow_nan=False), min_size=n, max_size=n, unique=True))
    ws = [draw(st.floats(0.05, 1.0)) for _ in range(n)]
    s = sum(ws)
    return DiscreteDistribution(tuple((v, w / s) for v, w in zip(vs, ws)))


@st.composite
def exact_laws(draw, max_atoms=3):
    n = draw(st.integers(1, max_atoms))
    vs = draw(st.lists(st.integers(-4, 4), min_size=n, max_size=n, unique=True))
    ws = [draw(st.integers(1, 6)) for _ in range(n)]
    s = sum(ws)
    return DiscreteDistribution(tuple((Fraction(v), Fraction(w, s)) for v, w in zip(vs, ws)))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
