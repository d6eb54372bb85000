from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from spfsim import _kernels
from spfsim.signal import make_signal
from spfsim.timebase import NEG_INF, QTime

settings.register_profile("spfsim", deadline=None, max_examples=150)
settings.load_profile("spfsim")

small_fracs = st.fractions(min_value=-20, max_value=20, max_denominator=12)

qtimes = st.builds(QTime, small_fracs, st.fractions(min_value=-6, max_value=6, max_denominator=6))


@st.composite
def signals(draw, max_events=8, t_max=20):
    """Random valid signals with rational event times in ``[0, t_max]``."""
    n = draw(st.integers(0, max_events))
    raw = draw(st.lists(st.fractions(min_value=0, max_value=t_max, max_denominator=8),
                        min_size=n, max_size=n, unique=True))
    x0 = draw(st.integers(0, 1))
    events = [(NEG_INF, x0)]
    v = x0
    for t in sorted(raw):
        v = 1 - v
        events.append((QTime(t), v))
    return make_signal(events)


@pytest.fixture(params=sorted(_kernels.backends()))
def kernels(request):
    return _kernels.backends()[request.param]


def F(x):
    return Fraction(x)


# acceptance lines are collected here and echoed once at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
