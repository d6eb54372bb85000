import pytest
from hypothesis import given

from conftest import signals
from spfsim.signal import (
    ONE_SIGNAL,
    ZERO_SIGNAL,
    MissingInitialEvent,
    NonMonotoneTimes,
    NonPositiveLength,
    SignalError,
    gate_combine,
    make_pulse,
    make_signal,
    min_closed_pulse_length,
    pulse_train,
    pulses_of,
    restrict_start,
)
from spfsim.timebase import NEG_INF, POS_INF, SQRT2, QTime


def well_formed(s):
    ev = s.events
    assert ev[0].time == NEG_INF
    assert all(a.time < b.time for a, b in zip(ev, ev[1:]))
    assert all(a.value != b.value for a, b in zip(ev, ev[1:]))


def test_make_signal_merges_duplicates():
    s = make_signal([(NEG_INF, 0), (1, 0), (2, 1), (3, 1), (4, 0)])
    assert [(e.time, e.value) for e in s.events[1:]] == [(2, 1), (4, 0)]


@pytest.mark.parametrize("raw,exc", [
    ([(0, 1)], MissingInitialEvent),
    ([], MissingInitialEvent),
    ([(NEG_INF, 0), (2, 1), (1, 0)], NonMonotoneTimes),
    ([(NEG_INF, 0), (1, 1), (1, 0)], NonMonotoneTimes),
])
def test_make_signal_errors(raw, exc):
    with pytest.raises(exc):
        make_signal(raw)


def test_pulse_semantics_half_open():
    p = make_pulse(1, SQRT2)
    assert p.value_at(1) == 1
    assert p.value_at(1 + SQRT2) == 0
    assert p.value_at(QTime(999, 0) / 1000) == 0
    with pytest.raises(NonPositiveLength):
        make_pulse(0, 0)
    with pytest.raises(SignalError):
        make_pulse(-1, 1)


def test_pulse_train_and_pulses():
    s = pulse_train([(5, 1), (0, 2)])
    assert pulses_of(s) == [(0, 2), (5, 1)]
    assert min_closed_pulse_length(s) == 1
    with pytest.raises(SignalError):
        pulse_train([(0, 2), (2, 1)])
    open_tail = make_signal([(NEG_INF, 0), (3, 1)])
    assert pulses_of(open_tail) == [(3, POS_INF)]
    assert min_closed_pulse_length(open_tail) is None


@given(signals())
def test_random_signals_well_formed(s):
    well_formed(s)
    well_formed(s.invert())
    well_formed(s.shift(SQRT2))
    h = QTime(7)
    r = s.restrict(h)
    assert all(e.time <= h for e in r.events[1:])
    assert r.value_at(h) == s.value_at(h)


@given(signals(), signals())
def test_gate_combine_pointwise(a, b):
    for table in ("0111", "0001", "0110"):
        bits = [int(c) for c in table]
        out = gate_combine(bits, [a, b])
        well_formed(out)
        probes = sorted({t for t in a.times() + b.times()} | {QTime(0)})
        probes += [t + QTime(1, 0) / 64 for t in probes]
        for t in probes:
            assert out.value_at(t) == bits[a.value_at(t) | (b.value_at(t) << 1)]


def test_gate_combine_arity():
    assert gate_combine([1], []) == ONE_SIGNAL
    with pytest.raises(ValueError):
        gate_combine([0, 1], [ZERO_SIGNAL, ZERO_SIGNAL])


def test_restrict_start():
    s = make_signal([(NEG_INF, 0), (0, 1), (2, 0)])
    v0, rest = restrict_start(s)
    assert v0 == 1 and [e.time for e in rest] == [2]
    assert s.last_event_time() == 2
    assert ZERO_SIGNAL.is_constant(0) and not s.is_constant()
