"""Binary signals as normalized event lists."""

from bisect import bisect_right
from typing import NamedTuple

from .timebase import NEG_INF, POS_INF, QTime, ZERO


class SignalError(ValueError):
    pass


class NonMonotoneTimes(SignalError):
    pass


class MissingInitialEvent(SignalError):
    pass


class NonPositiveLength(SignalError):
    pass


class Event(NamedTuple):
    time: QTime
    value: int


def _event(item):
    t, v = item
    if v not in (0, 1):
        raise SignalError(f"event value must be 0 or 1, got {v!r}")
    return Event(QTime.coerce(t), int(v))


class Signal:
    """A binary signal, stored as its alternating event list.

    The first event is always at ``NEG_INF`` and carries the initial value;
    later events have strictly increasing finite times and alternate values.
    Build instances with :func:`make_signal` (or the helpers below) rather than
    calling the constructor on unchecked data.
    """

    __slots__ = ("events", "_times")

    def __init__(self, events):
        self.events = tuple(events)
        self._times = [e.time for e in self.events]

    @property
    def initial_value(self):
        return self.events[0].value

    @property
    def final_value(self):
        return self.events[-1].value

    @property
    def transitions(self):
        """Finite-time events."""
        return self.events[1:]

    def times(self):
        return list(self._times[1:])

    def value_at(self, t):
        t = QTime.coerce(t)
        return self.events[bisect_right(self._times, t) - 1].value

    def restrict(self, horizon):
        """Drop events strictly after ``horizon``."""
        horizon = QTime.coerce(horizon)
        k = bisect_right(self._times, horizon)
        if k == len(self.events):
            return self
        return Signal(self.events[:k])

    def shift(self, dt):
        dt = QTime.coerce(dt)
        return Signal([self.events[0]] + [Event(e.time + dt, e.value) for e in self.events[1:]])

    def invert(self):
        return Signal([Event(e.time, 1 - e.value) for e in self.events])

    def is_constant(self, value=None):
        if len(self.events) != 1:
            return False
        return value is None or self.events[0].value == value

    def last_event_time(self):
        """Time of the last transition, or ``None`` for a constant signal."""
        return self.events[-1].time if len(self.events) > 1 else None

    def __eq__(self, other):
        if not isinstance(other, Signal):
            return NotImplemented
        return self.events == other.events

    def __hash__(self):
        return hash(self.events)

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __repr__(self):
        body = ", ".join(f"({e.time!s}, {e.value})" if e.time.is_finite else f"(-inf, {e.value})"
                         for e in self.events)
        return f"Signal([{body}])"


def make_signal(raw):
    """Normalize a raw event list into a :class:`Signal`.

    Adjacent events carrying the same value are merged, keeping the earliest.
    """
    items = [_event(e) for e in raw]
    if not items or items[0].time != NEG_INF:
        raise MissingInitialEvent("event list must start with an event at -inf")
    out = [items[0]]
    prev_time = items[0].time
    for e in items[1:]:
        if not e.time.is_finite:
            raise NonMonotoneTimes("only the initial event may have an infinite time")
        if e.time < prev_time:
            raise NonMonotoneTimes(f"event at {e.time} follows event at {prev_time}")
        prev_time = e.time
        if e.value == out[-1].value:
            continue
        if e.time == out[-1].time:
            raise NonMonotoneTimes(f"two transitions at time {e.time}")
        out.append(e)
    return Signal(out)


def constant(value):
    return Signal([Event(NEG_INF, int(value))])


ZERO_SIGNAL = constant(0)
ONE_SIGNAL = constant(1)


def make_pulse(start, length):
    """The pulse that is 1 on ``[start, start + length)`` and 0 elsewhere."""
    start = QTime.coerce(start)
    length = QTime.coerce(length)
    if length <= ZERO:
        raise NonPositiveLength(f"pulse length must be positive, got {length}")
    if start < ZERO:
        raise SignalError("pulses start at a non-negative time")
    return Signal([Event(NEG_INF, 0), Event(start, 1), Event(start + length, 0)])


def pulse_train(pulses):
    """Signal built from ``(start, length)`` pairs; the pulses must not touch."""
    raw = [(NEG_INF, 0)]
    for start, length in sorted((QTime.coerce(s), QTime.coerce(l)) for s, l in pulses):
        if length <= ZERO:
            raise NonPositiveLength(f"pulse length must be positive, got {length}")
        if len(raw) > 1 and start <= raw[-1][0]:
            raise SignalError("pulses in a train must be separated")
        raw += [(start, 1), (start + length, 0)]
    return make_signal(raw)


def value_at(s, t):
    return s.value_at(t)


def pulses_of(s):
    """``(start, length)`` for each pulse; an unterminated last pulse gets ``POS_INF``."""
    out = []
    ev = s.events
    for k in range(1, len(ev)):
        if ev[k].value != 1:
            continue
        if k + 1 < len(ev):
            out.append((ev[k].time, ev[k + 1].time - ev[k].time))
        else:
            out.append((ev[k].time, POS_INF))
    return out


def min_closed_pulse_length(s):
    lengths = [length for _, length in pulses_of(s) if length.is_finite]
    return min(lengths) if lengths else None


def gate_combine(table, signals):
    """Zero-time Boolean combination of ``signals`` by a truth table.

    ``table[k]`` is the output for the input vector whose bit ``j`` is the value
    of ``signals[j]`` (first input is the least significant bit).
    """
    if len(table) != 1 << len(signals):
        raise ValueError(f"truth table of size {len(table)} does not fit {len(signals)} inputs")
    if not signals:
        return constant(table[0])
    times = sorted({t for s in signals for t in s._times[1:]})
    cursors = [0] * len(signals)
    values = [s.events[0].value for s in signals]

    def index():
        k = 0
        for j, v in enumerate(values):
            k |= v << j
        return k

    raw = [(NEG_INF, table[index()])]
    for t in times:
        for j, s in enumerate(signals):
            ev = s.events
            c = cursors[j]
            while c + 1 < len(ev) and ev[c + 1].time <= t:
                c += 1
            cursors[j] = c
            values[j] = ev[c].value
        out = table[index()]
        if out != raw[-1][1]:
            raw.append((t, out))
    return Signal([Event(t, v) for t, v in raw])


def restrict_start(s):
    """Value at time 0 together with the events at positive times."""
    return s.value_at(ZERO), [e for e in s.events[1:] if e.time > ZERO]
