"""Delay functions and channel semantics.

Three channel semantics are supported:

* ``constant``: the input delayed by a fixed positive amount, with the
  channel's initial value shown before the delay has elapsed;
* ``forgetful``: a single-history channel whose per-event delay depends on
  the gap ``T`` between an input event and the last *surviving* output event;
* ``nonforgetful``: as above, but ``T`` is measured against the most recent
  *potential* output event, cancelled or not (register ``r``).

Single-history channels are implemented as whole-list transformers: the
complete input event list goes in, the complete output list comes out.
"""

from bisect import bisect_left
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import mpmath

from .signal import Event, Signal, make_signal
from .timebase import NEG_INF, POS_INF, QTime, ZERO


class ChannelError(ValueError):
    pass


class DomainError(ChannelError):
    pass


class ConstantDelayNotClassifiable(ChannelError):
    pass


class Semantics(str, Enum):
    CONSTANT = "constant"
    FORGETFUL = "forgetful"
    NONFORGETFUL = "nonforgetful"


class Case(str, Enum):
    CASE1 = "case1"
    CASE2_1 = "case2.1"
    CASE2_2 = "case2.2"


@dataclass(frozen=True)
class Limits:
    inf: QTime       # right limit at -delta_infinity
    infinity: QTime  # limit at +infinity
    minus: QTime     # left limit at -inf (meaningful for non-constant delays)


def _q(x):
    return QTime.coerce(x)


class DelayFunction:
    """Nondecreasing delay function with a finite positive limit at infinity."""

    kind = "abstract"

    def __call__(self, T):
        T = _q(T)
        if T.is_finite and T <= -self.limits().infinity:
            raise DomainError(f"delay queried at {T}, outside (-{self.limits().infinity}, inf]")
        return self._eval(T)

    def _eval(self, T):
        raise NotImplementedError

    def limits(self):
        raise NotImplementedError

    def is_constant(self):
        lim = self.limits()
        return lim.inf == lim.infinity

    def classify(self):
        raise NotImplementedError

    def gamma_bracket(self, tol=None):
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError


class Constant(DelayFunction):
    kind = "constant"

    def __init__(self, d):
        self.d = _q(d)
        if self.d <= ZERO or not self.d.is_finite:
            raise ChannelError(f"constant delay must be positive and finite, got {self.d}")

    def _eval(self, T):
        return self.d

    def limits(self):
        return Limits(self.d, self.d, self.d)

    def classify(self):
        raise ConstantDelayNotClassifiable("constant delays have no case")

    def gamma_bracket(self, tol=None):
        return ZERO, ZERO

    def to_json(self):
        return {"kind": "constant", "d": str(self.d)}

    def __eq__(self, other):
        return isinstance(other, Constant) and other.d == self.d

    def __hash__(self):
        return hash(("constant", self.d))

    def __repr__(self):
        return f"Constant({self.d!r})"


class PiecewiseConstant(DelayFunction):
    """Step delay: ``value_k`` on ``(threshold_{k-1}, threshold_k]``, ``tail`` above.

    Thresholds must increase strictly, values must not decrease, and the tail
    is the limit at infinity.
    """

    kind = "piecewise"

    def __init__(self, breakpoints, tail):
        self.breakpoints = tuple((_q(t), _q(v)) for t, v in breakpoints)
        self.tail = _q(tail)
        if self.tail <= ZERO or not self.tail.is_finite:
            raise ChannelError("limit at infinity must be positive and finite")
        prev_t, prev_v = None, None
        for t, v in self.breakpoints:
            if not (t.is_finite and v.is_finite):
                raise ChannelError("breakpoints must be finite")
            if prev_t is not None and t <= prev_t:
                raise ChannelError("breakpoint thresholds must increase strictly")
            if prev_v is not None and v < prev_v:
                raise ChannelError("delay function must be nondecreasing")
            prev_t, prev_v = t, v
        if prev_v is not None and prev_v > self.tail:
            raise ChannelError("delay function must be nondecreasing")
        self._thresholds = [t for t, _ in self.breakpoints]

    def _eval(self, T):
        if not T.is_finite:
            return self.tail
        k = bisect_left(self._thresholds, T)
        return self.breakpoints[k][1] if k < len(self.breakpoints) else self.tail

    def _right_limit(self, x):
        # value on (x, x + eps) is the piece of the first threshold strictly above x
        for t, v in self.breakpoints:
            if t > x:
                return v
        return self.tail

    def _left_limit(self, x):
        # value on (x - eps, x) is the piece of the first threshold at or above x
        for t, v in self.breakpoints:
            if t >= x:
                return v
        return self.tail

    def limits(self):
        inf = self._right_limit(-self.tail)
        minus = self._left_limit(-inf) if inf < self.tail else self.tail
        return Limits(inf, self.tail, minus)

    def classify(self):
        lim = self.limits()
        if lim.inf == lim.infinity:
            raise ConstantDelayNotClassifiable("delay is constant on (-delta_inf, inf)")
        if self._right_limit(-lim.inf) < lim.infinity:
            return Case.CASE1
        return Case.CASE2_1 if lim.minus == lim.infinity else Case.CASE2_2

    def _pieces(self):
        lo = NEG_INF
        for t, v in self.breakpoints:
            yield lo, t, v
            lo = t
        yield lo, POS_INF, self.tail

    def gamma_bracket(self, tol=None):
        # g(D) = D - tail + delta(D - tail) is strictly increasing within a piece
        dinf = self.tail
        for lo, hi, v in self._pieces():
            d_lo = lo + dinf if lo.is_finite else NEG_INF
            d_hi = hi + dinf if hi.is_finite else POS_INF
            if d_hi <= ZERO:
                continue
            start = max(d_lo, dinf - v, ZERO) if d_lo.is_finite else max(dinf - v, ZERO)
            if start < d_hi:
                return start, start
        raise AssertionError("tail piece always admits positive pulse lengths")

    def to_json(self):
        return {
            "kind": "piecewise",
            "breakpoints": [[str(t), str(v)] for t, v in self.breakpoints],
            "tail": str(self.tail),
        }

    def __eq__(self, other):
        return (type(other) is type(self) and other.breakpoints == self.breakpoints
                and other.tail == self.tail)

    def __hash__(self):
        return hash((self.kind, self.breakpoints, self.tail))

    def __repr__(self):
        return f"PiecewiseConstant({list(self.breakpoints)!r}, {self.tail!r})"


class Inertial(PiecewiseConstant):
    """``delta0`` if ``T > T0``, else ``-T0``; pulses up to ``T0 + delta0`` vanish."""

    kind = "inertial"

    def __init__(self, delta0, T0):
        delta0, T0 = _q(delta0), _q(T0)
        if delta0 <= ZERO:
            raise ChannelError("inertial delay needs delta0 > 0")
        if T0 <= -delta0:
            raise ChannelError("inertial delay needs T0 > -delta0")
        self.delta0 = delta0
        self.T0 = T0
        super().__init__([(T0, -T0)], delta0)

    def to_json(self):
        return {"kind": "inertial", "delta0": str(self.delta0), "T0": str(self.T0)}

    def __repr__(self):
        return f"Inertial({self.delta0!r}, {self.T0!r})"


def _mpf(x):
    a, b = x.a, x.b
    v = mpmath.mpf(a.numerator) / a.denominator
    if b:
        v += mpmath.mpf(b.numerator) / b.denominator * mpmath.sqrt(2)
    return v


class PID(DelayFunction):
    """``tp0 * (1 - exp(-(T - T0)/tau))``, floored to ``precision_bits`` binary places.

    Flooring a correctly rounded value keeps the function nondecreasing; the
    cache clamp below guards against the rare last-bit error of the underlying
    exponential.
    """

    kind = "pid"

    def __init__(self, tp0, tau, T0, precision_bits=48):
        self.tp0, self.tau, self.T0 = _q(tp0), _q(tau), _q(T0)
        for name, v in (("tp0", self.tp0), ("tau", self.tau), ("T0", self.T0)):
            if v <= ZERO or not v.is_finite:
                raise ChannelError(f"PID parameter {name} must be positive")
        self.precision_bits = int(precision_bits)
        self._scale = 1 << self.precision_bits
        self._cache_keys = []
        self._cache_vals = []
        self._limits = None

    def _raw(self, T):
        with mpmath.workprec(self.precision_bits + 64):
            v = _mpf(self.tp0) * (1 - mpmath.exp(-(_mpf(T) - _mpf(self.T0)) / _mpf(self.tau)))
            n = int(mpmath.floor(v * self._scale))
        return QTime(Fraction(n, self._scale))

    def _eval(self, T):
        if not T.is_finite:
            return self.tp0
        keys = self._cache_keys
        k = bisect_left(keys, T)
        if k < len(keys) and keys[k] == T:
            return self._cache_vals[k]
        v = self._raw(T)
        if k > 0 and v < self._cache_vals[k - 1]:
            v = self._cache_vals[k - 1]
        if k < len(keys) and v > self._cache_vals[k]:
            v = self._cache_vals[k]
        keys.insert(k, T)
        self._cache_vals.insert(k, v)
        return v

    def limits(self):
        if self._limits is None:
            inf = self._raw(-self.tp0)
            self._limits = Limits(inf, self.tp0, self._raw(-inf))
        return self._limits

    def is_constant(self):
        return False

    def classify(self):
        # the closed form stays strictly below tp0 at every finite argument
        return Case.CASE1

    def gamma_bracket(self, tol=None):
        tol = _q(tol if tol is not None else Fraction(1, 1 << 32))
        dinf = self.tp0

        def g(D):
            return D - dinf + self(D - dinf)

        lo, hi = ZERO, dinf
        while g(hi) <= ZERO:
            lo, hi = hi, hi * 2
        while hi - lo > tol:
            mid = (lo + hi) / 2
            if g(mid) > ZERO:
                hi = mid
            else:
                lo = mid
        return lo, hi

    def to_json(self):
        return {"kind": "pid", "tp0": str(self.tp0), "tau": str(self.tau),
                "T0": str(self.T0), "precision_bits": self.precision_bits}

    def __eq__(self, other):
        return isinstance(other, PID) and (other.tp0, other.tau, other.T0, other.precision_bits) == (
            self.tp0, self.tau, self.T0, self.precision_bits)

    def __hash__(self):
        return hash(("pid", self.tp0, self.tau, self.T0, self.precision_bits))

    def __repr__(self):
        return f"PID({self.tp0!r}, {self.tau!r}, {self.T0!r}, precision_bits={self.precision_bits})"


def delay_from_json(obj):
    kind = obj.get("kind")
    if kind == "constant":
        return Constant(obj["d"])
    if kind == "inertial":
        return Inertial(obj["delta0"], obj["T0"])
    if kind == "piecewise":
        return PiecewiseConstant([tuple(bp) for bp in obj["breakpoints"]], obj["tail"])
    if kind == "pid":
        return PID(obj["tp0"], obj["tau"], obj["T0"], obj.get("precision_bits", 48))
    raise ChannelError(f"unknown delay kind {kind!r}")


def delay_eval(f, T):
    return f(T)


def limits(f):
    return f.limits()


def is_constant_delay(f):
    return f.is_constant()


def classify_case(f):
    return f.classify()


@dataclass(frozen=True)
class ChannelSpec:
    semantics: Semantics
    delay: DelayFunction
    initial_value: int = 0

    def __post_init__(self):
        object.__setattr__(self, "semantics", Semantics(self.semantics))
        if self.initial_value not in (0, 1):
            raise ChannelError("channel initial value must be 0 or 1")
        if self.semantics is Semantics.CONSTANT and not isinstance(self.delay, Constant):
            raise ChannelError("constant-delay channels need a constant delay function")

    @property
    def is_constant_delay(self):
        return self.semantics is Semantics.CONSTANT

    @property
    def x(self):
        return self.initial_value

    def apply(self, s):
        if self.semantics is Semantics.CONSTANT:
            return apply_constant(self, s)
        if self.semantics is Semantics.FORGETFUL:
            return apply_forgetful(self, s)
        return apply_nonforgetful(self, s)

    def lookback(self):
        """How far past a horizon the input must be known for exact output up to it."""
        if self.semantics is Semantics.CONSTANT:
            return ZERO
        return max(ZERO, -self.delay.limits().inf)

    def to_json(self):
        return {"semantics": self.semantics.value, "delay": self.delay.to_json(),
                "x": self.initial_value}

    @classmethod
    def from_json(cls, obj):
        return cls(Semantics(obj["semantics"]), delay_from_json(obj["delay"]), int(obj.get("x", 0)))


def constant_channel(d, x=0):
    return ChannelSpec(Semantics.CONSTANT, Constant(d), x)


def apply_constant(ch, s):
    d = ch.delay.d
    raw = [(NEG_INF, ch.initial_value), (d, s.value_at(ZERO))]
    raw += [(e.time + d, e.value) for e in s.events[1:] if e.time > ZERO]
    return make_signal(raw)


@dataclass
class ChannelTrace:
    """Instrumentation of one single-history run."""

    input_list: list
    # surviving output entries: (time, value, generating input time)
    outputs: list = field(default_factory=list)
    # deletions: (iteration, deleted output time, r_{n-1} or None for forgetful)
    deletions: list = field(default_factory=list)
    signal: Signal = None


def input_list(ch, s):
    """Finite input events seen by the channel algorithm, after preprocessing."""
    events = list(s.events[1:])
    if ch.initial_value != s.initial_value and not (events and events[0].time == ZERO):
        events.insert(0, Event(ZERO, s.initial_value))
    return events


def run_single_history(delay, x, events, forgetful, trace=None):
    """Output list ``[(time, value, source_time), ...]`` before any post-filter."""
    out = [(NEG_INF, x, NEG_INF)]
    r = NEG_INF
    for n, (t, v) in enumerate(events):
        last_t, last_v, _ = out[-1]
        if v == last_v:
            continue
        ref = last_t if forgetful else r
        tn = t + delay(t - ref)
        if not forgetful:
            r_prev, r = r, tn
        if tn > ref:
            out.append((tn, v, t))
            continue
        if len(out) == 1:
            raise AssertionError("single-history run tried to delete the initial event")
        dropped = out.pop()
        if trace is not None:
            trace.deletions.append((n, dropped[0], None if forgetful else r_prev))
    return out


def _finish_nonforgetful(out, x):
    kept = [e for e in out[1:] if e[0] >= ZERO]
    if kept and kept[0][1] == x:
        kept = kept[1:]
    return [out[0]] + kept


def trace_channel(ch, s):
    """Run a single-history channel with instrumentation; see :class:`ChannelTrace`."""
    if ch.semantics is Semantics.CONSTANT:
        raise ChannelError("tracing is defined for single-history channels")
    events = input_list(ch, s)
    trace = ChannelTrace(input_list=events)
    forgetful = ch.semantics is Semantics.FORGETFUL
    out = run_single_history(ch.delay, ch.initial_value, events, forgetful, trace)
    if not forgetful:
        out = _finish_nonforgetful(out, ch.initial_value)
    trace.outputs = out
    trace.signal = make_signal([(t, v) for t, v, _ in out])
    return trace


def apply_forgetful(ch, s):
    out = run_single_history(ch.delay, ch.initial_value, input_list(ch, s), True)
    return make_signal([(t, v) for t, v, _ in out])


def apply_nonforgetful(ch, s):
    out = run_single_history(ch.delay, ch.initial_value, input_list(ch, s), False)
    out = _finish_nonforgetful(out, ch.initial_value)
    return make_signal([(t, v) for t, v, _ in out])


def gamma_bracket(ch, tol=None):
    """``(lo, hi)`` enclosing the shortest pulse length the channel can pass.

    Exact kinds return ``lo == hi``; pulses of length ``<= lo`` are cancelled
    and pulses of length ``> hi`` survive.
    """
    delay = ch.delay if isinstance(ch, ChannelSpec) else ch
    return delay.gamma_bracket(tol)


def gamma(ch, tol=None):
    return gamma_bracket(ch, tol)[0]
