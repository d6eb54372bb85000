"""Exact time values in the quadratic field Q(sqrt 2).

A :class:`QTime` is ``a + b*sqrt(2)`` with rational ``a`` and ``b``, plus the
two sentinels :data:`NEG_INF` and :data:`POS_INF`.  Ordering is decided with
integer arithmetic only, so strict inequalities never suffer from rounding.

Text grammar (used by netlists and CLI flags)::

    3/2            rational part only
    3/2+1/1*r2     rational part plus a multiple of sqrt(2)
    -r2, 2*r2      sqrt(2) part only
    -inf, +inf     sentinels
"""

from fractions import Fraction
from math import gcd
import re

from ._purekernels import surd_floor


class SentinelArithmetic(ArithmeticError):
    """Arithmetic on infinite times that has no defined result."""


class ParseError(ValueError):
    def __init__(self, text, position, reason):
        super().__init__(f"{reason} at position {position} in {text!r}")
        self.text = text
        self.position = position
        self.reason = reason


def _sign(p, q):
    if p >= 0 and q >= 0:
        return 0 if (p == 0 and q == 0) else 1
    if p <= 0 and q <= 0:
        return -1
    lhs = p * p
    rhs = 2 * q * q
    if p > 0:
        return 1 if lhs > rhs else -1
    return 1 if rhs > lhs else -1


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot use {type(x).__name__} as a rational time component")


class QTime:
    """Immutable element of Q(sqrt 2), or one of the infinite sentinels."""

    __slots__ = ("_p", "_q", "_d", "_inf", "_h")

    def __init__(self, a=0, b=0):
        fa = _as_fraction(a)
        fb = _as_fraction(b)
        d = fa.denominator * fb.denominator // gcd(fa.denominator, fb.denominator)
        self._set(fa.numerator * (d // fa.denominator), fb.numerator * (d // fb.denominator), d)
        self._inf = 0

    def _set(self, p, q, d):
        g = gcd(gcd(p, q), d)
        if g > 1:
            p //= g
            q //= g
            d //= g
        self._p = p
        self._q = q
        self._d = d
        self._h = None

    @classmethod
    def _raw(cls, p, q, d):
        obj = object.__new__(cls)
        if d < 0:
            p, q, d = -p, -q, -d
        obj._set(p, q, d)
        obj._inf = 0
        return obj

    @classmethod
    def _sentinel(cls, direction):
        obj = object.__new__(cls)
        obj._p = obj._q = 0
        obj._d = 1
        obj._h = None
        obj._inf = direction
        return obj

    @classmethod
    def coerce(cls, x):
        """Turn an int, Fraction, grammar string or QTime into a QTime."""
        if isinstance(x, QTime):
            return x
        if isinstance(x, str):
            return parse(x)
        if isinstance(x, (int, Fraction)):
            f = Fraction(x)
            return cls._raw(f.numerator, 0, f.denominator)
        raise TypeError(f"cannot convert {type(x).__name__} to QTime")

    # -- components ---------------------------------------------------------

    @property
    def a(self):
        self._finite_or_raise()
        return Fraction(self._p, self._d)

    @property
    def b(self):
        self._finite_or_raise()
        return Fraction(self._q, self._d)

    @property
    def is_finite(self):
        return self._inf == 0

    @property
    def is_rational(self):
        return self._inf == 0 and self._q == 0

    def _finite_or_raise(self):
        if self._inf:
            raise SentinelArithmetic("infinite time has no finite components")

    # -- ordering -----------------------------------------------------------

    def _cmp(self, other):
        if self._inf or other._inf:
            if self._inf == other._inf:
                return 0
            return -1 if self._inf < other._inf else 1
        d1, d2 = self._d, other._d
        if self._q == 0 and other._q == 0:
            lhs = self._p * d2
            rhs = other._p * d1
            return (lhs > rhs) - (lhs < rhs)
        return _sign(self._p * d2 - other._p * d1, self._q * d2 - other._q * d1)

    def compare(self, other):
        """Three-way comparison: -1, 0 or 1."""
        return self._cmp(QTime.coerce(other))

    def _other(self, other):
        if isinstance(other, QTime):
            return other
        if isinstance(other, (int, Fraction)):
            return QTime.coerce(other)
        return None

    def __eq__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self._cmp(o) == 0

    def __lt__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self._cmp(o) < 0

    def __le__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self._cmp(o) <= 0

    def __gt__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self._cmp(o) > 0

    def __ge__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self._cmp(o) >= 0

    def __hash__(self):
        # rational values hash like the equal int/Fraction; hashing is hot in
        # dependence-graph construction, so the value is cached
        h = self._h
        if h is None:
            if self._inf:
                h = hash(("inf", self._inf))
            elif self._d == 1:
                h = hash(self._p) if self._q == 0 else hash((self._p, self._q))
            elif self._q == 0:
                h = hash(Fraction(self._p, self._d))
            else:
                h = hash((Fraction(self._p, self._d), Fraction(self._q, self._d)))
            self._h = h
        return h

    def sign(self):
        if self._inf:
            return self._inf
        return _sign(self._p, self._q)

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if self._inf or o._inf:
            if self._inf and o._inf:
                raise SentinelArithmetic("cannot add two infinite times")
            return self if self._inf else o
        if self._d == o._d:
            return QTime._raw(self._p + o._p, self._q + o._q, self._d)
        return QTime._raw(
            self._p * o._d + o._p * self._d,
            self._q * o._d + o._q * self._d,
            self._d * o._d,
        )

    __radd__ = __add__

    def __neg__(self):
        if self._inf:
            return QTime._sentinel(-self._inf)
        return QTime._raw(-self._p, -self._q, self._d)

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if self._inf or o._inf:
            raise SentinelArithmetic("multiplication with an infinite time")
        p = self._p * o._p + 2 * self._q * o._q
        q = self._p * o._q + self._q * o._p
        return QTime._raw(p, q, self._d * o._d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if self._inf or o._inf:
            raise SentinelArithmetic("division with an infinite time")
        if o._p == 0 and o._q == 0:
            raise ZeroDivisionError("division by zero time")
        # 1/(p + q r2) = (p - q r2)/(p^2 - 2 q^2), scaled by the denominators
        norm = o._p * o._p - 2 * o._q * o._q
        num = self * QTime._raw(o._p, -o._q, 1)
        return QTime._raw(num._p * o._d, num._q * o._d, num._d * norm)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def floor(self):
        """Greatest integer not above this value."""
        self._finite_or_raise()
        return surd_floor(self._p, self._q, self._d)

    def frac(self):
        """``self - floor(self)``, in ``[0, 1)``."""
        return self - self.floor()

    def __float__(self):
        if self._inf:
            return float("inf") if self._inf > 0 else float("-inf")
        if self._q == 0:
            return self._p / self._d
        shift = 1 << 80
        return surd_floor(self._p * shift, self._q * shift, self._d) / shift

    # -- text ---------------------------------------------------------------

    def __str__(self):
        return format_time(self)

    def __repr__(self):
        if self._inf:
            return "NEG_INF" if self._inf < 0 else "POS_INF"
        if self._q == 0:
            return f"QTime({Fraction(self._p, self._d)})"
        return f"QTime({Fraction(self._p, self._d)}, {Fraction(self._q, self._d)})"

    def __reduce__(self):
        return (parse, (format_time(self),))


NEG_INF = QTime._sentinel(-1)
POS_INF = QTime._sentinel(1)
ZERO = QTime(0)
ONE = QTime(1)
SQRT2 = QTime(0, 1)


def compare(x, y):
    """Three-way comparison of two times: -1, 0 or 1."""
    return QTime.coerce(x)._cmp(QTime.coerce(y))


def qmin(*xs):
    return min(QTime.coerce(x) for x in xs)


def qmax(*xs):
    return max(QTime.coerce(x) for x in xs)


_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?P<num>\d+(?:\.\d*)?(?:/\d+)?)?
        \s*(?P<r2>\*?\s*r2)?\s*""",
    re.VERBOSE,
)


def parse(text):
    """Parse the QTime text grammar; raises :class:`ParseError`."""
    if not isinstance(text, str):
        raise TypeError("parse expects a string")
    s = text.strip()
    if s in ("-inf", "-oo"):
        return NEG_INF
    if s in ("+inf", "inf", "+oo", "oo"):
        return POS_INF
    if not s:
        raise ParseError(text, 0, "empty time")
    rational = None
    surd = None
    pos = 0
    while pos < len(text):
        if not text[pos:].strip():
            break
        m = _TERM.match(text, pos)
        if m is None or m.end() == pos or (m.group("num") is None and m.group("r2") is None):
            raise ParseError(text, pos, "expected a rational or r2 term")
        if pos > 0 and m.group("sign") is None:
            raise ParseError(text, pos, "expected '+' or '-' between terms")
        r2 = m.group("r2")
        if r2 is not None and m.group("num") is not None and not r2.lstrip().startswith("*"):
            raise ParseError(text, m.start("r2"), "expected '*' before r2")
        try:
            value = Fraction(m.group("num")) if m.group("num") else Fraction(1)
        except (ValueError, ZeroDivisionError):
            raise ParseError(text, m.start("num"), "malformed number") from None
        if m.group("sign") == "-":
            value = -value
        if r2 is not None:
            if surd is not None:
                raise ParseError(text, m.start(), "duplicate r2 term")
            surd = value
        else:
            if rational is not None:
                raise ParseError(text, m.start(), "duplicate rational term")
            rational = value
        pos = m.end()
    return QTime(rational or 0, surd or 0)


def format_time(x):
    """Canonical text: ``p/q+r/s*r2`` (both parts always present) or ``+-inf``."""
    x = QTime.coerce(x)
    if not x.is_finite:
        return "-inf" if x < 0 else "+inf"
    a, b = x.a, x.b
    op = "-" if b < 0 else "+"
    return f"{a.numerator}/{a.denominator}{op}{abs(b.numerator)}/{b.denominator}*r2"


def format_approx(x, digits=15):
    """Decimal approximation for human-facing columns."""
    x = QTime.coerce(x)
    if not x.is_finite:
        return "-inf" if x < 0 else "inf"
    return f"{float(x):.{digits}g}"


def floor_int(x):
    return QTime.coerce(x).floor()
