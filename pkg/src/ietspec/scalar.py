"""Exact scalar fields: the rationals and real quadratic extensions Q(sqrt d).

Rationals are plain :class:`fractions.Fraction` values.  Elements of
Q(sqrt d) are :class:`QuadraticReal`, stored as ``(p + q*sqrt(d)) / r`` with
integers ``p, q, r`` (``r > 0``, ``gcd(p, q, r) == 1``).  Signs are decided
exactly by comparing ``p**2`` with ``q**2 * d``, so no floating point is
involved anywhere.

Canonical text forms are ``p/q`` (or ``p`` for integers) and
``p/q+r/s*sqrt(d)``; :func:`parse_scalar` accepts both and
:func:`format_scalar` produces them.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational
from typing import Union

from .errors import DomainError, FieldMismatchError, ParseError

__all__ = [
    "QuadraticReal",
    "Scalar",
    "RationalField",
    "QuadraticField",
    "Field",
    "compare",
    "floor_div",
    "parse_scalar",
    "format_scalar",
    "field_of",
    "common_field",
    "to_float",
]


def _squarefree(d: int) -> bool:
    if d < 2:
        return False
    k = 2
    while k * k <= d:
        if d % (k * k) == 0:
            return False
        k += 1
    return True


def _sign(p: int, q: int, d: int) -> int:
    """Sign of p + q*sqrt(d)."""
    if q == 0:
        return (p > 0) - (p < 0)
    if p >= 0 and q > 0:
        return 1
    if p <= 0 and q < 0:
        return -1
    pp = p * p
    qq = q * q * d
    if p > 0:  # q < 0
        return (pp > qq) - (pp < qq)
    return (qq > pp) - (qq < pp)


class QuadraticReal:
    """Element ``(p + q*sqrt(d)) / r`` of the real quadratic field Q(sqrt d)."""

    __slots__ = ("_p", "_q", "_r", "_d")

    def __init__(self, a=0, b=0, d: int = 5):
        d = int(d)
        if not _squarefree(d):
            raise DomainError(f"sqrt({d}) does not define a real quadratic field")
        a = Fraction(a)
        b = Fraction(b)
        r = a.denominator * b.denominator // math.gcd(a.denominator, b.denominator)
        self._set(a.numerator * (r // a.denominator), b.numerator * (r // b.denominator), r, d)

    def _set(self, p, q, r, d):
        g = math.gcd(math.gcd(p, q), r)
        if g != 1:
            p //= g
            q //= g
            r //= g
        self._p, self._q, self._r, self._d = p, q, r, d

    @classmethod
    def _raw(cls, p, q, r, d):
        obj = object.__new__(cls)
        if r < 0:
            p, q, r = -p, -q, -r
        obj._set(p, q, r, d)
        return obj

    @classmethod
    def sqrt(cls, d: int) -> "QuadraticReal":
        return cls(0, 1, d)

    # components -----------------------------------------------------------

    @property
    def a(self) -> Fraction:
        return Fraction(self._p, self._r)

    @property
    def b(self) -> Fraction:
        return Fraction(self._q, self._r)

    @property
    def d(self) -> int:
        return self._d

    @property
    def integer_parts(self):
        """``(p, q, r)`` with value ``(p + q*sqrt(d)) / r``."""
        return self._p, self._q, self._r

    def is_rational(self) -> bool:
        return self._q == 0

    def conjugate(self) -> "QuadraticReal":
        return QuadraticReal._raw(self._p, -self._q, self._r, self._d)

    # coercion ---------------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, QuadraticReal):
            if other._d != self._d:
                raise FieldMismatchError(
                    f"cannot combine elements of Q(sqrt {self._d}) and Q(sqrt {other._d})"
                )
            return other
        if isinstance(other, (int, Fraction)) or isinstance(other, Rational):
            other = Fraction(other)
            return QuadraticReal._raw(other.numerator, 0, other.denominator, self._d)
        return None

    # arithmetic -------------------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o._r == self._r:
            return QuadraticReal._raw(self._p + o._p, self._q + o._q, self._r, self._d)
        return QuadraticReal._raw(
            self._p * o._r + o._p * self._r,
            self._q * o._r + o._q * self._r,
            self._r * o._r,
            self._d,
        )

    __radd__ = __add__

    def __neg__(self):
        return QuadraticReal._raw(-self._p, -self._q, self._r, self._d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadraticReal._raw(
            self._p * o._p + self._q * o._q * self._d,
            self._p * o._q + self._q * o._p,
            self._r * o._r,
            self._d,
        )

    __rmul__ = __mul__

    def _inverse(self):
        n = self._p * self._p - self._q * self._q * self._d
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt d)")
        return QuadraticReal._raw(self._r * self._p, -self._r * self._q, n, self._d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o._inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self._inverse()

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return (self._inverse()) ** (-k)
        result = QuadraticReal._raw(1, 0, 1, self._d)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # order --------------------------------------------------------------------

    def sign(self) -> int:
        return _sign(self._p, self._q, self._d)

    def _cmp(self, other):
        o = self._coerce(other)
        if o is None:
            return None
        if o._r == self._r:
            return _sign(self._p - o._p, self._q - o._q, self._d)
        return _sign(
            self._p * o._r - o._p * self._r,
            self._q * o._r - o._q * self._r,
            self._d,
        )

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c >= 0

    def __eq__(self, other):
        if isinstance(other, QuadraticReal) and other._d != self._d:
            return self._q == 0 and other._q == 0 and self.a == other.a
        c = self._cmp(other)
        return NotImplemented if c is None else c == 0

    def __hash__(self):
        if self._q == 0:
            return hash(Fraction(self._p, self._r))
        return hash((self._p, self._q, self._r, self._d))

    def __bool__(self):
        return self._p != 0 or self._q != 0

    def __floor__(self):
        # floor(q*sqrt(d)) is exact via isqrt because sqrt(d) is irrational.
        q = self._q
        if q == 0:
            t = 0
        elif q > 0:
            t = math.isqrt(q * q * self._d)
        else:
            t = -math.isqrt(q * q * self._d) - 1
        return (self._p + t) // self._r

    def __float__(self):
        return float(Fraction(self._p, self._r)) + float(Fraction(self._q, self._r)) * math.sqrt(self._d)

    def __repr__(self):
        return f"QuadraticReal({format_scalar(self)!r})"

    def __str__(self):
        return format_scalar(self)

    def __reduce__(self):
        return (QuadraticReal, (self.a, self.b, self._d))


Scalar = Union[Fraction, QuadraticReal]


# fields ------------------------------------------------------------------------


class RationalField:
    """The field Q; elements are :class:`Fraction`."""

    d = None

    def __call__(self, value) -> Fraction:
        if isinstance(value, QuadraticReal):
            if not value.is_rational():
                raise FieldMismatchError(f"{value} is not rational")
            return value.a
        if isinstance(value, str):
            value = parse_scalar(value)
            return self(value)
        return Fraction(value)

    def parse(self, text: str) -> Fraction:
        return self(parse_scalar(text))

    def to_json(self):
        return "rational"

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("rational")

    def __repr__(self):
        return "RationalField()"


class QuadraticField:
    """The field Q(sqrt d); every element is a :class:`QuadraticReal`."""

    def __init__(self, d: int):
        if not _squarefree(int(d)):
            raise DomainError(f"sqrt({d}) does not define a real quadratic field")
        self.d = int(d)

    def __call__(self, value) -> QuadraticReal:
        if isinstance(value, str):
            value = parse_scalar(value, d=self.d)
        if isinstance(value, QuadraticReal):
            if value.d != self.d:
                raise FieldMismatchError(f"element of Q(sqrt {value.d}) given to Q(sqrt {self.d})")
            return value
        value = Fraction(value)
        return QuadraticReal._raw(value.numerator, 0, value.denominator, self.d)

    def parse(self, text: str) -> QuadraticReal:
        return self(text)

    def to_json(self):
        return {"sqrt": self.d}

    def __eq__(self, other):
        return isinstance(other, QuadraticField) and other.d == self.d

    def __hash__(self):
        return hash(("sqrt", self.d))

    def __repr__(self):
        return f"QuadraticField({self.d})"


Field = Union[RationalField, QuadraticField]


def field_from_json(spec) -> Field:
    if spec in (None, "rational"):
        return RationalField()
    if isinstance(spec, dict) and "sqrt" in spec:
        return QuadraticField(int(spec["sqrt"]))
    raise ParseError(f"unknown field description {spec!r}")


def field_of(*values) -> Field:
    """Smallest supported field holding all ``values``."""
    d = None
    for v in values:
        if isinstance(v, QuadraticReal):
            if d is None:
                d = v.d
            elif d != v.d:
                raise FieldMismatchError(f"values from Q(sqrt {d}) and Q(sqrt {v.d})")
    return RationalField() if d is None else QuadraticField(d)


def common_field(values):
    """Coerce an iterable of scalars into their common field; returns ``(field, list)``."""
    values = list(values)
    field = field_of(*values)
    return field, [field(v) for v in values]


# operations ----------------------------------------------------------------------


def compare(x, y) -> int:
    """Exact three-way comparison: -1, 0 or 1.

    Raises :class:`FieldMismatchError` for elements of different quadratic
    fields.
    """
    if isinstance(x, QuadraticReal):
        c = x._cmp(y)
    elif isinstance(y, QuadraticReal):
        c = y._cmp(x)
        c = None if c is None else -c
    else:
        x, y = Fraction(x), Fraction(y)
        c = (x > y) - (x < y)
    if c is None:
        raise FieldMismatchError(f"cannot compare {x!r} and {y!r}")
    return c


def floor_div(x, y) -> int:
    """``floor(x / y)`` for ``y > 0``."""
    if compare(y, 0) <= 0:
        raise DomainError("floor_div needs a positive divisor")
    if isinstance(x, QuadraticReal) or isinstance(y, QuadraticReal):
        if not isinstance(x, QuadraticReal):
            x = y._coerce(x)
        return math.floor(x / y)
    return Fraction(x) // Fraction(y)


def to_float(x) -> float:
    return float(x)


_RAT = r"[+-]?\d+(?:/\d+)?"
_SCALAR_RE = re.compile(
    rf"^(?:(?P<a>{_RAT}))?"
    rf"(?:(?P<sign>^|[+-])(?:(?P<b>\d+(?:/\d+)?)\*)?sqrt\((?P<d>\d+)\))?$"
)


def parse_scalar(text: str, d: int | None = None) -> Scalar:
    """Parse ``p/q``, ``p``, ``p/q+r/s*sqrt(d)``, ``r/s*sqrt(d)`` or ``-sqrt(d)``.

    Decimal literals such as ``0.25`` are accepted as exact rationals.  When
    ``d`` is given the result is forced into Q(sqrt d).
    """
    s = str(text).replace(" ", "")
    if not s:
        raise ParseError("empty scalar")
    if "sqrt" not in s:
        try:
            value = Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"cannot parse scalar {text!r}") from exc
        return value if d is None else QuadraticReal._raw(value.numerator, 0, value.denominator, d)
    m = _SCALAR_RE.match(s)
    if not m or m.group("d") is None:
        raise ParseError(f"cannot parse scalar {text!r}")
    a = Fraction(m.group("a")) if m.group("a") else Fraction(0)
    sign = m.group("sign")
    if m.group("a") and sign == "":
        raise ParseError(f"cannot parse scalar {text!r}")
    b = Fraction(m.group("b")) if m.group("b") else Fraction(1)
    if sign == "-":
        b = -b
    dd = int(m.group("d"))
    if d is not None and dd != d:
        raise FieldMismatchError(f"sqrt({dd}) in a value for Q(sqrt {d})")
    return QuadraticReal(a, b, dd)


def format_scalar(x) -> str:
    """Canonical text form; inverse of :func:`parse_scalar`."""
    if isinstance(x, QuadraticReal):
        a, b = x.a, x.b
        if b == 0:
            return str(a)
        if abs(b) == 1:
            tail = f"sqrt({x.d})"
        else:
            tail = f"{abs(b)}*sqrt({x.d})"
        sign = "-" if b < 0 else "+"
        if a == 0:
            return ("-" if b < 0 else "") + tail
        return f"{a}{sign}{tail}"
    return str(Fraction(x))
