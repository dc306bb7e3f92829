"""Exact arithmetic over the quadratic field Q(sqrt5).

Every quantity in this package -- item values, chore costs, agent weights,
fairness factors -- is a number of the form ``a + b*sqrt(5)`` with rational
``a`` and ``b``.  Keeping the sqrt(5) coefficient symbolic makes
golden-ratio instances and all factor comparisons bit-exact; there is no
floating point anywhere in the arithmetic.

The rational layer is ``gmpy2.mpq`` when available (noticeably faster in
the exhaustive-search paths) and falls back to ``fractions.Fraction``.
Set ``WFAIR_RATIONAL_BACKEND=gmpy2|fractions`` to force a backend; the
default ``auto`` prefers gmpy2.  Both backends keep fractions reduced
with positive denominators, so values are always canonical and equality
is structural.

Text form (used verbatim in the CLI JSON schema)::

    INT | INT/INT | [RAT][{+|-}RAT*sqrt5]

with no whitespace, e.g. ``7``, ``-3/4``, ``1/2+1/2*sqrt5``, ``2*sqrt5``.
"""

from __future__ import annotations

import math
import os
import re
from fractions import Fraction
from math import isqrt
from typing import Union

_BACKEND_ENV = os.environ.get("WFAIR_RATIONAL_BACKEND", "auto").lower()
if _BACKEND_ENV not in ("auto", "gmpy2", "fractions"):
    raise RuntimeError(
        f"WFAIR_RATIONAL_BACKEND must be auto, gmpy2 or fractions, got {_BACKEND_ENV!r}"
    )

if _BACKEND_ENV in ("auto", "gmpy2"):
    try:
        from gmpy2 import mpq as _ratio

        RATIONAL_BACKEND = "gmpy2"
    except ImportError:
        if _BACKEND_ENV == "gmpy2":
            raise RuntimeError("WFAIR_RATIONAL_BACKEND=gmpy2 but gmpy2 is not installed")
        _ratio = Fraction
        RATIONAL_BACKEND = "fractions"
else:
    _ratio = Fraction
    RATIONAL_BACKEND = "fractions"

_RATIO_TYPE = type(_ratio(0))
_SQRT5_FLOAT = math.sqrt(5.0)

RationalLike = Union[int, Fraction]


def _to_ratio(x):
    if isinstance(x, _RATIO_TYPE):
        return x
    if isinstance(x, (int, Fraction)):
        return _ratio(x)
    raise TypeError(f"expected int or Fraction, got {type(x).__name__}")


def _ratio_sign(q) -> int:
    if q > 0:
        return 1
    if q < 0:
        return -1
    return 0


def _floor_sqrt5_multiple(b) -> int:
    """floor(b * sqrt5) for a rational b, via integer square roots."""
    if not b:
        return 0
    p = int(b.numerator)
    q = int(b.denominator)
    if p > 0:
        # floor(sqrt(5 p^2) / q) = floor(isqrt(5 p^2) / q)
        return isqrt(5 * p * p) // q
    # b*sqrt5 is irrational for b != 0, so ceil = floor + 1
    return -(isqrt(5 * p * p) // q) - 1


class Value:
    """An immutable element ``rat + surd*sqrt5`` of Q(sqrt5).

    ``rat`` and ``surd`` are arbitrary-precision rationals kept in lowest
    terms with positive denominators, so two Values are equal exactly when
    both coefficient pairs are equal.  Arithmetic (+, -, *, /), exact
    comparisons, hashing and text rendering are supported; all operations
    are pure and instances are safe to share across threads.
    """

    __slots__ = ("_rat", "_surd")

    def __init__(self, rat: "RationalLike | str | Value" = 0, surd: RationalLike = 0):
        if isinstance(rat, str):
            if surd:
                raise TypeError("surd coefficient not allowed with a text literal")
            parsed = parse_value(rat)
            object.__setattr__(self, "_rat", parsed._rat)
            object.__setattr__(self, "_surd", parsed._surd)
            return
        if isinstance(rat, Value):
            if surd:
                raise TypeError("surd coefficient not allowed with a Value argument")
            object.__setattr__(self, "_rat", rat._rat)
            object.__setattr__(self, "_surd", rat._surd)
            return
        object.__setattr__(self, "_rat", _to_ratio(rat))
        object.__setattr__(self, "_surd", _to_ratio(surd))

    def __setattr__(self, name, value):
        raise AttributeError("Value is immutable")

    @classmethod
    def _make(cls, rat, surd) -> "Value":
        v = object.__new__(cls)
        object.__setattr__(v, "_rat", rat)
        object.__setattr__(v, "_surd", surd)
        return v

    # -- accessors ---------------------------------------------------------

    @property
    def rat(self) -> Fraction:
        """Rational coefficient, as a Fraction."""
        return Fraction(int(self._rat.numerator), int(self._rat.denominator))

    @property
    def surd(self) -> Fraction:
        """Coefficient of sqrt5, as a Fraction."""
        return Fraction(int(self._surd.numerator), int(self._surd.denominator))

    @property
    def is_rational(self) -> bool:
        return not self._surd

    @property
    def is_integer(self) -> bool:
        return not self._surd and int(self._rat.denominator) == 1

    # -- arithmetic --------------------------------------------------------

    @staticmethod
    def _coerce(other):
        if isinstance(other, Value):
            return other
        if isinstance(other, (int, Fraction)):
            return Value._make(_ratio(other), _ratio(0))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Value._make(self._rat + o._rat, self._surd + o._surd)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Value._make(self._rat - o._rat, self._surd - o._surd)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Value._make(o._rat - self._rat, o._surd - self._surd)

    def __neg__(self):
        return Value._make(-self._rat, -self._surd)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._rat, self._surd
        c, d = o._rat, o._surd
        # (a + b sqrt5)(c + d sqrt5) = (ac + 5bd) + (ad + bc) sqrt5
        if not b:
            if not d:
                return Value._make(a * c, _ratio(0))
            return Value._make(a * c, a * d)
        if not d:
            return Value._make(a * c, b * c)
        return Value._make(a * c + 5 * b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        c, d = o._rat, o._surd
        if not c and not d:
            raise ZeroDivisionError("division by zero in Q(sqrt5)")
        a, b = self._rat, self._surd
        if not d:
            return Value._make(a / c, b / c)
        # multiply by the conjugate; c^2 - 5 d^2 != 0 for nonzero divisors
        norm = c * c - 5 * d * d
        return Value._make((a * c - 5 * b * d) / norm, (b * c - a * d) / norm)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented
        result = ONE
        base = self
        n = exponent
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- comparisons -------------------------------------------------------

    def sign(self) -> int:
        """Exact sign of the encoded real, without root extraction.

        For mixed-sign coefficients, sign(a + b*sqrt5) = sign(a) * sign(a^2 - 5 b^2).
        """
        a, b = self._rat, self._surd
        if not b:
            return _ratio_sign(a)
        if not a:
            return 1 if b > 0 else -1
        sa = 1 if a > 0 else -1
        sb = 1 if b > 0 else -1
        if sa == sb:
            return sa
        d = a * a - 5 * b * b
        return sa * _ratio_sign(d)

    def compare(self, other) -> int:
        """-1, 0 or 1 as self is less than, equal to or greater than other."""
        o = self._coerce(other)
        if o is None:
            raise TypeError(f"cannot compare Value with {type(other).__name__}")
        if self._surd == o._surd:
            a, b = self._rat, o._rat
            return -1 if a < b else (0 if a == b else 1)
        return (self - o).sign()

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._rat == o._rat and self._surd == o._surd

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __lt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.compare(o) < 0

    def __le__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.compare(o) <= 0

    def __gt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.compare(o) > 0

    def __ge__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.compare(o) >= 0

    def __bool__(self):
        return bool(self._rat) or bool(self._surd)

    def __hash__(self):
        return hash(
            (
                int(self._rat.numerator),
                int(self._rat.denominator),
                int(self._surd.numerator),
                int(self._surd.denominator),
            )
        )

    # -- conversions and rendering ----------------------------------------

    def __float__(self):
        return float(self._rat) + float(self._surd) * _SQRT5_FLOAT

    def __floor__(self) -> int:
        a, b = self._rat, self._surd
        g = int(a.numerator) // int(a.denominator) + _floor_sqrt5_multiple(b)
        # g <= self < g + 2, so one exact comparison settles the floor
        if (self - (g + 1)).sign() >= 0:
            g += 1
        return g

    def render_exact(self) -> str:
        """Canonical text form, e.g. ``1/2+1/2*sqrt5``; parseable by parse_value."""
        a, b = self._rat, self._surd
        if not b:
            return _ratio_str(a)
        if not a:
            return f"{_ratio_str(b)}*sqrt5"
        sign = "+" if b > 0 else "-"
        return f"{_ratio_str(a)}{sign}{_ratio_str(abs(b))}*sqrt5"

    def render_decimal(self, digits: int) -> str:
        """Correctly rounded decimal string with `digits` fraction digits.

        Rounding is round-half-to-even, decided exactly.
        """
        if digits < 1:
            raise ValueError("digits must be >= 1")
        scale = 10**digits
        scaled = self * scale
        n = scaled.__floor__()
        frac2 = (scaled - n) * 2  # in [0, 2)
        c = frac2.compare(ONE)
        if c > 0 or (c == 0 and n % 2 != 0):
            n += 1
        sign = "-" if n < 0 else ""
        n = abs(n)
        return f"{sign}{n // scale}.{n % scale:0{digits}d}"

    def __repr__(self):
        return f"Value({self.render_exact()!r})"

    def __str__(self):
        return self.render_exact()


def _ratio_str(q) -> str:
    num = int(q.numerator)
    den = int(q.denominator)
    return str(num) if den == 1 else f"{num}/{den}"


class _PositiveInfinity:
    """Sentinel greater than every Value; used for unbounded fairness factors."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return other is self

    def __ne__(self, other):
        return other is not self

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return isinstance(other, (Value, int, Fraction))

    def __ge__(self, other):
        return other is self or isinstance(other, (Value, int, Fraction))

    def __hash__(self):
        return hash("wfair-positive-infinity")

    def render_exact(self) -> str:
        return "inf"

    def render_decimal(self, digits: int) -> str:
        return "inf"

    def __float__(self):
        return math.inf

    def __repr__(self):
        return "POS_INF"

    def __reduce__(self):
        return (_PositiveInfinity, ())


POS_INF = _PositiveInfinity()

ExtendedValue = Union[Value, _PositiveInfinity]


def is_finite(x: ExtendedValue) -> bool:
    return isinstance(x, Value)


ZERO = Value(0)
ONE = Value(1)
PHI = Value(Fraction(1, 2), Fraction(1, 2))  # golden ratio (1 + sqrt5)/2
SQRT5 = Value(0, 1)

# value := RAT | RAT SIGNED_RAT*sqrt5 | RAT*sqrt5  (backtracking sorts it out)
_VALUE_RE = re.compile(
    r"(?P<rat>[+-]?\d+(?:/\d+)?)?(?:(?P<surd>[+-]?\d+(?:/\d+)?)\*sqrt5)?"
)


def parse_value(text: str) -> Value:
    """Parse the exact text grammar ``INT | INT/INT | [RAT][{+|-}RAT*sqrt5]``."""
    if not isinstance(text, str):
        raise TypeError("value literal must be a string")
    m = _VALUE_RE.fullmatch(text)
    if m is None:
        raise ValueError(f"invalid value literal: {text!r}")
    rat_text = m.group("rat")
    surd_text = m.group("surd")
    if rat_text is None and surd_text is None:
        raise ValueError(f"invalid value literal: {text!r}")
    if rat_text is not None and surd_text is not None and surd_text[0] not in "+-":
        raise ValueError(f"invalid value literal: {text!r} (sqrt5 term needs a sign)")
    try:
        rat = Fraction(rat_text) if rat_text is not None else Fraction(0)
        surd = Fraction(surd_text) if surd_text is not None else Fraction(0)
    except ZeroDivisionError:
        raise ValueError(f"invalid value literal: {text!r} (zero denominator)") from None
    return Value(rat, surd)


def parse_ratio_or_decimal(text: str) -> Value:
    """Parse a Value literal, also accepting plain decimal strings like ``0.44``.

    Decimals convert exactly (0.44 -> 11/25).  Used for CLI knobs; instance
    files stick to the strict grammar.
    """
    try:
        return parse_value(text)
    except ValueError:
        pass
    try:
        return Value(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"invalid number: {text!r}") from None
