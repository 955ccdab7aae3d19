"""Exact rational scalars.

All parameter coordinates, weight values and moments in this package are
arbitrary-precision rationals backed by ``gmpy2.mpq`` (always reduced,
positive denominator, structural equality).  Floating point is never used
for anything that feeds an exact test.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

import gmpy2
from gmpy2 import mpq

RationalLike = "mpq | int | str | Fraction | Rational"


def as_mpq(value) -> mpq:
    """Coerce ints, Fractions, mpq and 'num/den' strings to mpq.

    Floats are rejected: callers must supply exact values.
    """
    if isinstance(value, float):
        raise TypeError("floating-point input rejected; pass an exact rational")
    if isinstance(value, (int, str)):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, Rational):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, type(mpq())):
        return value
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def parse_rational(text: str) -> mpq:
    """Parse 'num/den' or an integer literal, exactly."""
    text = text.strip()
    try:
        return mpq(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed rational {text!r}") from exc


def format_rational(q) -> str:
    """Canonical 'num/den' (or bare integer) rendering."""
    return str(as_mpq(q))


def binomial(n: int, k: int) -> int:
    return int(gmpy2.bincoef(n, k))
