"""Directed-rounded interval arithmetic on MPFR endpoints.

Every operation rounds the lower endpoint down and the upper endpoint up,
so an ``Interval`` produced from exact rational inputs always encloses the
real value it stands for.  Enclosures therefore never certify a wrong sign;
they can only be too wide.  Each operation takes the working precision in
bits explicitly; results computed at higher precision are nested inside
results computed at lower precision (monotone refinement).
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr, mpq


def round_down(bits: int):
    """Context rounding every result toward -inf at the given precision."""
    return gmpy2.context(precision=bits, round=gmpy2.RoundDown)


def round_up(bits: int):
    """Context rounding every result toward +inf at the given precision."""
    return gmpy2.context(precision=bits, round=gmpy2.RoundUp)


_down = round_down
_up = round_up


@dataclass(frozen=True, slots=True)
class Interval:
    lo: mpfr
    hi: mpfr

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"inverted interval [{self.lo}, {self.hi}]")

    # -- queries ---------------------------------------------------------

    def contains(self, value) -> bool:
        return self.lo <= value <= self.hi

    def encloses(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def strictly_positive(self) -> bool:
        return self.lo > 0

    def strictly_negative(self) -> bool:
        return self.hi < 0

    def is_exact_zero(self) -> bool:
        return self.lo == 0 and self.hi == 0

    def width(self) -> float:
        return float(self.hi - self.lo)

    # -- arithmetic ------------------------------------------------------

    def neg(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def add(self, other: "Interval", bits: int) -> "Interval":
        with _down(bits):
            lo = self.lo + other.lo
        with _up(bits):
            hi = self.hi + other.hi
        return Interval(lo, hi)

    def sub(self, other: "Interval", bits: int) -> "Interval":
        with _down(bits):
            lo = self.lo - other.hi
        with _up(bits):
            hi = self.hi - other.lo
        return Interval(lo, hi)

    def scale(self, factor, bits: int) -> "Interval":
        """Multiply by an exact rational (or integer) scalar."""
        factor = mpq(factor)
        if factor >= 0:
            with _down(bits):
                lo = factor * self.lo
            with _up(bits):
                hi = factor * self.hi
        else:
            with _down(bits):
                lo = factor * self.hi
            with _up(bits):
                hi = factor * self.lo
        return Interval(lo, hi)

    def mul(self, other: "Interval", bits: int) -> "Interval":
        pairs = ((self.lo, other.lo), (self.lo, other.hi),
                 (self.hi, other.lo), (self.hi, other.hi))
        with _down(bits):
            lo = min(a * b for a, b in pairs)
        with _up(bits):
            hi = max(a * b for a, b in pairs)
        return Interval(lo, hi)

    def div(self, other: "Interval", bits: int) -> "Interval":
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("interval denominator contains zero")
        pairs = ((self.lo, other.lo), (self.lo, other.hi),
                 (self.hi, other.lo), (self.hi, other.hi))
        with _down(bits):
            lo = min(a / b for a, b in pairs)
        with _up(bits):
            hi = max(a / b for a, b in pairs)
        return Interval(lo, hi)

    def exp(self, bits: int) -> "Interval":
        with _down(bits):
            lo = gmpy2.exp(self.lo)
        with _up(bits):
            hi = gmpy2.exp(self.hi)
        return Interval(lo, hi)

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"


def from_rational(value, bits: int) -> Interval:
    value = mpq(value)
    with _down(bits):
        lo = mpfr(value)
    with _up(bits):
        hi = mpfr(value)
    return Interval(lo, hi)


def log_rational(value, bits: int) -> Interval:
    """Enclosure of ln(value) for an exact rational value > 0.

    The mpq->mpfr conversion and the log both round in the same direction,
    and log is increasing, so each endpoint is a one-sided bound.
    """
    value = mpq(value)
    if value <= 0:
        raise ValueError("log of a non-positive rational")
    with _down(bits):
        lo = gmpy2.log(mpfr(value))
    with _up(bits):
        hi = gmpy2.log(mpfr(value))
    return Interval(lo, hi)


def exact_zero() -> Interval:
    return Interval(mpfr(0), mpfr(0))


def weighted_sum(terms, bits: int) -> Interval:
    """Enclosure of sum(c_k * t_k) for exact integer/rational coefficients.

    ``terms`` is an iterable of (coefficient, Interval) pairs.  Both endpoint
    accumulations happen inside a single directed-rounding context, which
    keeps this the workhorse for difference-table sweeps.
    """
    terms = list(terms)
    with _down(bits):
        lo = mpfr(0)
        for c, iv in terms:
            lo += c * (iv.lo if c >= 0 else iv.hi)
    with _up(bits):
        hi = mpfr(0)
        for c, iv in terms:
            hi += c * (iv.hi if c >= 0 else iv.lo)
    return Interval(lo, hi)


def sum_intervals(ivs, bits: int) -> Interval:
    ivs = list(ivs)
    with _down(bits):
        lo = mpfr(0)
        for iv in ivs:
            lo += iv.lo
    with _up(bits):
        hi = mpfr(0)
        for iv in ivs:
            hi += iv.hi
    return Interval(lo, hi)


def difference_row(row, bits: int):
    """Pointwise successor differences row[j+1] - row[j], batched per side."""
    if len(row) < 2:
        return []
    with _down(bits):
        los = [row[j + 1].lo - row[j].hi for j in range(len(row) - 1)]
    with _up(bits):
        his = [row[j + 1].hi - row[j].lo for j in range(len(row) - 1)]
    return [Interval(lo, hi) for lo, hi in zip(los, his)]


def endpoint_str(x: mpfr) -> str:
    """Deterministic decimal rendering of an endpoint (round-trippable)."""
    return repr(x) if isinstance(x, str) else mpfr(x).__format__(".20e")
