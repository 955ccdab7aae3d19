"""Geometrically regular weight sequences in exact factored form.

A weight-squared sequence is stored as a ratio of shifted-power products

    alpha_n**2 = prod(p**n + c for c in num) / prod(p**n + d for d in den)

with exact rational shifts.  The plain one-parameter-pair sequence has
``num = {N}`` and ``den = {D}``; Schur products and quotients just merge the
multisets and cancel, so the family is closed under every combination this
package performs.  Square roots are never materialised: every downstream
test consumes ``alpha**2`` or ``ln alpha = ln(alpha**2) / 2``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from gmpy2 import mpq

from . import intervals
from .intervals import Interval
from .rationals import as_mpq

MOMENT_INDEX_CAP = 512


class BaseMismatchError(ValueError):
    """Raised when Schur-combining weights over different shift bases."""


@dataclass(frozen=True, slots=True)
class ShiftBase:
    """The geometric base p > 1 shared by a family of weights."""

    p: mpq

    def __post_init__(self):
        object.__setattr__(self, "p", as_mpq(self.p))
        if not self.p > 1:
            raise ValueError(f"shift base must satisfy p > 1, got {self.p}")


def as_base(p) -> ShiftBase:
    return p if isinstance(p, ShiftBase) else ShiftBase(p)


@dataclass(frozen=True, slots=True)
class ParamPoint:
    """A pair (N, D) in the open unit square."""

    N: mpq
    D: mpq

    def __post_init__(self):
        object.__setattr__(self, "N", as_mpq(self.N))
        object.__setattr__(self, "D", as_mpq(self.D))
        if not (-1 < self.N < 1 and -1 < self.D < 1):
            raise ValueError(f"({self.N}, {self.D}) is outside the open unit square")

    @classmethod
    def parse(cls, text: str) -> "ParamPoint":
        parts = text.split(",")
        if len(parts) != 2:
            raise ValueError(f"expected 'N,D', got {text!r}")
        return cls(as_mpq(parts[0].strip()), as_mpq(parts[1].strip()))

    def __str__(self):
        return f"({self.N},{self.D})"


def reflect(point: ParamPoint) -> ParamPoint:
    """Swap coordinates; the reflected weight is the pointwise reciprocal."""
    return ParamPoint(point.D, point.N)


def _cancel(num, den):
    num = sorted(num)
    den = sorted(den)
    remaining = list(den)
    kept_num = []
    for c in num:
        try:
            remaining.remove(c)
        except ValueError:
            kept_num.append(c)
    return tuple(kept_num), tuple(remaining)


@dataclass(frozen=True, slots=True)
class FactoredWeight:
    base: ShiftBase
    num: tuple
    den: tuple

    def __post_init__(self):
        object.__setattr__(self, "base", as_base(self.base))
        num = tuple(as_mpq(c) for c in self.num)
        den = tuple(as_mpq(d) for d in self.den)
        for shift in (*num, *den):
            if not shift > -1:
                raise ValueError(f"shift {shift} <= -1 would make a factor vanish")
        num, den = _cancel(num, den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def is_constant_one(self) -> bool:
        return not self.num and not self.den

    def weight_squared(self, n: int) -> mpq:
        """Exact alpha_n**2; strictly positive for all n >= 0."""
        if n < 0:
            raise ValueError("weight index must be >= 0")
        pn = self.base.p ** n
        value = mpq(1)
        for c in self.num:
            value *= pn + c
        for d in self.den:
            value /= pn + d
        return value

    def log_weight_squared(self, n: int, bits: int) -> Interval:
        """Enclosure of ln(alpha_n**2)."""
        if self.is_constant_one:
            return intervals.exact_zero()
        pn = self.base.p ** n
        terms = [(1, intervals.log_rational(pn + c, bits)) for c in self.num]
        terms += [(-1, intervals.log_rational(pn + d, bits)) for d in self.den]
        return intervals.weighted_sum(terms, bits)

    def log_weight_squared_table(self, count: int, bits: int) -> list:
        """Enclosures of ln(alpha_n**2) for n = 0..count-1, batched per side.

        ln(alpha_n**2) = sum ln(p**n + c) - sum ln(p**n + d); the lower bound
        rounds numerator logs down and denominator logs up, and conversely.
        """
        import gmpy2

        if self.is_constant_one:
            return [intervals.exact_zero() for _ in range(count)]
        powers = []
        pn = mpq(1)
        for _ in range(count):
            powers.append(pn)
            pn *= self.base.p

        def log_sums(shifts, rounding):
            with rounding:
                return [sum((gmpy2.log(gmpy2.mpfr(pj + s)) for s in shifts),
                            gmpy2.mpfr(0))
                        for pj in powers]

        num_lo = log_sums(self.num, intervals.round_down(bits))
        num_hi = log_sums(self.num, intervals.round_up(bits))
        den_lo = log_sums(self.den, intervals.round_down(bits))
        den_hi = log_sums(self.den, intervals.round_up(bits))
        with intervals.round_down(bits):
            lo_vals = [a - b for a, b in zip(num_lo, den_hi)]
        with intervals.round_up(bits):
            hi_vals = [a - b for a, b in zip(num_hi, den_lo)]
        return [intervals.Interval(lo, hi) for lo, hi in zip(lo_vals, hi_vals)]

    def schur_mul(self, other: "FactoredWeight") -> "FactoredWeight":
        if self.base != other.base:
            raise BaseMismatchError(
                f"cannot combine weights over bases {self.base.p} and {other.base.p}")
        return FactoredWeight(self.base, self.num + other.num, self.den + other.den)

    def schur_div(self, other: "FactoredWeight") -> "FactoredWeight":
        if self.base != other.base:
            raise BaseMismatchError(
                f"cannot combine weights over bases {self.base.p} and {other.base.p}")
        return FactoredWeight(self.base, self.num + other.den, self.den + other.num)

    def __str__(self):
        num = ",".join(str(c) for c in self.num) or "-"
        den = ",".join(str(d) for d in self.den) or "-"
        return f"weight[p={self.base.p}; num={{{num}}}; den={{{den}}}]"


def grws_weight(point: ParamPoint, base) -> FactoredWeight:
    """The squared weight sequence (p**n + N)/(p**n + D)."""
    return FactoredWeight(as_base(base), (point.N,), (point.D,))


def quotient_weight(base_point: ParamPoint, other: ParamPoint, p) -> FactoredWeight:
    """Schur quotient of the two parameter-pair weights over base p."""
    p = as_base(p)
    return grws_weight(base_point, p).schur_div(grws_weight(other, p))


def weight_squared(weight: FactoredWeight, n: int) -> mpq:
    return weight.weight_squared(n)


def schur_product(w1: FactoredWeight, w2: FactoredWeight) -> FactoredWeight:
    return w1.schur_mul(w2)


def schur_quotient(w1: FactoredWeight, w2: FactoredWeight) -> FactoredWeight:
    return w1.schur_div(w2)


class MomentCache:
    """Lazily extended exact moments gamma_n = prod_{j<n} alpha_j**2.

    Already-cached entries may be read concurrently; extension is serialized
    by an internal lock.  Numerator/denominator sizes grow with n, so the
    index is capped (default 512).
    """

    def __init__(self, weight: FactoredWeight, max_index: int = MOMENT_INDEX_CAP):
        self.weight = weight
        self.max_index = max_index
        self._prefix = [mpq(1)]
        self._lock = threading.Lock()

    def moment(self, n: int) -> mpq:
        if n < 0:
            raise ValueError("moment index must be >= 0")
        if n > self.max_index:
            raise ValueError(f"moment index {n} exceeds cap {self.max_index}")
        if n < len(self._prefix):
            return self._prefix[n]
        with self._lock:
            while len(self._prefix) <= n:
                k = len(self._prefix) - 1
                self._prefix.append(self._prefix[k] * self.weight.weight_squared(k))
        return self._prefix[n]

    def __len__(self):
        return len(self._prefix)


def moment(cache: MomentCache, n: int) -> mpq:
    return cache.moment(n)


def powered_moments(weight: FactoredWeight, s, n: int, precision: int = 128) -> Interval:
    """Enclosure of gamma_n for the s-th Schur power of the weight.

    Computed as exp(s * sum_{j<n} ln(alpha_j**2)) with directed rounding;
    the enclosure tightens as ``precision`` grows.
    """
    s = as_mpq(s)
    if s <= 0:
        raise ValueError("Schur power exponent must be positive")
    if precision < 32:
        raise ValueError("precision must be at least 32 bits")
    if n < 0:
        raise ValueError("moment index must be >= 0")
    logs = [weight.log_weight_squared(j, precision) for j in range(n)]
    total = intervals.sum_intervals(logs, precision)
    return total.scale(s, precision).exp(precision)
