"""Sector taxonomy of the parameter square.

The open square splits into eight closed convex cones at the origin,
numbered clockwise so that Sector I holds the best-behaved shifts.  Points
on shared boundary rays belong to every adjacent sector; (0, 0) belongs to
all eight.
"""

from __future__ import annotations

import enum

from .rationals import as_mpq
from .weights import ParamPoint, ShiftBase, as_base


class Sector(enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    V = "V"
    VI = "VI"
    VII = "VII"
    VIII = "VIII"

    def __str__(self):
        return self.value


class PropertyClass(enum.Enum):
    """Best property known for the shift at a parameter point."""

    UNWEIGHTED = "unweighted"
    MID_BERNSTEIN = "mid-bernstein"
    MID = "mid"
    SUBNORMAL_FINITELY_ATOMIC = "subnormal-finitely-atomic"
    SUBNORMAL = "subnormal"
    COMPLETELY_HYPEREXPANSIVE_CANDIDATE = "che-candidate"
    NOT_SUBNORMAL = "not-subnormal"

    def __str__(self):
        return self.value


#: Classes whose shifts are subnormal (used to gate reflection-based zone
#: enlargements; the constant weight is trivially subnormal).
SUBNORMAL_OR_BETTER = frozenset({
    PropertyClass.UNWEIGHTED,
    PropertyClass.MID_BERNSTEIN,
    PropertyClass.MID,
    PropertyClass.SUBNORMAL_FINITELY_ATOMIC,
    PropertyClass.SUBNORMAL,
})

#: Classes whose shifts are moment infinitely divisible.
MID_OR_BETTER = frozenset({
    PropertyClass.UNWEIGHTED,
    PropertyClass.MID_BERNSTEIN,
    PropertyClass.MID,
})


def classify(point: ParamPoint) -> frozenset:
    """Closed-sector membership of a point in the open square."""
    n, d = point.N, point.D
    members = set()
    if n <= d <= 0:
        members.add(Sector.I)
    if n <= 0 <= d <= -n:
        members.add(Sector.II)
    if n <= 0 and d >= -n:
        members.add(Sector.III)
    if 0 <= n <= d:
        members.add(Sector.IV)
    if 0 <= d <= n:
        members.add(Sector.V)
    if n >= 0 and -n <= d <= 0:
        members.add(Sector.VI)
    if n >= 0 and d <= -n:
        members.add(Sector.VII)
    if d <= n <= 0:
        members.add(Sector.VIII)
    return frozenset(members)


SPECIAL_LINE_MAX_INDEX = 64


def special_line_index(point: ParamPoint, base) -> int | None:
    """Index k >= 0 with D = p**k * N and N > 0, if any (exact test).

    k = 0 is the main diagonal restricted to N > 0.  The search stops at
    k = 64, far beyond any line that still meets the square for p > 1.
    """
    p = as_base(base).p
    n, d = point.N, point.D
    if n <= 0 or d < n:
        return None
    value = n
    for k in range(SPECIAL_LINE_MAX_INDEX + 1):
        if value == d:
            return k
        if value > d:
            return None
        value *= p
    return None


# Preference order when a boundary point carries several classifications.
_STRENGTH = (
    PropertyClass.MID_BERNSTEIN,
    PropertyClass.MID,
    PropertyClass.SUBNORMAL_FINITELY_ATOMIC,
    PropertyClass.SUBNORMAL,
    PropertyClass.COMPLETELY_HYPEREXPANSIVE_CANDIDATE,
    PropertyClass.NOT_SUBNORMAL,
)


def shift_class(point: ParamPoint, base) -> PropertyClass:
    """Property class of the shift at ``point`` for the given base.

    Sector VIII reports a completely-hyperexpansive *candidate*: the exact
    extent of the hyperexpansive subsector is not settled here, so callers
    wanting a definitive answer should run the reversed finite-order test.
    """
    if point.N == point.D:
        return PropertyClass.UNWEIGHTED
    candidates = set()
    sectors = classify(point)
    if Sector.I in sectors:
        candidates.add(PropertyClass.MID_BERNSTEIN)
    if Sector.II in sectors:
        candidates.add(PropertyClass.MID)
    if Sector.III in sectors:
        candidates.add(PropertyClass.SUBNORMAL)
    if Sector.IV in sectors:
        if special_line_index(point, base) is not None:
            candidates.add(PropertyClass.SUBNORMAL_FINITELY_ATOMIC)
        else:
            candidates.add(PropertyClass.NOT_SUBNORMAL)
    if sectors & {Sector.V, Sector.VI, Sector.VII}:
        candidates.add(PropertyClass.NOT_SUBNORMAL)
    if Sector.VIII in sectors:
        candidates.add(PropertyClass.COMPLETELY_HYPEREXPANSIVE_CANDIDATE)
    for cls in _STRENGTH:
        if cls in candidates:
            return cls
    raise AssertionError(f"unclassified point {point}")
