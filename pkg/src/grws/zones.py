"""Safe-quotient zone construction and exact membership queries.

For a base pair (N, D) the MID zone collects parameter pairs whose Schur
quotient against the base is certified moment infinitely divisible by the
transitivity/shadow constructions; the subnormal zone additionally closes
over raindrop points and reflection arguments.  Both are deliberate
under-approximations assembled from closed convex polygons, segments and
line families, all with exact rational coordinates.  Emitted regions are
closed and clipped to the square: limits of safe points are safe, so
closing half-open constructions is sound.

The MID construction never consults the geometric base p, so MID zones are
identical across bases by construction; only subnormal zones (raindrops,
reflected lines) depend on p.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass

from gmpy2 import mpq

from . import certify, geometry
from .geometry import Polygon, Segment, loop_to_region, region_from_halfplanes
from .rationals import as_mpq, format_rational
from .sectors import SUBNORMAL_OR_BETTER, Sector, classify, shift_class
from .weights import (FactoredWeight, MomentCache, ParamPoint, ShiftBase,
                      as_base, grws_weight)


class ZoneKind(enum.Enum):
    MID = "mid"
    SUBNORMAL = "subnormal"

    def __str__(self):
        return self.value


REFLECTED_LINE_MAX_INDEX = 64


@dataclass(frozen=True, slots=True)
class LineFamily:
    """Rays D = p**k N (kind 'special') or M = p**k P (kind 'reflected'),
    restricted to the positive-coordinate side, for k in an index range."""

    kind: str
    p: mpq
    k_min: int = 0
    k_max: int = REFLECTED_LINE_MAX_INDEX

    def __post_init__(self):
        if self.kind not in ("special", "reflected"):
            raise ValueError(f"unknown line family kind {self.kind!r}")
        object.__setattr__(self, "p", as_mpq(self.p))
        if not (0 <= self.k_min <= self.k_max):
            raise ValueError("need 0 <= k_min <= k_max")

    def contains(self, pt) -> bool:
        x, y = as_mpq(pt[0]), as_mpq(pt[1])
        if self.kind == "special":
            small, large = x, y  # D = p**k * N with N > 0
        else:
            small, large = y, x  # M = p**k * P with P > 0
        if small <= 0 or large < small:
            return False
        value = small
        for k in range(self.k_max + 1):
            if value == large:
                return k >= self.k_min
            if value > large:
                return False
            value *= self.p
        return False


def _primitive_key(prim):
    if isinstance(prim, Polygon):
        return ("polygon", prim.vertices)
    if isinstance(prim, Segment):
        return ("segment", prim.a, prim.b)
    return ("line-family", prim.kind, prim.p, prim.k_min, prim.k_max)


def _dedup(prims):
    seen = {}
    for prim in prims:
        if prim is None:
            continue
        seen.setdefault(_primitive_key(prim), prim)
    return tuple(seen.values())


@dataclass(frozen=True, slots=True)
class RegionSet:
    kind: ZoneKind
    base: ParamPoint
    p: ShiftBase
    primitives: tuple

    def contains(self, point) -> bool:
        if isinstance(point, ParamPoint):
            pt = (point.N, point.D)
        else:
            pt = (as_mpq(point[0]), as_mpq(point[1]))
        return any(prim.contains(pt) for prim in self.primitives)

    def with_added(self, prims) -> "RegionSet":
        return RegionSet(self.kind, self.base, self.p,
                         _dedup(list(self.primitives) + list(prims)))

    def to_json_obj(self):
        regions = []
        for prim in self.primitives:
            if isinstance(prim, Polygon):
                regions.append({"type": "polygon",
                                "vertices": [[str(x), str(y)] for x, y in prim.vertices]})
            elif isinstance(prim, Segment):
                regions.append({"type": "segment",
                                "endpoints": [[str(prim.a[0]), str(prim.a[1])],
                                              [str(prim.b[0]), str(prim.b[1])]]})
            else:
                regions.append({"type": "line-family", "kind": prim.kind,
                                "p": str(prim.p), "k_min": prim.k_min,
                                "k_max": prim.k_max})
        obj = {"zone": self.kind.value,
               "base": [str(self.base.N), str(self.base.D)],
               "regions": regions}
        # MID zones are p-independent by construction; serializing p there
        # would break byte-for-byte comparability across bases.
        if self.kind is ZoneKind.SUBNORMAL:
            obj["p"] = str(self.p.p)
        return obj

    def to_json(self, indent=None) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=indent,
                          separators=(",", ":") if indent is None else None)


def contains(region_set: RegionSet, point) -> bool:
    return region_set.contains(point)


# ---------------------------------------------------------------------------
# Shadow operators (MID zones only)
# ---------------------------------------------------------------------------

def _shadow(region_set: RegionSet, pieces) -> RegionSet:
    if region_set.kind is not ZoneKind.MID:
        raise ValueError("shadow operators apply to MID zones only")
    added = []
    for prim in region_set.primitives:
        if isinstance(prim, LineFamily):
            raise TypeError("cannot shadow a line family")
        for halfplanes, matrix in pieces:
            clipped = geometry.clip_region(prim, halfplanes)
            if clipped is None:
                continue
            image = clipped.map_linear(matrix)
            if image is not None:
                added.append(image)
    return region_set.with_added(added)


def shadow_right(region_set: RegionSet) -> RegionSet:
    """(M, P) with M <= 0 maps to (-M, P)."""
    return _shadow(region_set,
                   [(((-1, 0, 0),), ((mpq(-1), mpq(0)), (mpq(0), mpq(1))))])


def shadow_central(region_set: RegionSet) -> RegionSet:
    """(M, P) with |M| >= |P| maps to (-P, -M); the constraint splits into
    the two convex cones M >= |P| and M <= -|P|."""
    matrix = ((mpq(0), mpq(-1)), (mpq(-1), mpq(0)))
    return _shadow(region_set, [(((1, -1, 0), (1, 1, 0)), matrix),
                                (((-1, 1, 0), (-1, -1, 0)), matrix)])


def shadow_nwse(region_set: RegionSet) -> RegionSet:
    """(M, P) in the second quadrant maps to (-M, -P)."""
    matrix = ((mpq(-1), mpq(0)), (mpq(0), mpq(-1)))
    return _shadow(region_set, [(((-1, 0, 0), (0, 1, 0)), matrix)])


def shadow_swne(region_set: RegionSet) -> RegionSet:
    """(M, P) in the third quadrant with P >= M maps to (-M, -P)."""
    matrix = ((mpq(-1), mpq(0)), (mpq(0), mpq(-1)))
    return _shadow(region_set, [(((-1, 0, 0), (0, -1, 0), (-1, 1, 0)), matrix)])


# ---------------------------------------------------------------------------
# Zone construction
# ---------------------------------------------------------------------------

def _viii_core_prims(n, d):
    """Closed form of the transitive diagonal/box union below a base with
    d <= n <= 0: the region P <= D - max(0, |M| + N), in <= 3 convex pieces."""
    if not (d <= n <= 0):
        raise ValueError(f"({n}, {d}) is not in closed Sector VIII")
    middle = region_from_halfplanes([(1, 0, -n), (-1, 0, -n), (0, -1, d)])
    left = region_from_halfplanes([(-1, 0, n), (1, -1, d - n)])
    right = region_from_halfplanes([(1, 0, n), (-1, -1, d - n)])
    return [prim for prim in (middle, left, right) if prim is not None]


def viii_core(base_n, base_d) -> RegionSet:
    n, d = as_mpq(base_n), as_mpq(base_d)
    base = ParamPoint(n, d)
    return RegionSet(ZoneKind.MID, base, ShiftBase(2), _dedup(_viii_core_prims(n, d)))


_DIAGONAL = Segment((-1, -1), (1, 1))

# Closed Sectors VII and VIII: everything below both diagonals.
_SECTOR_VII_VIII = (
    region_from_halfplanes([(-1, 0, 0), (1, -1, 0)]),   # M <= 0, P <= M
    region_from_halfplanes([(1, 0, 0), (-1, -1, 0)]),   # M >= 0, P <= -M
)

# Closed Sectors VI, VII and VIII (subnormal reflection closure).
_SECTOR_VI_VII_VIII = (
    region_from_halfplanes([(1, 0, 0), (0, -1, 0)]),    # fourth quadrant
    region_from_halfplanes([(-1, 0, 0), (1, -1, 0)]),   # M <= 0, P <= M
)


def _mq_sector_i(base: ParamPoint, p: ShiftBase) -> RegionSet:
    n, d = base.N, base.D
    green = region_from_halfplanes(
        [(1, 0, -n), (-1, 0, 0), (-1, 1, 0), (1, -1, d - n)])
    zone = RegionSet(ZoneKind.MID, base, p, _dedup([green]))
    zone = shadow_central(zone)
    zone = shadow_right(zone)
    zone = shadow_nwse(zone)
    zone = shadow_swne(zone)
    return zone.with_added([_DIAGONAL, *_SECTOR_VII_VIII])


def _mq_sector_ii(base: ParamPoint, p: ShiftBase) -> RegionSet:
    n, d = base.N, base.D
    mirrored = mq_zone(ParamPoint(n, -d), p)
    left = region_from_halfplanes(
        [(1, 0, -n), (-1, 0, 0), (1, 1, -(d + n)), (1, -1, d - n),
         (0, 1, 0), (0, -1, -n)])
    zone = RegionSet(ZoneKind.MID, base, p,
                     _dedup(list(mirrored.primitives) + [left]))
    zone = shadow_right(zone)
    zone = shadow_central(zone)
    zone = shadow_nwse(zone)
    return zone.with_added([_DIAGONAL, *_SECTOR_VII_VIII])


def mq_zone(base: ParamPoint, p) -> RegionSet:
    """Constructed safe zone for MID quotients of the given base."""
    p = as_base(p)
    n, d = base.N, base.D
    sectors = classify(base)
    if Sector.I in sectors:
        return _mq_sector_i(base, p)
    if Sector.II in sectors:
        return _mq_sector_ii(base, p)
    base_prim = Segment((n, d), (n, d))
    if Sector.VIII in sectors:
        prims = _viii_core_prims(n, d)
    elif Sector.III in sectors:
        prims = [Segment((n, d), (-n, d))] + _viii_core_prims(n, -d)
    elif Sector.IV in sectors:
        prims = [base_prim] + _viii_core_prims(-n, -d)
    elif Sector.V in sectors:
        prims = [base_prim] + _viii_core_prims(-d, -n)
    else:  # Sectors VI / VII
        prims = [base_prim] + _viii_core_prims(mpq(0), d - n)
    return RegionSet(ZoneKind.MID, base, p, _dedup(prims))


def _raindrop_cap(base: ParamPoint, p: ShiftBase) -> int:
    """Smallest k with p**k >= 4/eps, eps the distance to the square edge."""
    eps = min(1 - abs(base.N), 1 - abs(base.D))
    target = 4 / eps
    value = mpq(1)
    for k in range(65):
        if value >= target:
            return k
        value *= p.p
    return 64


def _horizontal_fixpoint(prims, p: ShiftBase):
    """Raindrop-shift closure for horizontal segments in the first quadrant:
    a segment [a, b] x {y} whose p-shifted copies overlap (p*a <= b) extends
    without a break to the right edge; otherwise a notch opens and nothing
    is added."""
    added = []
    for prim in prims:
        if not isinstance(prim, Segment) or prim.a[1] != prim.b[1]:
            continue
        y = prim.a[1]
        if y < 0:
            continue
        a = max(prim.a[0], mpq(0))
        b = prim.b[0]
        if b < a or b <= 0:
            continue
        if p.p * a <= b:
            added.append(Segment((a, y), (1, y)))
    return list(prims) + added


def _sq_prims(base: ParamPoint, p: ShiftBase, depth: int, memo: dict):
    key = (base.N, base.D, depth)
    if key in memo:
        return memo[key]
    memo[key] = ()  # cycle guard; raindrop recursion also decreases depth
    n, d = base.N, base.D
    prims = list(mq_zone(base, p).primitives)

    raindrops = []
    if d > 0:
        value = d
        for _ in range(_raindrop_cap(base, p)):
            value = value / p.p
            raindrops.append(ParamPoint(n, value))
        prims.append(Segment((n, -1), (n, 0)))
    if n > 0:
        value = n * p.p
        for _ in range(REFLECTED_LINE_MAX_INDEX):
            if value >= 1:
                break
            raindrops.append(ParamPoint(value, d))
            value *= p.p
    if n < 0:
        prims.append(Segment((n, d), (1, d)))

    if shift_class(base, p) in SUBNORMAL_OR_BETTER:
        prims.extend(_SECTOR_VI_VII_VIII)
        prims.append(LineFamily("reflected", p.p))

    sectors = classify(base)
    if Sector.II in sectors:
        prims.append(region_from_halfplanes([(1, 0, 0), (0, 1, 0), (0, -1, -n)]))
        prims.append(Segment((n, -d), (n, 0)))
        prims.append(region_from_halfplanes(
            [(1, 0, -n), (-1, 0, 0), (1, -1, -n), (-1, 1, n + d)]))
    if Sector.III in sectors:
        prims.append(Segment((n, d), (1, d)))

    if depth > 1:
        for drop in raindrops:
            prims.extend(_sq_prims(drop, p, depth - 1, memo))

    prims = _dedup(_horizontal_fixpoint(prims, p))
    memo[key] = prims
    return prims


def sq_zone(base: ParamPoint, p, depth: int = 4) -> RegionSet:
    """Constructed safe zone for subnormal quotients of the given base.

    Seeds with the MID zone, then closes over raindrops, boundary segments,
    reflection arguments and the horizontal shift fixpoint, importing each
    raindrop's own zone down to the depth limit.  Depth exhaustion yields a
    valid under-approximation.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    p = as_base(p)
    return RegionSet(ZoneKind.SUBNORMAL, base, p, _sq_prims(base, p, depth, {}))


def zone(base: ParamPoint, p, kind: ZoneKind, depth: int = 4) -> RegionSet:
    if kind is ZoneKind.MID:
        return mq_zone(base, p)
    return sq_zone(base, p, depth)


def excluded_by_order(base: ParamPoint, candidate: ParamPoint, p,
                      kind: ZoneKind = ZoneKind.MID, depth: int = 4) -> bool:
    """Antisymmetry exclusion: the candidate's own constructed zone contains
    the base, so the base cannot dominate the candidate (unless equal)."""
    if candidate == base:
        raise ValueError("candidate must differ from the base point")
    return zone(candidate, p, kind, depth).contains(base)


# ---------------------------------------------------------------------------
# Sampling and cross-validation
# ---------------------------------------------------------------------------

def _sample_primitive(prim, rng: random.Random):
    if isinstance(prim, Polygon):
        verts = prim.vertices
        i = rng.randrange(1, len(verts) - 1)
        w = [mpq(rng.randint(1, 64)) for _ in range(3)]
        total = sum(w)
        corners = (verts[0], verts[i], verts[i + 1])
        x = sum(wi * c[0] for wi, c in zip(w, corners)) / total
        y = sum(wi * c[1] for wi, c in zip(w, corners)) / total
        return (x, y)
    if isinstance(prim, Segment):
        if prim.is_point:
            return prim.a
        t = mpq(rng.randint(1, 999), 1000)
        return (prim.a[0] + t * (prim.b[0] - prim.a[0]),
                prim.a[1] + t * (prim.b[1] - prim.a[1]))
    k = rng.randint(prim.k_min, min(prim.k_max, 8))
    r = mpq(rng.randint(1, 999), 1000)
    small = r / prim.p ** k
    if prim.kind == "reflected":
        return (r, small)
    return (small, r)


def sample_zone_points(region_set: RegionSet, count: int,
                       rng: random.Random) -> list:
    """Random rational points of the zone, strictly inside the open square."""
    prims = region_set.primitives
    points = []
    while len(points) < count:
        prim = prims[rng.randrange(len(prims))]
        x, y = _sample_primitive(prim, rng)
        if -1 < x < 1 and -1 < y < 1:
            points.append(ParamPoint(x, y))
    return points


@dataclass(frozen=True, slots=True)
class ValidationReport:
    base: ParamPoint
    p: ShiftBase
    kind: ZoneKind
    samples: int
    passes: int
    indeterminate: int
    failures: tuple

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> str:
        record = {
            "base": [str(self.base.N), str(self.base.D)],
            "p": str(self.p.p),
            "kind": self.kind.value,
            "samples": self.samples,
            "passes": self.passes,
            "indeterminate": self.indeterminate,
            "failures": [{"point": [str(pt.N), str(pt.D)], "verdict": json.loads(v.to_json())}
                         for pt, v in self.failures],
        }
        return json.dumps(record, sort_keys=True, separators=(",", ":"))


def cross_validate(base: ParamPoint, p, kind: ZoneKind, samples: int = 200, *,
                   depth: int = 4,
                   n_max: int = certify.DEFAULT_N_MAX,
                   j_max: int = certify.DEFAULT_J_MAX,
                   hankel_k: int = certify.DEFAULT_HANKEL_K,
                   window_max: int = certify.DEFAULT_WINDOW,
                   policy: certify.PrecisionPolicy = certify.DEFAULT_POLICY,
                   seed: int = 0) -> ValidationReport:
    """Sample the constructed zone and certify every sampled quotient.

    Any certified Fail is a soundness bug in the construction and lands in
    the report's failure list; Indeterminate outcomes are merely counted.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    p = as_base(p)
    region_set = zone(base, p, kind, depth)
    rng = random.Random(seed)
    base_weight = grws_weight(base, p)
    passes = indeterminate = 0
    failures = []
    for point in sample_zone_points(region_set, samples, rng):
        quotient = base_weight.schur_div(grws_weight(point, p))
        verdicts = []
        if kind is ZoneKind.MID:
            verdicts.append(certify.check_mid_numeric(quotient, n_max, j_max, policy))
        else:
            cache = MomentCache(quotient)
            verdicts.append(certify.check_k_hyponormal(cache, hankel_k, window_max))
            verdicts.append(certify.check_n_contractive(cache, n_max, j_max))
        failed = [v for v in verdicts if v.is_fail]
        if failed:
            failures.append((point, failed[0]))
        elif any(v.kind is certify.VerdictKind.INDETERMINATE for v in verdicts):
            indeterminate += 1
        else:
            passes += 1
    return ValidationReport(base, p, kind, samples, passes, indeterminate,
                            tuple(failures))
