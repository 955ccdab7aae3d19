"""Exact rational plane geometry for region construction.

Points are (mpq, mpq) pairs.  Regions are closed convex polygons (CCW
vertex loops) and closed segments; a segment with equal endpoints stands
for a single point.  All predicates are exact; there is no floating-point
tolerance anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .rationals import as_mpq


def as_point(pt):
    x, y = pt
    return (as_mpq(x), as_mpq(y))


def cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _bbox(points):
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return min(xs), max(xs), min(ys), max(ys)


@dataclass(frozen=True, slots=True)
class Segment:
    a: tuple
    b: tuple

    def __post_init__(self):
        a, b = as_point(self.a), as_point(self.b)
        if b < a:
            a, b = b, a
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def is_point(self):
        return self.a == self.b

    def contains(self, pt) -> bool:
        pt = as_point(pt)
        if cross(self.a, self.b, pt) != 0:
            return False
        xmin, xmax, ymin, ymax = _bbox((self.a, self.b))
        return xmin <= pt[0] <= xmax and ymin <= pt[1] <= ymax

    def map_linear(self, m) -> "Segment":
        return Segment(_apply(m, self.a), _apply(m, self.b))


@dataclass(frozen=True, slots=True)
class Polygon:
    vertices: tuple  # CCW, canonical rotation, no collinear triples

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(as_point(v) for v in self.vertices))
        if len(self.vertices) < 3:
            raise ValueError("polygon needs at least 3 vertices")

    def bbox(self):
        return _bbox(self.vertices)

    def contains(self, pt) -> bool:
        pt = as_point(pt)
        xmin, xmax, ymin, ymax = self.bbox()
        if not (xmin <= pt[0] <= xmax and ymin <= pt[1] <= ymax):
            return False
        verts = self.vertices
        n = len(verts)
        for i in range(n):
            if cross(verts[i], verts[(i + 1) % n], pt) < 0:
                return False
        return True

    def map_linear(self, m) -> "Polygon | Segment | None":
        return loop_to_region([_apply(m, v) for v in self.vertices])


def _apply(m, pt):
    (a, b), (c, d) = m
    return (a * pt[0] + b * pt[1], c * pt[0] + d * pt[1])


def signed_area2(points) -> mpq:
    total = mpq(0)
    n = len(points)
    for i in range(n):
        x0, y0 = points[i]
        x1, y1 = points[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return total


def loop_to_region(points):
    """Canonicalize a vertex loop into a Polygon, a Segment, or None.

    Deduplicates, fixes orientation to CCW, strips collinear vertices and
    rotates so the lexicographically smallest vertex comes first (stable
    serialization and structural dedup depend on this).
    """
    pts = [as_point(p) for p in points]
    dedup = []
    for p in pts:
        if not dedup or dedup[-1] != p:
            dedup.append(p)
    if len(dedup) > 1 and dedup[0] == dedup[-1]:
        dedup.pop()
    if not dedup:
        return None
    if len(dedup) == 1:
        return Segment(dedup[0], dedup[0])
    area2 = signed_area2(dedup)
    if area2 == 0:
        lo = min(dedup)
        hi = max(dedup)
        return Segment(lo, hi)
    if area2 < 0:
        dedup.reverse()
    cleaned = []
    n = len(dedup)
    for i in range(n):
        prev, cur, nxt = dedup[i - 1], dedup[i], dedup[(i + 1) % n]
        if cross(prev, cur, nxt) != 0:
            cleaned.append(cur)
    if len(cleaned) < 3:
        lo = min(dedup)
        hi = max(dedup)
        return Segment(lo, hi)
    start = cleaned.index(min(cleaned))
    cleaned = cleaned[start:] + cleaned[:start]
    return Polygon(tuple(cleaned))


def clip_loop(points, halfplane):
    """Sutherland-Hodgman clip of a loop against a*x + b*y + c >= 0."""
    a, b, c = halfplane
    out = []
    n = len(points)
    for i in range(n):
        cur = points[i]
        nxt = points[(i + 1) % n]
        cv = a * cur[0] + b * cur[1] + c
        nv = a * nxt[0] + b * nxt[1] + c
        if cv >= 0:
            out.append(cur)
        if (cv > 0 > nv) or (cv < 0 < nv):
            t = cv / (cv - nv)
            out.append((cur[0] + t * (nxt[0] - cur[0]),
                        cur[1] + t * (nxt[1] - cur[1])))
    return out


SQUARE_LOOP = ((mpq(-1), mpq(-1)), (mpq(1), mpq(-1)), (mpq(1), mpq(1)), (mpq(-1), mpq(1)))


def clip_region(region, halfplanes):
    """Clip a Polygon or Segment against an iterable of halfplanes."""
    if region is None:
        return None
    if isinstance(region, Polygon):
        loop = list(region.vertices)
        for hp in halfplanes:
            loop = clip_loop(loop, hp)
            if not loop:
                return None
        return loop_to_region(loop)
    return _clip_segment(region, halfplanes)


def _clip_segment(seg: Segment, halfplanes):
    a, b = seg.a, seg.b
    t_lo, t_hi = mpq(0), mpq(1)
    for (ha, hb, hc) in halfplanes:
        va = ha * a[0] + hb * a[1] + hc
        vb = ha * b[0] + hb * b[1] + hc
        if va >= 0 and vb >= 0:
            continue
        if va < 0 and vb < 0:
            return None
        t = va / (va - vb)  # crossing parameter
        if va < 0:
            t_lo = max(t_lo, t)
        else:
            t_hi = min(t_hi, t)
        if t_lo > t_hi:
            return None
    pa = (a[0] + t_lo * (b[0] - a[0]), a[1] + t_lo * (b[1] - a[1]))
    pb = (a[0] + t_hi * (b[0] - a[0]), a[1] + t_hi * (b[1] - a[1]))
    return Segment(pa, pb)


def region_from_halfplanes(halfplanes):
    """Intersection of halfplanes with the closed square, as a region."""
    loop = list(SQUARE_LOOP)
    for hp in halfplanes:
        loop = clip_loop(loop, hp)
        if not loop:
            return None
    return loop_to_region(loop)


def clip_to_square(region):
    square = ((mpq(1), mpq(0), mpq(1)), (mpq(-1), mpq(0), mpq(1)),
              (mpq(0), mpq(1), mpq(1)), (mpq(0), mpq(-1), mpq(1)))
    return clip_region(region, square)
