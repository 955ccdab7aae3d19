"""Raster and SVG renderings of scan tables and region sets.

The raster palette is fixed so golden-image tests stay stable; see the
README for the documented verdict -> color mapping.  Rasters put the
largest P in the top row, matching the usual orientation of the square.
"""

from __future__ import annotations

from .scan import CellVerdict, QuotientCell
from .zones import LineFamily, RegionSet
from .geometry import Polygon, Segment

PALETTE_RGB = {
    CellVerdict.IN_MQ_ZONE: (0, 128, 0),
    CellVerdict.IN_SQ_ZONE_ONLY: (144, 202, 80),
    CellVerdict.NUMERIC_PASS_ONLY: (224, 224, 224),
    CellVerdict.EXCLUDED_BY_ORDER: (40, 80, 200),
    CellVerdict.EXCLUDED_BY_CERTIFICATE: (200, 40, 40),
    CellVerdict.INDETERMINATE: (250, 200, 60),
}

PALETTE_GRAY = {
    CellVerdict.IN_MQ_ZONE: 48,
    CellVerdict.IN_SQ_ZONE_ONLY: 96,
    CellVerdict.NUMERIC_PASS_ONLY: 224,
    CellVerdict.EXCLUDED_BY_ORDER: 144,
    CellVerdict.EXCLUDED_BY_CERTIFICATE: 0,
    CellVerdict.INDETERMINATE: 192,
}


def _table_grid(table):
    """Validate rectangularity and return (columns, verdict rows, top-first)."""
    cells = list(table)
    if not cells:
        raise ValueError("empty table")
    xs = sorted({c.point.N for c in cells})
    ys = sorted({c.point.D for c in cells})
    if len(cells) != len(xs) * len(ys):
        raise ValueError("table is not a full rectangular grid")
    index = {(c.point.N, c.point.D): c.verdict for c in cells}
    rows = []
    for y in reversed(ys):
        rows.append([index[(x, y)] for x in xs])
    return len(xs), rows


def emit_image(table, destination, fmt: str = "ppm", palette=None) -> None:
    """Write a one-pixel-per-cell raster: 'pgm' (P5) or 'ppm' (P6)."""
    if fmt == "pgm":
        emit_pgm(table, destination, palette)
    elif fmt == "ppm":
        emit_ppm(table, destination, palette)
    else:
        raise ValueError(f"unknown raster format {fmt!r}")


def emit_pgm(table, destination, palette=None) -> None:
    palette = PALETTE_GRAY if palette is None else palette
    width, rows = _table_grid(table)
    payload = bytearray()
    for row in rows:
        payload.extend(palette[v] for v in row)
    with open(destination, "wb") as fh:
        fh.write(f"P5\n{width} {len(rows)}\n255\n".encode("ascii"))
        fh.write(bytes(payload))


def emit_ppm(table, destination, palette=None) -> None:
    palette = PALETTE_RGB if palette is None else palette
    width, rows = _table_grid(table)
    payload = bytearray()
    for row in rows:
        for v in row:
            payload.extend(palette[v])
    with open(destination, "wb") as fh:
        fh.write(f"P6\n{width} {len(rows)}\n255\n".encode("ascii"))
        fh.write(bytes(payload))


# ---------------------------------------------------------------------------
# SVG overlay
# ---------------------------------------------------------------------------

_SVG_FILL = {"mid": "#009900", "subnormal": "#3366cc"}
_DISPLAYED_LINES = 8


def _coord(q) -> str:
    """Exact-to-decimal conversion at 12 significant digits."""
    return f"{float(q):.12g}"


def region_svg(region_set: RegionSet) -> str:
    """Standalone SVG drawing the square and every primitive of the zone."""
    fill = _SVG_FILL[region_set.kind.value]
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1.05 -1.05 2.1 2.1" '
        'width="600" height="600">',
        '<g transform="scale(1,-1)">',
        '<rect x="-1" y="-1" width="2" height="2" fill="white" '
        'stroke="black" stroke-width="0.01"/>',
    ]
    for prim in region_set.primitives:
        if isinstance(prim, Polygon):
            points = " ".join(f"{_coord(x)},{_coord(y)}" for x, y in prim.vertices)
            parts.append(f'<polygon points="{points}" fill="{fill}" '
                         f'fill-opacity="0.45" stroke="{fill}" stroke-width="0.004"/>')
        elif isinstance(prim, Segment):
            parts.append(f'<line x1="{_coord(prim.a[0])}" y1="{_coord(prim.a[1])}" '
                         f'x2="{_coord(prim.b[0])}" y2="{_coord(prim.b[1])}" '
                         f'stroke="{fill}" stroke-width="0.008" stroke-linecap="round"/>')
        elif isinstance(prim, LineFamily):
            for k in range(prim.k_min, min(prim.k_max, _DISPLAYED_LINES) + 1):
                slope = prim.p ** (-k)
                if prim.kind == "reflected":
                    x2, y2 = 1, slope  # M = p**k P through the origin
                else:
                    x2, y2 = slope, 1
                parts.append(f'<line x1="0" y1="0" x2="{_coord(x2)}" y2="{_coord(y2)}" '
                             f'stroke="{fill}" stroke-width="0.004" '
                             f'stroke-dasharray="0.02,0.02"/>')
    bx, by = region_set.base.N, region_set.base.D
    parts.append(f'<circle cx="{_coord(bx)}" cy="{_coord(by)}" r="0.012" fill="black"/>')
    parts.append("</g></svg>")
    return "\n".join(parts) + "\n"


def emit_svg(region_set: RegionSet, destination) -> None:
    with open(destination, "w", encoding="utf-8") as fh:
        fh.write(region_svg(region_set))
