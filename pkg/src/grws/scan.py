"""Grid scans over the parameter square.

Lattice points are exact rationals i/(half+1) with odd per-axis resolution,
so (0, 0) is always sampled and zone membership and special-line detection
stay exact on grid points.  Scans are deterministic functions of their
inputs: identical configurations produce identical CSV bytes.
"""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from gmpy2 import mpq

from . import certify, zones
from .certify import PrecisionPolicy, VerdictKind
from .rationals import format_rational, parse_rational
from .sectors import classify, shift_class, special_line_index
from .weights import MomentCache, ParamPoint, ShiftBase, as_base, grws_weight


@dataclass(frozen=True, slots=True)
class GridSpec:
    resolution: int = 201

    def __post_init__(self):
        if self.resolution < 1 or self.resolution % 2 == 0:
            raise ValueError("grid resolution must be a positive odd number")

    def axis(self):
        half = (self.resolution - 1) // 2
        denom = half + 1
        return [mpq(i, denom) for i in range(-half, half + 1)]

    def points(self):
        """Row-major: P ascending in the outer loop, M ascending inner."""
        axis = self.axis()
        for second in axis:
            for first in axis:
                yield ParamPoint(first, second)


class CellVerdict(enum.Enum):
    IN_MQ_ZONE = "in-mq-zone"
    IN_SQ_ZONE_ONLY = "in-sq-zone-only"
    NUMERIC_PASS_ONLY = "numeric-pass-only"
    EXCLUDED_BY_ORDER = "excluded-by-order"
    EXCLUDED_BY_CERTIFICATE = "excluded-by-certificate"
    INDETERMINATE = "indeterminate"

    def __str__(self):
        return self.value


@dataclass(frozen=True, slots=True)
class SelfMapRow:
    point: ParamPoint
    sectors: frozenset
    property_class: object
    special_k: int | None


@dataclass(frozen=True, slots=True)
class QuotientCell:
    point: ParamPoint
    verdict: CellVerdict
    witness: str = ""


def scan_self_map(p, grid: GridSpec):
    """Sector membership, property class and special-line flag per point."""
    p = as_base(p)
    rows = []
    for point in grid.points():
        rows.append(SelfMapRow(point, classify(point), shift_class(point, p),
                               special_line_index(point, p)))
    return rows


def _witness_text(witness) -> str:
    if witness is None:
        return ""
    parts = [witness.test]
    parts += [f"{key}={witness.indices[key]}" for key in sorted(witness.indices)
              if isinstance(witness.indices[key], int)]
    return ";".join(parts)


@dataclass(frozen=True, slots=True)
class ScanConfig:
    base: ParamPoint
    p: ShiftBase
    mode: zones.ZoneKind
    n_max: int = certify.DEFAULT_N_MAX
    j_max: int = certify.DEFAULT_J_MAX
    hankel_k: int = certify.DEFAULT_HANKEL_K
    window_max: int = certify.DEFAULT_WINDOW
    depth: int = 4
    policy: PrecisionPolicy = certify.DEFAULT_POLICY


class _CellClassifier:
    def __init__(self, config: ScanConfig):
        self.config = config
        self.base_weight = grws_weight(config.base, config.p)
        self.mq = zones.mq_zone(config.base, config.p)
        self.sq = (zones.sq_zone(config.base, config.p, config.depth)
                   if config.mode is zones.ZoneKind.SUBNORMAL else None)

    def classify(self, cell: ParamPoint) -> QuotientCell:
        cfg = self.config
        if self.mq.contains(cell):
            return QuotientCell(cell, CellVerdict.IN_MQ_ZONE)
        if self.sq is not None and self.sq.contains(cell):
            return QuotientCell(cell, CellVerdict.IN_SQ_ZONE_ONLY)
        if cell != cfg.base and zones.excluded_by_order(
                cfg.base, cell, cfg.p, cfg.mode, cfg.depth):
            return QuotientCell(cell, CellVerdict.EXCLUDED_BY_ORDER)
        quotient = self.base_weight.schur_div(grws_weight(cell, cfg.p))
        if cfg.mode is zones.ZoneKind.MID:
            verdict = certify.check_mid_numeric(quotient, cfg.n_max, cfg.j_max,
                                                cfg.policy)
            if verdict.is_fail:
                return QuotientCell(cell, CellVerdict.EXCLUDED_BY_CERTIFICATE,
                                    _witness_text(verdict.witness))
            if verdict.kind is VerdictKind.INDETERMINATE:
                return QuotientCell(cell, CellVerdict.INDETERMINATE,
                                    _witness_text(verdict.witness))
            return QuotientCell(cell, CellVerdict.NUMERIC_PASS_ONLY)
        cache = MomentCache(quotient)
        for verdict in (certify.check_n_contractive(cache, cfg.n_max, cfg.j_max),
                        certify.check_k_hyponormal(cache, cfg.hankel_k,
                                                   cfg.window_max)):
            if verdict.is_fail:
                return QuotientCell(cell, CellVerdict.EXCLUDED_BY_CERTIFICATE,
                                    _witness_text(verdict.witness))
        return QuotientCell(cell, CellVerdict.NUMERIC_PASS_ONLY)


_WORKER_CLASSIFIER = None


def _worker_init(base_n, base_d, p_str, mode, n_max, j_max, hankel_k,
                 window_max, depth, initial_bits, max_bits):
    global _WORKER_CLASSIFIER
    config = ScanConfig(ParamPoint(parse_rational(base_n), parse_rational(base_d)),
                        ShiftBase(parse_rational(p_str)),
                        zones.ZoneKind(mode), n_max, j_max, hankel_k,
                        window_max, depth,
                        PrecisionPolicy(initial_bits=initial_bits, max_bits=max_bits))
    _WORKER_CLASSIFIER = _CellClassifier(config)


def _worker_classify(chunk):
    out = []
    for m_str, p_str in chunk:
        cell = _WORKER_CLASSIFIER.classify(
            ParamPoint(parse_rational(m_str), parse_rational(p_str)))
        out.append((cell.verdict.value, cell.witness))
    return out


def scan_quotient_map(base: ParamPoint, p, grid: GridSpec,
                      mode: zones.ZoneKind = zones.ZoneKind.MID, *,
                      n_max: int = certify.DEFAULT_N_MAX,
                      j_max: int = certify.DEFAULT_J_MAX,
                      hankel_k: int = certify.DEFAULT_HANKEL_K,
                      window_max: int = certify.DEFAULT_WINDOW,
                      depth: int = 4,
                      policy: PrecisionPolicy = certify.DEFAULT_POLICY,
                      workers: int = 1):
    """Per-cell verdicts for quotients against a fixed base.

    Cells inside the constructed zone report zone membership; all others run
    the order-exclusion test and then the matching certifier family.
    """
    p = as_base(p)
    config = ScanConfig(base, p, mode, n_max, j_max, hankel_k, window_max,
                        depth, policy)
    cells = list(grid.points())
    if workers <= 1:
        classifier = _CellClassifier(config)
        return [classifier.classify(cell) for cell in cells]

    encoded = [(str(c.N), str(c.D)) for c in cells]
    chunk_size = max(1, len(encoded) // (workers * 8))
    chunks = [encoded[i:i + chunk_size] for i in range(0, len(encoded), chunk_size)]
    init_args = (str(base.N), str(base.D), str(p.p), mode.value, n_max, j_max,
                 hankel_k, window_max, depth, policy.initial_bits, policy.max_bits)
    results = []
    with ProcessPoolExecutor(max_workers=workers, initializer=_worker_init,
                             initargs=init_args) as pool:
        for chunk_result in pool.map(_worker_classify, chunks):
            results.extend(chunk_result)
    return [QuotientCell(cell, CellVerdict(verdict), witness)
            for cell, (verdict, witness) in zip(cells, results)]


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------

def emit_csv(table, destination) -> None:
    """Write a scan table; cell order is row-major (P ascending, then M)."""
    rows = list(table)
    if not rows:
        raise ValueError("refusing to emit an empty table")
    with open(destination, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_csv(rows))


def render_csv(rows) -> str:
    if isinstance(rows[0], SelfMapRow):
        lines = ["N,D,sectors,class,special_line_k"]
        for row in rows:
            sectors = "+".join(s.value for s in sorted(row.sectors, key=lambda s: s.value))
            k = "" if row.special_k is None else str(row.special_k)
            lines.append(f"{row.point.N},{row.point.D},{sectors},"
                         f"{row.property_class},{k}")
    else:
        lines = ["M,P,verdict,witness"]
        for cell in rows:
            lines.append(f"{cell.point.N},{cell.point.D},{cell.verdict},"
                         f"{cell.witness}")
    return "\n".join(lines) + "\n"


def parse_quotient_csv(text: str):
    lines = text.strip().split("\n")
    if lines[0] != "M,P,verdict,witness":
        raise ValueError("not a quotient scan table")
    cells = []
    for line in lines[1:]:
        m, p, verdict, witness = line.split(",", 3)
        cells.append(QuotientCell(ParamPoint(parse_rational(m), parse_rational(p)),
                                  CellVerdict(verdict), witness))
    return cells
