"""Finite-order certificates for weighted-shift properties.

Two kinds of machinery live here.  The Hankel and Agler-sum tests are exact
rational computations and never come back undecided: a Fail verdict from
them is an unconditional mathematical fact about the weight.  The log
finite-difference tests are transcendental, so they run in directed-rounded
interval arithmetic under an escalating precision policy and may return
Indeterminate.  Pass verdicts of either kind only ever assert the property
up to the checked orders.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

from gmpy2 import mpq

from . import intervals
from .intervals import Interval
from .rationals import as_mpq, binomial, format_rational
from .weights import FactoredWeight, MomentCache

DEFAULT_N_MAX = 12
DEFAULT_J_MAX = 24
DEFAULT_HANKEL_K = 5
DEFAULT_WINDOW = 24
DEFAULT_ORDER_CAP = 20


class VerdictKind(enum.Enum):
    PASS_TO_ORDER = "pass-to-order"
    FAIL = "fail"
    INDETERMINATE = "indeterminate"

    def __str__(self):
        return self.value


class SignDecision(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    ZERO_BAND = "zero-band"
    UNDECIDED = "undecided"


@dataclass(frozen=True, slots=True)
class PrecisionPolicy:
    """Escalation schedule for the interval-valued tests.

    ``zero_band`` is the tolerance epsilon: an enclosure inside (-eps, eps)
    counts as zero (the constant weight must pass), and a Fail is only
    issued for values certified below -eps.
    """

    initial_bits: int = 128
    growth_factor: int = 2
    max_bits: int = 4096
    zero_band: mpq = field(default_factory=lambda: mpq(1, 2 ** 64))

    def __post_init__(self):
        if self.initial_bits < 32:
            raise ValueError("initial_bits must be >= 32")
        if self.growth_factor < 2:
            raise ValueError("growth_factor must be >= 2")
        if self.max_bits < self.initial_bits:
            raise ValueError("max_bits must be >= initial_bits")
        object.__setattr__(self, "zero_band", as_mpq(self.zero_band))
        if not self.zero_band > 0:
            raise ValueError("zero_band must be positive")

    def schedule(self):
        bits = self.initial_bits
        while True:
            yield bits
            if bits >= self.max_bits:
                return
            bits = min(bits * self.growth_factor, self.max_bits)

    def decide(self, iv: Interval) -> SignDecision:
        eps = self.zero_band
        if iv.lo > 0:
            return SignDecision.POSITIVE
        if iv.hi < -eps:
            return SignDecision.NEGATIVE
        if -eps <= iv.lo and iv.hi <= eps:
            return SignDecision.ZERO_BAND
        return SignDecision.UNDECIDED


DEFAULT_POLICY = PrecisionPolicy()


@dataclass(frozen=True, slots=True)
class SignedValue:
    """An interval enclosure together with its sign classification."""

    interval: Interval
    bits: int
    sign: SignDecision


@dataclass(frozen=True, slots=True)
class Witness:
    test: str
    indices: dict
    value: object = None
    bits: int | None = None

    def value_json(self):
        if self.value is None:
            return None
        if isinstance(self.value, Interval):
            payload = {"lo": intervals.endpoint_str(self.value.lo),
                       "hi": intervals.endpoint_str(self.value.hi)}
            if self.bits is not None:
                payload["bits"] = self.bits
            return payload
        return format_rational(self.value)

    def to_dict(self):
        return {"test": self.test, "indices": dict(self.indices),
                "value": self.value_json()}


@dataclass(frozen=True, slots=True)
class Verdict:
    kind: VerdictKind
    test: str
    bounds: dict
    witness: Witness | None = None

    @classmethod
    def passed(cls, test, bounds):
        return cls(VerdictKind.PASS_TO_ORDER, test, dict(bounds))

    @classmethod
    def failed(cls, test, bounds, witness):
        return cls(VerdictKind.FAIL, test, dict(bounds), witness)

    @classmethod
    def indeterminate(cls, test, bounds, witness=None):
        return cls(VerdictKind.INDETERMINATE, test, dict(bounds), witness)

    @property
    def is_fail(self):
        return self.kind is VerdictKind.FAIL

    def to_json(self) -> str:
        record = {"kind": str(self.kind), "test": self.test,
                  "bounds": dict(self.bounds)}
        if self.witness is not None:
            record["witness"] = self.witness.to_dict()
        return json.dumps(record, sort_keys=True, separators=(",", ":"))

    def __str__(self):
        return self.to_json()


# ---------------------------------------------------------------------------
# Exact tests
# ---------------------------------------------------------------------------

def agler_sum(cache: MomentCache, n: int, j: int) -> mpq:
    """A(n, j) = sum_i (-1)**i C(n, i) gamma_{j+i}, the n-th forward
    difference of the moment sequence started at j.  Exact."""
    if n < 0 or j < 0:
        raise ValueError("order and start must be >= 0")
    total = mpq(0)
    sign = 1
    for i in range(n + 1):
        total += sign * binomial(n, i) * cache.moment(j + i)
        sign = -sign
    return total


def check_n_contractive(cache: MomentCache, n_max: int = DEFAULT_N_MAX,
                        j_max: int = DEFAULT_J_MAX) -> Verdict:
    """All A(n, j) >= 0 up to the bounds; Fail carries the first violation."""
    bounds = {"n_max": n_max, "j_max": j_max}
    for n in range(1, n_max + 1):
        for j in range(j_max + 1):
            value = agler_sum(cache, n, j)
            if value < 0:
                return Verdict.failed("n-contractive", bounds,
                                      Witness("n-contractive", {"n": n, "j": j}, value))
    return Verdict.passed("n-contractive", bounds)


def check_completely_alternating(cache: MomentCache, n_max: int = DEFAULT_N_MAX,
                                 j_max: int = DEFAULT_J_MAX) -> Verdict:
    """Reversed inequality: all A(n, j) <= 0 (hyperexpansivity direction)."""
    bounds = {"n_max": n_max, "j_max": j_max}
    for n in range(1, n_max + 1):
        for j in range(j_max + 1):
            value = agler_sum(cache, n, j)
            if value > 0:
                return Verdict.failed("completely-alternating", bounds,
                                      Witness("completely-alternating",
                                              {"n": n, "j": j}, value))
    return Verdict.passed("completely-alternating", bounds)


def hankel_block(cache: MomentCache, n0: int, k: int):
    """The (k+1)x(k+1) moment matrix H[i][l] = gamma_{n0+i+l}."""
    if n0 < 0 or k < 0:
        raise ValueError("start and size must be >= 0")
    return [[cache.moment(n0 + i + l) for l in range(k + 1)] for i in range(k + 1)]


def psd_exact(matrix) -> tuple:
    """Exact PSD decision for a symmetric rational matrix.

    Symmetric elimination: a negative diagonal entry refutes immediately; a
    zero diagonal entry must have an all-zero row (else the 2x2 principal
    minor in that direction is negative); otherwise pivot on a positive
    diagonal entry and take the Schur complement.  Returns (True, None) or
    (False, witness-dict).
    """
    size = len(matrix)
    work = [[as_mpq(entry) for entry in row] for row in matrix]
    for row in work:
        if len(row) != size:
            raise ValueError("matrix must be square")
    for i in range(size):
        for j in range(i):
            if work[i][j] != work[j][i]:
                raise ValueError("matrix must be symmetric")

    active = list(range(size))
    while active:
        for i in active:
            if work[i][i] < 0:
                return False, {"kind": "negative-diagonal", "i": i,
                               "value": work[i][i]}
        zero_rows = [i for i in active if work[i][i] == 0]
        for i in zero_rows:
            for j in active:
                if work[i][j] != 0:
                    return False, {"kind": "zero-pivot-offdiagonal", "i": i,
                                   "j": j, "value": work[i][j]}
            active.remove(i)
        if not active:
            break
        pivot = active[0]
        active = active[1:]
        pv = work[pivot][pivot]
        for a in active:
            ratio = work[a][pivot] / pv
            for b in active:
                work[a][b] -= ratio * work[pivot][b]
    return True, None


def check_k_hyponormal(cache: MomentCache, k: int = DEFAULT_HANKEL_K,
                       window_max: int = DEFAULT_WINDOW) -> Verdict:
    """PSD of every (k+1)x(k+1) Hankel block with start n0 <= window_max."""
    if k < 1:
        raise ValueError("hyponormality order k must be >= 1")
    bounds = {"k": k, "window": window_max}
    for n0 in range(window_max + 1):
        ok, info = psd_exact(hankel_block(cache, n0, k))
        if not ok:
            indices = {"n0": n0, "k": k, "kind": info["kind"], "i": info["i"]}
            if "j" in info:
                indices["j"] = info["j"]
            return Verdict.failed("k-hyponormal", bounds,
                                  Witness("k-hyponormal", indices, info["value"]))
    return Verdict.passed("k-hyponormal", bounds)


# ---------------------------------------------------------------------------
# Interval log tests
# ---------------------------------------------------------------------------

def log_weight_interval(weight: FactoredWeight, n: int, bits: int = 128) -> Interval:
    """Enclosure of ln(alpha_n); width shrinks monotonically as bits grow."""
    if bits < 32:
        raise ValueError("precision must be at least 32 bits")
    return weight.log_weight_squared(n, bits).scale(mpq(1, 2), bits)


def _alt_sum(weight: FactoredWeight, n: int, j: int, bits: int) -> Interval:
    # (Delta^n ln alpha)_j = (-1)^n sum_i (-1)^i C(n,i) ln alpha_{j+i}
    half = mpq(1, 2)
    terms = []
    sign = 1 if n % 2 == 0 else -1
    for i in range(n + 1):
        coeff = sign * binomial(n, i) * half
        terms.append((coeff, weight.log_weight_squared(j + i, bits)))
        sign = -sign
    return intervals.weighted_sum(terms, bits)


def log_alt_value(weight: FactoredWeight, n: int, j: int,
                  policy: PrecisionPolicy = DEFAULT_POLICY) -> SignedValue:
    """Sign-classified enclosure of the n-th backward log difference at j.

    Precision escalates until the sign is settled (or the value is pinned
    inside the zero band); Indeterminate is a value, not an error.
    """
    if n < 1 or j < 0:
        raise ValueError("need order n >= 1 and start j >= 0")
    last = None
    for bits in policy.schedule():
        iv = _alt_sum(weight, n, j, bits)
        decision = policy.decide(iv)
        last = SignedValue(iv, bits, decision)
        if decision is not SignDecision.UNDECIDED:
            return last
    return last


def log_cm_moments_value(cache: MomentCache, n: int, j: int,
                         policy: PrecisionPolicy = DEFAULT_POLICY) -> SignedValue:
    """Enclosure of the n-th forward difference of ln gamma at start j.

    The moment-side mirror of the weight-side test: advisory cross-check
    for contractive weights.  Uses exact moments, so only the logs round.
    """
    if n < 1 or j < 0:
        raise ValueError("need order n >= 1 and start j >= 0")
    last = None
    for bits in policy.schedule():
        terms = []
        sign = 1
        for i in range(n + 1):
            gamma = cache.moment(j + i)
            term = (intervals.exact_zero() if gamma == 1
                    else intervals.log_rational(gamma, bits))
            terms.append((sign * binomial(n, i), term))
            sign = -sign
        iv = intervals.weighted_sum(terms, bits)
        decision = policy.decide(iv)
        last = SignedValue(iv, bits, decision)
        if decision is not SignDecision.UNDECIDED:
            return last
    return last


def check_mid_numeric(weight: FactoredWeight, n_max: int = DEFAULT_N_MAX,
                      j_max: int = DEFAULT_J_MAX,
                      policy: PrecisionPolicy = DEFAULT_POLICY) -> Verdict:
    """Weight-side log complete-alternation to finite order.

    Pass means every backward log difference up to (n_max, j_max) is
    certified nonnegative or pinned to the zero band; Fail carries the
    lexicographically first certified-negative (n, j).

    A full difference table at the initial precision screens all cells at
    once (sound but wide); only undecided cells escalate individually.
    """
    bounds = {"n_max": n_max, "j_max": j_max}
    bits = policy.initial_bits
    count = j_max + n_max + 1
    half = mpq(1, 2)
    row = [iv.scale(half, bits) for iv in weight.log_weight_squared_table(count, bits)]
    table = []
    for _ in range(n_max):
        row = intervals.difference_row(row, bits)
        table.append(row)

    first_undecided = None
    for n in range(1, n_max + 1):
        for j in range(j_max + 1):
            decision = policy.decide(table[n - 1][j])
            value = SignedValue(table[n - 1][j], bits, decision)
            if decision is SignDecision.UNDECIDED:
                value = log_alt_value(weight, n, j, policy)
                decision = value.sign
            if decision is SignDecision.NEGATIVE:
                witness = Witness("log-alternating", {"n": n, "j": j},
                                  value.interval, value.bits)
                return Verdict.failed("mid-numeric", bounds, witness)
            if decision is SignDecision.UNDECIDED and first_undecided is None:
                first_undecided = Witness("log-alternating", {"n": n, "j": j},
                                          value.interval, value.bits)
    if first_undecided is not None:
        return Verdict.indeterminate("mid-numeric", bounds, first_undecided)
    return Verdict.passed("mid-numeric", bounds)


# ---------------------------------------------------------------------------
# Interval Hankel test for Schur powers
# ---------------------------------------------------------------------------

def _psd_interval(block, bits: int):
    """PSD decision on an interval matrix: 'psd', 'fail' or 'indeterminate'."""
    active = list(range(len(block)))
    work = [row[:] for row in block]
    while active:
        for i in active:
            if work[i][i].strictly_negative():
                return "fail", (i, i, work[i][i])
        for i in list(active):
            if work[i][i].is_exact_zero():
                for j in active:
                    if j == i or work[i][j].is_exact_zero():
                        continue
                    if not work[i][j].contains(0):
                        return "fail", (i, j, work[i][j])
                    return "indeterminate", (i, j, work[i][j])
                active.remove(i)
        if not active:
            break
        pivot = next((i for i in active if work[i][i].strictly_positive()), None)
        if pivot is None:
            i = active[0]
            return "indeterminate", (i, i, work[i][i])
        active.remove(pivot)
        pv = work[pivot][pivot]
        for a in active:
            ratio = work[a][pivot].div(pv, bits)
            for b in active:
                work[a][b] = work[a][b].sub(ratio.mul(work[pivot][b], bits), bits)
    return "psd", None


def check_power_subnormal(weight: FactoredWeight, s, k: int = 3,
                          window_max: int = 8, bits: int = 256) -> Verdict:
    """Hankel PSD test on the s-th Schur power, in interval arithmetic.

    Corroborates MID verdicts at sampled exponents s; Indeterminate is
    expected when enclosures are too wide at the requested precision.
    """
    s = as_mpq(s)
    if s <= 0:
        raise ValueError("Schur power exponent must be positive")
    bounds = {"k": k, "window": window_max, "bits": bits, "s": str(s)}
    needed = window_max + 2 * k + 1
    logs = weight.log_weight_squared_table(needed, bits)
    gammas = []
    running = intervals.exact_zero()
    for m in range(needed):
        gammas.append(running.scale(s, bits).exp(bits))
        if m < needed - 1:
            running = running.add(logs[m], bits)
    first_indet = None
    for n0 in range(window_max + 1):
        block = [[gammas[n0 + i + l] for l in range(k + 1)] for i in range(k + 1)]
        status, info = _psd_interval(block, bits)
        if status == "fail":
            i, j, iv = info
            return Verdict.failed("power-subnormal", bounds,
                                  Witness("power-subnormal",
                                          {"n0": n0, "i": i, "j": j}, iv, bits))
        if status == "indeterminate" and first_indet is None:
            i, j, iv = info
            first_indet = Witness("power-subnormal",
                                  {"n0": n0, "i": i, "j": j}, iv, bits)
    if first_indet is not None:
        return Verdict.indeterminate("power-subnormal", bounds, first_indet)
    return Verdict.passed("power-subnormal", bounds)


# ---------------------------------------------------------------------------
# Violation search
# ---------------------------------------------------------------------------

def _as_cache(subject) -> MomentCache:
    if isinstance(subject, MomentCache):
        return subject
    return MomentCache(subject)


def find_first_violation(subject, test_kind: str, *,
                         n_max: int = DEFAULT_N_MAX, j_max: int = DEFAULT_J_MAX,
                         k: int = DEFAULT_HANKEL_K, window_max: int = DEFAULT_WINDOW,
                         order_cap: int = DEFAULT_ORDER_CAP,
                         policy: PrecisionPolicy = DEFAULT_POLICY) -> Witness | None:
    """Lexicographically first certified violation for a test family.

    ``subject`` is a FactoredWeight or a MomentCache.  For the combined
    'subnormal' family the sweep interleaves, per order, the Agler row and
    the Hankel window of that order, so witnesses are reproducible.
    Returns None when nothing is certified within the bounds.
    """
    if test_kind == "mid":
        weight = subject.weight if isinstance(subject, MomentCache) else subject
        verdict = check_mid_numeric(weight, n_max, j_max, policy)
        return verdict.witness if verdict.is_fail else None

    cache = _as_cache(subject)
    if test_kind == "n-contractive":
        verdict = check_n_contractive(cache, n_max, j_max)
        return verdict.witness if verdict.is_fail else None
    if test_kind == "completely-alternating":
        verdict = check_completely_alternating(cache, n_max, j_max)
        return verdict.witness if verdict.is_fail else None
    if test_kind == "k-hyponormal":
        verdict = check_k_hyponormal(cache, k, window_max)
        return verdict.witness if verdict.is_fail else None
    if test_kind == "subnormal":
        for order in range(1, order_cap + 1):
            for j in range(j_max + 1):
                value = agler_sum(cache, order, j)
                if value < 0:
                    return Witness("n-contractive", {"n": order, "j": j}, value)
            for n0 in range(window_max + 1):
                ok, info = psd_exact(hankel_block(cache, n0, order))
                if not ok:
                    indices = {"k": order, "n0": n0, "kind": info["kind"],
                               "i": info["i"]}
                    if "j" in info:
                        indices["j"] = info["j"]
                    return Witness("k-hyponormal", indices, info["value"])
        return None
    raise ValueError(f"unknown test kind {test_kind!r}")
