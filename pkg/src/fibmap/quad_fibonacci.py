# src/fibmap/quad_fibonacci.py
"""
The quadratic Fibonacci map x -> x^2 + c: parameter search by kneading
bisection, closest-return checks, the level-n covers M^n and the scaling
diagnostics computed from one critical orbit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from functools import cmp_to_key, lru_cache
import logging
import math
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import mpmath
from mpmath import mpf, workprec

from .errors import (
    DomainError,
    PrecisionError,
    ResolutionError,
    SearchError,
    StructuralError,
)
from .fib_arith import FibIndexSet, _u, fib, fib_index, zeckendorf
from .fitting import (
    LinearFit,
    MultiFit,
    in_window,
    linear_fit,
    multi_fit,
    top_half,
)
from .kneading import fib_signs
from .model_map import ModelParams, order_compare, y_value
from .mp_dynamics import (
    MIN_PRECISION,
    OrbitRecord,
    derivative_product,
    escalating_orbit,
    log2_derivative_series,
    orbit_quadratic,
    to_mpf,
)

logger = logging.getLogger(__name__)

CUBE_ROOT_HALF = 2.0 ** (-1.0 / 3.0)

# bits of c beyond ceil(n^2/3) before d_n = |x_u(n)| is resolved at level n
FAITHFUL_SLACK_BITS = 14


def target_bits_for(N: int) -> int:
    """Bracket width in bits that keeps the critical orbit faithful through level N."""
    return math.ceil(N * N / 3) + 64


def faithful_depth(c_bits: float) -> int:
    """Deepest level n whose closest return d_n a c known to `c_bits` still resolves."""
    n = 1
    while math.ceil((n + 1) ** 2 / 3) + FAITHFUL_SLACK_BITS <= c_bits:
        n += 1
    return n


def parameter_bits(c: Any) -> Optional[float]:
    """
    Absolute accuracy in bits carried by a decimal string or rational c.
    Binary values (mpf, float) carry no such information and give None.
    """
    if isinstance(c, Fraction):
        return math.log2(c.denominator)
    if not isinstance(c, str):
        return None
    text = c.strip()
    if "/" in text:
        try:
            return math.log2(Fraction(text).denominator)
        except (ValueError, ZeroDivisionError):
            return None
    try:
        exponent = Decimal(text).as_tuple().exponent
    except InvalidOperation:
        return None
    if not isinstance(exponent, int):
        return None
    return max(0, -exponent) * math.log2(10)


def parameter_depth(c: Any, c_depth: Optional[int] = None) -> Optional[int]:
    """Level through which c follows the Fibonacci parameter; None when unknown."""
    if c_depth is not None:
        return c_depth
    bits = parameter_bits(c)
    return None if bits is None else faithful_depth(bits)


def _orbit(
    c: Any,
    length: int,
    p: int,
    orbit: Optional[OrbitRecord],
    precision_cap: Optional[int] = None,
) -> OrbitRecord:
    if orbit is not None and len(orbit) >= length:
        return orbit
    if precision_cap is not None:
        return escalating_orbit(c, length, p, precision_cap)
    return orbit_quadratic(c, length, p)


# ---------------------------------------------------------------------------
# parameter search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CInterval:
    lo: mpf
    hi: mpf
    c: mpf
    depth: int
    matched_horizon: int
    precision: int
    iterations: int
    schedule: Tuple[int, ...] = ()

    @property
    def width(self) -> mpf:
        return self.hi - self.lo

    @property
    def width_bits(self) -> float:
        w = self.width
        return float("inf") if w == 0 else -float(mpmath.log(w, 2))

    @property
    def faithful_depth(self) -> int:
        """Deepest level both resolved by the bracket width and matched symbolically."""
        matched = fib_index(self.matched_horizon) or 0
        return min(faithful_depth(self.width_bits), matched)

    def contains(self, value: Any) -> bool:
        with workprec(max(self.precision, 256)):
            v = to_mpf(value)
            return self.lo <= v <= self.hi

    def agreeing_digits(self, value: Any) -> int:
        """Significant decimal digits shared by value and the located c."""
        with workprec(max(self.precision, 256)):
            v = to_mpf(value)
            diff = abs(v - self.c)
            if diff == 0:
                return int(self.precision * math.log10(2))
            return max(0, int(mpmath.floor(mpmath.log10(abs(self.c) / diff))))


def _kneading_direction(c: mpf, horizon: int, p: int) -> Tuple[int, Optional[int]]:
    """
    +1 when c lies above the Fibonacci parameter, -1 below, 0 when the
    itinerary matches through `horizon`.  Returns (direction, first index).

    The raw comparison sgn(x_i) - target_i at the first disagreement is
    flipped when an odd number of x_1..x_{i-1} are negative.
    """
    target = fib_signs(horizon).signs
    orb = orbit_quadratic(c, horizon, p, allow_partial=True)
    negatives = 0
    for i in range(1, horizon + 1):
        if i > len(orb):
            raise PrecisionError(
                f"orbit certificate exhausted at {i} before a decision", index=i
            )
        x = orb.x(i)
        err = orb.error(i)
        if x == 0 and err == 0:
            s = 0
        elif abs(x) <= err:
            raise ResolutionError(f"sign of x_{i} not certified at p={p}", index=i)
        else:
            s = 1 if x > 0 else -1
        t = target[i - 1]
        if s != t:
            raw = 1 if s > t else -1
            twist = -1 if negatives % 2 else 1
            return raw * twist, i
        if s < 0:
            negatives += 1
    return 0, None


def find_c(
    depth_index: int,
    target_bits: int = 80,
    *,
    start_precision: Optional[int] = None,
    precision_cap: int = 2**20,
    bracket: Tuple[Any, Any] = (-2, -1),
) -> CInterval:
    """
    Bisect c in [-2, -1] until the critical itinerary matches the Fibonacci
    signs through u(N) and the bracket is narrower than 2^-B.

    A midpoint that matches through the current horizon is compared on the
    next Fibonacci horizon, up to u(N+2) or the level a 2^-B bracket pins
    down, whichever is deeper.  A midpoint matching all of them ends the
    search early; `matched_horizon` records how far the returned c matched.
    """
    N = depth_index
    B = target_bits
    if N < 5:
        raise DomainError(f"find_c needs depth N >= 5, got {N}")
    if B < 64:
        raise DomainError(f"find_c needs target_bits >= 64, got {B}")

    deepest = N + 2
    while math.ceil(deepest * deepest / 3) < B:
        deepest += 1
    horizons = tuple(fib(n) for n in range(N, deepest + 1))
    work_bits = max(B + 64, N * N)
    p = max(start_precision or 0, MIN_PRECISION, work_bits + 64)
    schedule: List[int] = [p]

    def direction(c: mpf, horizon: int) -> Tuple[int, Optional[int]]:
        nonlocal p
        while True:
            try:
                return _kneading_direction(c, horizon, p)
            except (PrecisionError, ResolutionError) as exc:
                if 2 * p > precision_cap:
                    raise PrecisionError(
                        f"precision cap {precision_cap} reached at index {exc.index}",
                        index=exc.index,
                    ) from exc
                p *= 2
                schedule.append(p)
                logger.debug("escalating precision to %d bits (index %s)", p, exc.index)

    def compare_horizons(c: mpf) -> Tuple[int, Optional[int], int]:
        """Direction on the first horizon that disagrees, plus the deepest match."""
        matched = 0
        for h in horizons:
            d, idx = direction(c, h)
            if d != 0:
                return d, idx, matched
            matched = h
        return 0, None, matched

    with workprec(work_bits):
        lo = to_mpf(bracket[0])
        hi = to_mpf(bracket[1])
        threshold = mpf(2) ** (-B)
    d_lo, _ = direction(lo, horizons[0])
    d_hi, _ = direction(hi, horizons[0])
    if d_lo != -1 or d_hi != 1:
        raise SearchError(
            f"bracket [{bracket[0]}, {bracket[1]}] does not separate the Fibonacci "
            f"parameter (directions {d_lo}, {d_hi})"
        )

    best: Optional[mpf] = None
    matched = 0
    max_iter = 4 * B + 4 * horizons[0] + 64
    iterations = 0
    while hi - lo >= threshold:
        iterations += 1
        if iterations > max_iter:
            raise SearchError(f"bisection did not converge within {max_iter} steps")
        with workprec(work_bits):
            mid = (lo + hi) / 2
        d, idx, depth_matched = compare_horizons(mid)
        if depth_matched >= horizons[0]:
            best, matched = mid, depth_matched
        logger.debug("bisection step %d: direction %d at index %s", iterations, d, idx)
        if d == 0:
            logger.info("itinerary matches through u(%d); stopping", deepest)
            break
        if d > 0:
            hi = mid
        else:
            lo = mid

    if best is None or not (lo <= best <= hi):
        with workprec(work_bits):
            best = (lo + hi) / 2
        _, _, matched = compare_horizons(best)
    if matched < horizons[0]:
        raise SearchError(f"located c does not follow the Fibonacci signs through u({N})")
    logger.info("located c after %d steps at p=%d bits", iterations, p)
    return CInterval(
        lo=lo,
        hi=hi,
        c=best,
        depth=N,
        matched_horizon=matched,
        precision=p,
        iterations=iterations,
        schedule=tuple(schedule),
    )


# ---------------------------------------------------------------------------
# closest returns
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosestReturnReport:
    ok: bool
    depth: int
    first_failure: Optional[int]
    failures: Tuple[Tuple[str, int], ...]
    x4_negative: bool
    distances: Tuple[float, ...]

    def __bool__(self) -> bool:
        return self.ok


def _certain_sign(x: mpf, err: mpf, index: int) -> int:
    if x == 0 and err == 0:
        return 0
    if abs(x) <= err:
        raise ResolutionError(f"sign of x_{index} not certified", index=index)
    return 1 if x > 0 else -1


def verify_closest_returns(
    c: Any, N: int, p: int, *, orbit: Optional[OrbitRecord] = None
) -> ClosestReturnReport:
    """
    Check |x_u(n)| strictly decreasing for n <= N, x_4 < 0, sign agreement
    sgn x_k = sgn x_{k+u(n)} for 1 <= k < u(n-1) (n <= 8), and that 0 lies
    between x_u(n-1) and x_u(n+1).
    """
    if N < 2:
        raise DomainError(f"closest-return check needs N >= 2, got {N}")
    orb = _orbit(c, max(fib(N), fib(min(8, N) + 1), 4), p, orbit)
    failures: List[Tuple[str, int]] = []

    for n in range(2, N + 1):
        a, b = fib(n - 1), fib(n)
        xa, xb = abs(orb.x(a)), abs(orb.x(b))
        tol = orb.error(a) + orb.error(b)
        if xb < xa and xa - xb > tol:
            continue
        if xb >= xa and tol == 0:
            failures.append(("decreasing", n))
        elif abs(xa - xb) <= tol:
            raise ResolutionError(
                f"|x_{b}| vs |x_{a}| not certified", index=b
            )
        else:
            failures.append(("decreasing", n))

    x4_negative = _certain_sign(orb.x(4), orb.error(4), 4) < 0
    if not x4_negative:
        failures.append(("x4_negative", 4))

    for n in range(3, min(8, N) + 1):
        span = fib(n - 1) - 1
        if span + fib(n) > len(orb):
            break
        for k in range(1, span + 1):
            s1 = _certain_sign(orb.x(k), orb.error(k), k)
            s2 = _certain_sign(orb.x(k + fib(n)), orb.error(k + fib(n)), k + fib(n))
            if s1 != s2:
                failures.append(("injective", n))
                break

    for n in range(2, N):
        if fib(n + 1) > len(orb):
            break
        s1 = _certain_sign(orb.x(fib(n - 1)), orb.error(fib(n - 1)), fib(n - 1))
        s2 = _certain_sign(orb.x(fib(n + 1)), orb.error(fib(n + 1)), fib(n + 1))
        if s1 * s2 >= 0:
            failures.append(("straddle", n))

    first = min((n for _, n in failures), default=None)
    distances = tuple(float(abs(orb.x(fib(n)))) for n in range(1, N + 1))
    return ClosestReturnReport(
        ok=not failures,
        depth=N,
        first_failure=first,
        failures=tuple(sorted(failures, key=lambda f: f[1])),
        x4_negative=x4_negative,
        distances=distances,
    )


# ---------------------------------------------------------------------------
# covers M^n
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoverInterval:
    label: str
    level: int
    k: int
    p: int
    q: int
    lo: Any
    hi: Any

    @property
    def length(self) -> Any:
        return self.hi - self.lo

    @property
    def name(self) -> str:
        return f"{self.label}^{self.level}_{self.k}"


@dataclass(frozen=True)
class CoverM:
    level: int
    intervals: Tuple[CoverInterval, ...]

    @property
    def count(self) -> int:
        return len(self.intervals)

    def endpoint_pairs(self) -> List[Tuple[int, int]]:
        return [(iv.p, iv.q) for iv in self.intervals]

    def gaps(self) -> List[Tuple[int, int]]:
        """Orbit indices bounding each gap, left to right."""
        return [
            (a.q, b.p) for a, b in zip(self.intervals, self.intervals[1:])
        ]

    def total_length(self) -> Any:
        total = self.intervals[0].length
        for iv in self.intervals[1:]:
            total = total + iv.length
        return total

    def max_length(self) -> Any:
        return max(iv.length for iv in self.intervals)

    def find(self, label: str, k: int) -> CoverInterval:
        for iv in self.intervals:
            if iv.label == label and iv.k == k:
                return iv
        raise DomainError(f"{label}^{self.level}_{k} is not part of M^{self.level}")


def _cmp_index(a: int, b: int) -> int:
    return order_compare(FibIndexSet.from_int(a), FibIndexSet.from_int(b))


@lru_cache(maxsize=64)
def cover_indices(n: int) -> Tuple[Tuple[str, int, int, int], ...]:
    """
    (label, k, p, q) for the u(n) intervals of M^n, sorted left to right;
    p is the orbit index of the left endpoint and q of the right one.

      I^n_0 : (u(n), u(n+1)) for odd n, (u(n), u(n+2)) for even n
      I^n_k : (k, u(n) + k)                     1 <= k < u(n-1)
      J^n_k : (k + u(n-1), u(n+1) + k + u(n-1))  0 <= k < u(n-2)
    """
    if n < 1:
        raise DomainError(f"cover level must be >= 1, got {n}")
    raw: List[Tuple[str, int, int, int]] = []
    for k in range(_u(n - 1)):
        if k == 0:
            a, b = fib(n), (fib(n + 1) if n % 2 else fib(n + 2))
        else:
            a, b = k, fib(n) + k
        raw.append(("I", k, a, b))
    for k in range(_u(n - 2)):
        a = k + _u(n - 1)
        raw.append(("J", k, a, fib(n + 1) + a))

    ordered: List[Tuple[str, int, int, int]] = []
    for label, k, a, b in raw:
        if _cmp_index(a, b) > 0:
            a, b = b, a
        ordered.append((label, k, a, b))
    ordered.sort(key=cmp_to_key(lambda u, v: _cmp_index(u[2], v[2])))
    return tuple(ordered)


def _parent(label: str, k: int, n: int) -> Tuple[str, int]:
    if label == "J" or k < _u(n - 2):
        return ("I", k)
    return ("J", k - _u(n - 2))


Renderer = Callable[[int], Tuple[Any, Any]]


def _render_cover(n: int, render: Renderer) -> CoverM:
    intervals: List[CoverInterval] = []
    errors: Dict[int, Any] = {}
    for label, k, a, b in cover_indices(n):
        va, ea = render(a)
        vb, eb = render(b)
        errors[a], errors[b] = ea, eb
        if not vb - va > ea + eb:
            raise StructuralError(
                f"{label}^{n}_{k} = [x_{a}, x_{b}] is not a proper interval"
            )
        intervals.append(CoverInterval(label, n, k, a, b, va, vb))
    for left, right in zip(intervals, intervals[1:]):
        if not right.lo - left.hi > errors[left.q] + errors[right.p]:
            raise StructuralError(
                f"{left.name} and {right.name} overlap at level {n}"
            )
    return CoverM(n, tuple(intervals))


def _check_nesting(child: CoverM, parent: CoverM, render: Renderer) -> None:
    n = child.level
    for iv in child.intervals:
        plabel, pk = _parent(iv.label, iv.k, n)
        par = parent.find(plabel, pk)
        tol_lo = render(iv.p)[1] + render(par.p)[1]
        tol_hi = render(iv.q)[1] + render(par.q)[1]
        if par.lo - iv.lo > tol_lo or iv.hi - par.hi > tol_hi:
            raise StructuralError(
                f"{iv.name} is not nested in {par.name}"
            )


def _build_cover(n: int, render: Renderer) -> CoverM:
    cover = _render_cover(n, render)
    if n >= 2:
        _check_nesting(cover, _render_cover(n - 1, render), render)
    if cover.count != fib(n):
        raise StructuralError(f"M^{n} has {cover.count} intervals, expected {fib(n)}")
    return cover


def cover_orbit_length(n: int) -> int:
    return fib(n + 2)


def build_cover(
    c: Any,
    n: int,
    p: int,
    *,
    orbit: Optional[OrbitRecord] = None,
    c_depth: Optional[int] = None,
) -> CoverM:
    """M^n at c; its endpoints reach x_u(n+2), so c must resolve level n + 2."""
    depth = parameter_depth(c, c_depth)
    if depth is not None and n + 2 > depth:
        raise PrecisionError(
            f"M^{n} needs c resolved through level {n + 2}, c reaches {depth}",
            index=cover_orbit_length(n),
        )
    orb = _orbit(c, cover_orbit_length(n), p, orbit)

    def render(i: int) -> Tuple[mpf, mpf]:
        return orb.x(i), orb.error(i)

    return _build_cover(n, render)


def build_model_cover(n: int, params: ModelParams) -> CoverM:
    """The same cover with exact model points y_m as endpoints."""

    def render(i: int) -> Tuple[Fraction, Fraction]:
        return y_value(i, params), Fraction(0)

    return _build_cover(n, render)


def gap_partner(index: Any) -> int:
    """
    The orbit index at the other end of the gap bounded by x_index.

      ... + u(n) + u(n+2), at least three terms -> ... + u(n+1)
      u(n) + u(n+2)                               -> u(n+1) (n even), u(n+3) (n odd)
      ... + u(m), two or more terms otherwise     -> ... + u(m-1) + u(m+1)
      u(m), m odd                                  -> u(m-1) + u(m+1)
      u(m), m even >= 4                            -> u(m-3) + u(m-1)
    """
    s = index if isinstance(index, FibIndexSet) else FibIndexSet.from_int(int(index))
    if not s.is_finite:
        raise DomainError(f"gap endpoints are finite sums, got {s}")
    idx = s.indices
    value = s.value
    if value in (0, 1, 2):
        raise DomainError(f"x_{value} does not bound a gap")
    if len(idx) >= 2 and idx[-1] == idx[-2] + 2:
        n = idx[-2]
        prefix = sum(_u(i) for i in idx[:-2])
        if len(idx) >= 3:
            return prefix + _u(n + 1)
        return _u(n + 1) if n % 2 == 0 else _u(n + 3)
    if len(idx) >= 2:
        m = idx[-1]
        prefix = sum(_u(i) for i in idx[:-1])
        return prefix + _u(m - 1) + _u(m + 1)
    m = idx[0]
    if m % 2 == 1:
        return _u(m - 1) + _u(m + 1)
    return _u(m - 3) + _u(m - 1)


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingReport:
    d: Dict[int, float]
    lambdas: Dict[int, float]
    ratios: Dict[int, float]
    a_estimates: Dict[int, float]
    a_differences: Dict[int, float]
    a: float
    window: Tuple[int, int]
    slope_fit: LinearFit
    sup_lambda: float
    sup_lambda_pair: float
    measure: Dict[int, float] = field(default_factory=dict)
    measure_fit: Optional[LinearFit] = None
    measure_q: Optional[float] = None
    exponent_fit: Optional[LinearFit] = None
    recursion_ratios: Dict[int, float] = field(default_factory=dict)
    subinterval_ratios: Dict[int, float] = field(default_factory=dict)

    @property
    def slope(self) -> float:
        return self.slope_fit.slope

    @property
    def beta(self) -> Optional[float]:
        return None if self.exponent_fit is None else self.exponent_fit.slope

    @property
    def gamma(self) -> Optional[float]:
        return None if self.exponent_fit is None else self.exponent_fit.intercept

    @property
    def residuals(self) -> Tuple[float, ...]:
        return self.slope_fit.residuals

    def rows(self) -> List[Dict[str, Any]]:
        out = []
        for n in sorted(self.d):
            out.append(
                {
                    "n": n,
                    "d_n": self.d[n],
                    "lambda_n": self.lambdas.get(n),
                    "ratio": self.ratios.get(n),
                    "a_n": self.a_estimates.get(n),
                    "measure": self.measure.get(n),
                    "recursion_ratio": self.recursion_ratios.get(n),
                    "subinterval_ratio": self.subinterval_ratios.get(n),
                }
            )
        return out


def closest_distances(orb: OrbitRecord, N: int) -> Dict[int, mpf]:
    """d_n = |x_u(n)| for n = 1..N."""
    return {n: abs(orb.x(fib(n))) for n in range(1, N + 1)}


def scaling_report(
    c: Any,
    N: int,
    p: int,
    *,
    window: Optional[Tuple[int, int]] = None,
    orbit: Optional[OrbitRecord] = None,
    with_measure: bool = True,
    measure_depth: Optional[int] = None,
    c_depth: Optional[int] = None,
) -> ScalingReport:
    """
    λ_n = d_n / d_{n-1} for n = 2..N with the fits built on them.

    The measure of M^n needs the orbit through u(n+2), so covers stop at
    `measure_depth` (default N, and never deeper than c_depth - 2).  A level
    where d_n fails to decrease raises StructuralError.
    """
    if N < 4:
        raise DomainError(f"scaling needs N >= 4, got {N}")
    depth = parameter_depth(c, c_depth)
    if depth is not None and N > depth:
        raise PrecisionError(
            f"c resolves closest returns through level {depth} only, {N} requested",
            index=fib(N),
        )
    top = N if measure_depth is None else min(N, measure_depth)
    if depth is not None:
        top = min(top, depth - 2)
    if not with_measure:
        top = 0
    length = max(fib(N), fib(top + 2)) if top >= 1 else fib(N)
    orb = _orbit(c, length, p, orbit)

    with workprec(orb.working_bits):
        dmp = closest_distances(orb, N)
        for n in range(2, N + 1):
            if not (0 < dmp[n] < dmp[n - 1]):
                raise StructuralError(
                    f"d_{n} = {mpmath.nstr(dmp[n], 6)} does not shrink below "
                    f"d_{n - 1} = {mpmath.nstr(dmp[n - 1], 6)}"
                )
        lam_mp = {n: dmp[n] / dmp[n - 1] for n in range(2, N + 1)}
    d = {n: float(v) for n, v in dmp.items()}
    lambdas = {n: float(v) for n, v in lam_mp.items()}
    ratios = {n: lambdas[n + 1] / lambdas[n] for n in range(2, N)}
    a_est = {n: lam * 2.0 ** (n / 3.0) for n, lam in lambdas.items()}
    a_keys = sorted(a_est)
    a_diff = {
        n: abs(a_est[n] - a_est[m]) for m, n in zip(a_keys, a_keys[1:])
    }

    win = window or top_half(sorted(lambdas))
    levels = [n for n in sorted(lambdas) if in_window(n, win)]
    slope_fit = linear_fit(levels, [math.log2(lambdas[n]) for n in levels])
    a = sum(a_est[n] for n in levels) / len(levels)

    exp_levels = [n for n in sorted(d) if in_window(n, win)]
    exponent_fit = linear_fit(
        exp_levels, [-math.log2(d[n]) - n * n / 6.0 for n in exp_levels]
    )

    recursion = {
        n: lambdas[n + 1] ** 2 / (lambdas[n] * lambdas[n - 1])
        for n in range(3, N)
    }

    measure: Dict[int, float] = {}
    sub_ratios: Dict[int, float] = {}
    measure_fit: Optional[LinearFit] = None
    q: Optional[float] = None
    if top >= 1:
        covers = {n: build_cover(c, n, p, orbit=orb, c_depth=depth) for n in range(1, top + 1)}
        measure = {n: float(cv.total_length()) for n, cv in covers.items()}
        for n in range(2, top + 1):
            j = covers[n].find("J", 0).length
            i_prev = covers[n - 1].find("I", 0).length
            sub_ratios[n] = float(j / i_prev) * 2.0 ** (2.0 * (n + 1) / 3.0)
        m_levels = [n for n in sorted(measure) if in_window(n, window or top_half(sorted(measure)))]
        if len(m_levels) >= 2:
            measure_fit = linear_fit(m_levels, [math.log2(measure[n]) for n in m_levels])
            q = 2.0**measure_fit.slope
    elif with_measure:
        logger.warning("c resolves no cover level; measure skipped")

    return ScalingReport(
        d=d,
        lambdas=lambdas,
        ratios=ratios,
        a_estimates=a_est,
        a_differences=a_diff,
        a=a,
        window=win,
        slope_fit=slope_fit,
        sup_lambda=max(lambdas.values()),
        sup_lambda_pair=max(lambdas[n] * lambdas[n + 1] for n in range(2, N)),
        measure=measure,
        measure_fit=measure_fit,
        measure_q=q,
        exponent_fit=exponent_fit,
        recursion_ratios=recursion,
        subinterval_ratios=sub_ratios,
    )


# ---------------------------------------------------------------------------
# derivatives
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReturnDerivativeRow:
    n: int
    derivative: mpf
    ratio: float
    chain_rule_residual: Optional[float]


def return_derivative_ratios(
    c: Any,
    n_range: Iterable[int],
    p: int,
    *,
    orbit: Optional[OrbitRecord] = None,
) -> List[ReturnDerivativeRow]:
    """
    r_n = |(f^{u(n)-1})'(x_1)| * d_{n+1}^2 / d_n, together with the relative
    residual of the chain-rule split
    |(f^{u(n)-1})'(x_1)| = |(f^{u(n-1)-1})'(x_1)| * 2 d_{n-1} * |(f^{u(n-2)-1})'(x_{u(n-1)+1})|.
    """
    ns = sorted(set(n_range))
    if not ns or ns[0] < 2:
        raise DomainError(f"return derivative levels must be >= 2, got {ns[:1]}")
    orb = _orbit(c, fib(ns[-1] + 1), p, orbit)
    rows: List[ReturnDerivativeRow] = []
    with workprec(orb.working_bits):
        for n in ns:
            D = derivative_product(orb, 1, fib(n) - 1).value
            dn = abs(orb.x(fib(n)))
            dn1 = abs(orb.x(fib(n + 1)))
            ratio = D * dn1 * dn1 / dn
            residual: Optional[float] = None
            if n >= 3:
                left = derivative_product(orb, 1, fib(n - 1) - 1).value
                mid = 2 * abs(orb.x(fib(n - 1)))
                right = derivative_product(orb, fib(n - 1) + 1, _u(n - 2) - 1).value
                residual = float(abs(left * mid * right - D) / D)
            rows.append(ReturnDerivativeRow(n, D, float(ratio), residual))
    return rows


@dataclass(frozen=True)
class GrowthFit:
    fit: MultiFit
    horizon: int
    peak_growth: Tuple[Tuple[int, int, float], ...]
    fibonacci_slope: Optional[LinearFit]

    @property
    def slope_m_coeff(self) -> float:
        return self.fit.coefficients[0]

    @property
    def gamma(self) -> float:
        return self.fit.coefficients[1]

    @property
    def delta(self) -> float:
        return self.fit.intercept

    @property
    def residual_bound(self) -> float:
        return self.fit.max_residual


EXPECTED_FIBONACCI_GROWTH = 2 * math.log(2) / (3 * math.log((1 + math.sqrt(5)) / 2))


def _certified_length(c: Any, N: int, c_depth: Optional[int], what: str) -> int:
    """N, cut back to u(depth) when c follows the Fibonacci parameter only that far."""
    depth = parameter_depth(c, c_depth)
    if depth is None or N <= fib(depth):
        return N
    logger.warning(
        "%s cut from n=%d to u(%d)=%d, the horizon c is certified for",
        what, N, depth, fib(depth),
    )
    return fib(depth)


def derivative_growth_fit(
    c: Any,
    N: int,
    p: int,
    *,
    orbit: Optional[OrbitRecord] = None,
    c_depth: Optional[int] = None,
) -> GrowthFit:
    """
    Regress log2 |(f^n)'(x_1)| on (Σ m s_m, Σ s_m) over the Zeckendorf
    digits s_m of n = 1..N.  N is cut at the certified horizon of c.
    """
    N = _certified_length(c, N, c_depth, "growth fit")
    if N < 8:
        raise DomainError(f"growth fit needs N >= 8, got {N}")
    orb = _orbit(c, N, p, orbit)
    logs = log2_derivative_series(orb)[:N]
    X: List[List[float]] = []
    for n in range(1, N + 1):
        idx = zeckendorf(n).indices
        X.append([float(sum(idx)), float(len(idx))])
    fit = multi_fit(X, logs)

    peaks: List[Tuple[int, int, float]] = []
    fib_x: List[float] = []
    fib_y: List[float] = []
    m = 2
    while fib(m) <= N:
        un = fib(m)
        fib_x.append(math.log2(un))
        fib_y.append(logs[un - 1])
        if un - 1 >= 1:
            peaks.append((m, un - 1, logs[un - 2]))
        m += 1
    fib_fit = linear_fit(fib_x[2:], fib_y[2:]) if len(fib_x) >= 4 else None
    return GrowthFit(fit, N, tuple(peaks), fib_fit)


@dataclass(frozen=True)
class SummabilityReport:
    alpha: float
    partial_sums: Tuple[float, ...]
    increments: Tuple[float, ...]
    block_increments: Dict[int, float]
    first_small_index: Optional[int]
    threshold: float
    horizon: int = 0

    @property
    def total(self) -> float:
        return self.partial_sums[-1]


def summability_series(
    c: Any,
    alpha: float,
    N: int,
    p: int,
    *,
    threshold: float = 1e-6,
    orbit: Optional[OrbitRecord] = None,
    c_depth: Optional[int] = None,
    precision_cap: Optional[int] = None,
) -> SummabilityReport:
    """
    Partial sums of |(f^n)'(x_1)|^-alpha for n = 1..N, with N cut at the
    certified horizon of c.  With precision_cap the orbit escalates p.
    """
    if alpha <= 0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    N = _certified_length(c, N, c_depth, "summability series")
    orb = _orbit(c, N, p, orbit, precision_cap)
    logs = log2_derivative_series(orb)[:N]
    increments = [2.0 ** (-alpha * v) for v in logs]
    sums: List[float] = []
    acc = 0.0
    for inc in increments:
        acc += inc
        sums.append(acc)
    first_small = next(
        (n for n, inc in enumerate(increments, start=1) if inc < threshold), None
    )
    blocks: Dict[int, float] = {}
    m = 2
    while fib(m + 1) <= N:
        blocks[m] = sums[fib(m + 1) - 1] - sums[fib(m) - 1]
        m += 1
    return SummabilityReport(
        alpha=alpha,
        partial_sums=tuple(sums),
        increments=tuple(increments),
        block_increments=blocks,
        first_small_index=first_small,
        threshold=threshold,
        horizon=N,
    )


# ---------------------------------------------------------------------------
# dimension
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DimensionPoint:
    n: int
    count: int
    max_length: float
    estimate: float


def dimension_estimate(covers: Sequence[CoverM], start: int = 4) -> List[DimensionPoint]:
    """D_n = log u(n) / (-log max |interval of M^n|) for levels n >= start."""
    out: List[DimensionPoint] = []
    for cover in sorted(covers, key=lambda cv: cv.level):
        if cover.level < start:
            continue
        longest = cover.max_length()
        if isinstance(longest, Fraction):
            log_len = math.log(longest.numerator) - math.log(longest.denominator)
        else:
            log_len = float(mpmath.log(longest))
        if log_len >= 0:
            raise DomainError(f"M^{cover.level} has an interval of length >= 1")
        out.append(
            DimensionPoint(
                cover.level,
                cover.count,
                math.exp(log_len),
                math.log(cover.count) / -log_len,
            )
        )
    return out
