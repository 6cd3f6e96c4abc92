# src/fibmap/mp_dynamics.py
"""
Arbitrary-precision orbits with a two-precision certificate.

Every orbit is computed twice, at p and at 2p bits; the 2p points are kept
and |x(p) - x(2p)| is the per-point error used for sign and branch
decisions.  Sign decisions inside the error bound are refused.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import logging
import math
from typing import Any, Callable, List, Optional, Protocol, Sequence, Tuple, Union

import mpmath
from mpmath import mpf, workprec

from .errors import DomainError, PrecisionError, ResolutionError
from .kneading import (
    SYMBOL_J,
    SYMBOL_TMINUS,
    SYMBOL_TPLUS,
    ClassASeq,
    SignSeq,
)

logger = logging.getLogger(__name__)

MIN_PRECISION = 64
LOG10_2 = math.log10(2.0)


def to_mpf(value: Any) -> mpf:
    """Convert str / int / float / Fraction / MPValue to an mpf at the current precision."""
    if isinstance(value, MPValue):
        return +value.value
    if isinstance(value, Fraction):
        return mpf(value.numerator) / mpf(value.denominator)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            fr = Fraction(text)
            return mpf(fr.numerator) / mpf(fr.denominator)
        return mpf(text)
    return mpf(value)


@dataclass(frozen=True)
class MPValue:
    value: mpf
    precision: int

    def __float__(self) -> float:
        return float(self.value)

    def render(self, digits: int) -> str:
        return render(self.value, digits)


def render(value: Any, digits: int) -> str:
    """Decimal string with at most `digits` significant digits."""
    return mpmath.nstr(value, max(1, int(digits)), strip_zeros=False)


@dataclass(frozen=True)
class OrbitRecord:
    """
    Critical orbit x_1..x_N (values from the 2p run).

    `precision` is the base precision p; the stored points carry 2p bits.
    """

    x0: mpf
    points: Tuple[mpf, ...]
    errors: Tuple[mpf, ...]
    certified_digits: Tuple[int, ...]
    precision: int

    def __len__(self) -> int:
        return len(self.points)

    @property
    def working_bits(self) -> int:
        return 2 * self.precision

    def x(self, i: int) -> mpf:
        """x_i with x_0 the starting point."""
        if i == 0:
            return self.x0
        return self.points[i - 1]

    def error(self, i: int) -> mpf:
        if i == 0:
            return mpf(0)
        return self.errors[i - 1]

    def digits(self, i: int) -> int:
        return self.certified_digits[i - 1]

    def value(self, i: int) -> MPValue:
        return MPValue(self.x(i), self.working_bits)


def _digits_for(x: mpf, err: mpf, p: int) -> int:
    cap = int(p * LOG10_2)
    if err == 0:
        return cap
    if x == 0:
        return 0
    d = int(mpmath.floor(mpmath.log10(abs(x) / err)))
    return max(0, min(cap, d))


def _certify(
    low: Sequence[mpf], high: Sequence[mpf], p: int
) -> Tuple[Tuple[mpf, ...], Tuple[int, ...]]:
    with workprec(2 * p):
        errs = tuple(abs(a - b) for a, b in zip(low, high))
        digits = tuple(_digits_for(b, e, p) for b, e in zip(high, errs))
    return errs, digits


def _iterate_quadratic(c: Any, N: int, prec: int) -> List[mpf]:
    with workprec(prec):
        cc = to_mpf(c)
        x = mpf(0)
        out: List[mpf] = []
        for _ in range(N):
            x = x * x + cc
            out.append(x)
    return out


def orbit_quadratic(
    c: Any, N: int, p: int, *, allow_partial: bool = False
) -> OrbitRecord:
    """
    Critical orbit of x -> x^2 + c from x_0 = 0.

    With allow_partial the record is cut before the first point with no
    certified digit instead of raising.
    """
    if N < 1:
        raise DomainError(f"orbit length must be >= 1, got {N}")
    if p < MIN_PRECISION:
        raise DomainError(f"precision must be >= {MIN_PRECISION} bits, got {p}")
    low = _iterate_quadratic(c, N, p)
    high = _iterate_quadratic(c, N, 2 * p)
    errs, digits = _certify(low, high, p)
    for i, d in enumerate(digits, start=1):
        if d == 0:
            if allow_partial:
                logger.debug("orbit certificate exhausted at %d (p=%d)", i, p)
                return OrbitRecord(
                    mpf(0), tuple(high[: i - 1]), errs[: i - 1], digits[: i - 1], p
                )
            raise PrecisionError(
                f"no certified digits at orbit index {i} with p={p} bits",
                index=i,
            )
    return OrbitRecord(mpf(0), tuple(high), errs, digits, p)


def escalating_orbit(c: Any, N: int, p: int, precision_cap: int) -> OrbitRecord:
    """orbit_quadratic, doubling p until every point keeps a certified digit."""
    while True:
        try:
            return orbit_quadratic(c, N, p)
        except PrecisionError as exc:
            if 2 * p > precision_cap:
                raise PrecisionError(
                    f"precision cap {precision_cap} reached at orbit index {exc.index}",
                    index=exc.index,
                ) from exc
            p *= 2
            logger.info("orbit of length %d: precision raised to %d bits", N, p)


def certified_signs(orb: OrbitRecord) -> List[int]:
    """
    Signs of x_1..x_N with 0 for points that are exactly zero in both runs.
    A nonzero point within its error bound raises ResolutionError.
    """
    out: List[int] = []
    for i in range(1, len(orb) + 1):
        x = orb.x(i)
        err = orb.error(i)
        if x == 0 and err == 0:
            out.append(0)
        elif abs(x) <= err:
            raise ResolutionError(
                f"sign of x_{i} not certified (|x| <= {mpmath.nstr(err, 3)})",
                index=i,
            )
        else:
            out.append(1 if x > 0 else -1)
    return out


def itinerary(orb: OrbitRecord) -> SignSeq:
    signs = certified_signs(orb)
    for i, s in enumerate(signs, start=1):
        if s == 0:
            raise ResolutionError(f"x_{i} is the critical point", index=i)
    return SignSeq(tuple(signs))


def derivative_product(orb: OrbitRecord, start: int, count: int) -> MPValue:
    """∏ |2 x_i| for i = start .. start+count-1."""
    if start < 0 or count < 0 or start + count - 1 > len(orb):
        raise DomainError(
            f"derivative window [{start}, {start + count - 1}] outside orbit of length {len(orb)}"
        )
    with workprec(orb.working_bits):
        prod = mpf(1)
        for i in range(start, start + count):
            prod *= abs(2 * orb.x(i))
    return MPValue(prod, orb.working_bits)


def log2_derivative_series(orb: OrbitRecord) -> List[float]:
    """log2 |(f^n)'(x_1)| for n = 1 .. len(orb)."""
    out: List[float] = []
    acc = 0.0
    with workprec(orb.working_bits):
        for i in range(1, len(orb) + 1):
            x = orb.x(i)
            if x == 0:
                raise DomainError(f"orbit hits the critical point at {i}")
            acc += float(mpmath.log(abs(2 * x), 2))
            out.append(acc)
    return out


def poincare_length(a: Any, b: Any, c: Any, d: Any) -> MPValue:
    prec = max(
        [v.precision for v in (a, b, c, d) if isinstance(v, MPValue)] or [mpmath.mp.prec]
    )
    with workprec(prec):
        A, B, C, D = (to_mpf(v) for v in (a, b, c, d))
        if not (A < B < C < D):
            raise DomainError("poincare_length needs a < b < c < d strictly")
        val = mpmath.log((D - B) * (C - A) / ((D - C) * (B - A)))
    return MPValue(val, prec)


# ---------------------------------------------------------------------------
# piecewise (two-interval) maps
# ---------------------------------------------------------------------------


class PiecewiseMap(Protocol):
    component: int

    @property
    def critical_point(self) -> mpf: ...

    def branch_of(self, x: mpf, slack: mpf) -> Optional[str]:
        """'J', 'T' or None when x lies outside both branch domains."""
        ...

    def apply(self, x: mpf) -> mpf: ...

    def derivative(self, x: mpf) -> mpf: ...


@dataclass(frozen=True)
class EscapeReport:
    index: int
    value: mpf

    def __str__(self) -> str:
        return f"x_{self.index} = {mpmath.nstr(self.value, 12)} left the domain"


def _iterate_piecewise(
    fmap: PiecewiseMap, x0: Any, N: int, prec: int
) -> Tuple[List[mpf], List[Optional[str]]]:
    points: List[mpf] = []
    branches: List[Optional[str]] = []
    with workprec(prec):
        slack = mpf(2) ** (-(prec // 2))
        x = to_mpf(x0)
        if fmap.branch_of(x, slack) is None:
            raise DomainError(f"start point {mpmath.nstr(x, 12)} is outside the map domain")
        for _ in range(N):
            x = fmap.apply(x)
            br = fmap.branch_of(x, slack)
            points.append(x)
            branches.append(br)
            if br is None:
                break
    return points, branches


def orbit_piecewise(
    fmap: PiecewiseMap, x0: Any, N: int, p: int
) -> Tuple[OrbitRecord, ClassASeq, Optional[EscapeReport]]:
    """
    Orbit of x0 under a two-interval map with its symbol sequence over
    {J, T+, T-}.  Leaving J ∪ T ends the orbit with an EscapeReport.
    """
    if N < 1:
        raise DomainError(f"orbit length must be >= 1, got {N}")
    if p < MIN_PRECISION:
        raise DomainError(f"precision must be >= {MIN_PRECISION} bits, got {p}")
    low, br_low = _iterate_piecewise(fmap, x0, N, p)
    high, br_high = _iterate_piecewise(fmap, x0, N, 2 * p)

    n = min(len(low), len(high))
    errs, digits = _certify(low[:n], high[:n], p)

    symbols: List[str] = []
    escape: Optional[EscapeReport] = None
    with workprec(2 * p):
        crit = to_mpf(fmap.critical_point)
        for i in range(n):
            if digits[i] == 0:
                raise PrecisionError(
                    f"no certified digits at piecewise orbit index {i + 1} (p={p})",
                    index=i + 1,
                )
            if br_low[i] != br_high[i]:
                raise ResolutionError(
                    f"branch of x_{i + 1} differs between precisions", index=i + 1
                )
            br = br_high[i]
            if br is None:
                escape = EscapeReport(i + 1, high[i])
                n = i
                break
            if br == SYMBOL_J:
                symbols.append(SYMBOL_J)
                continue
            x = high[i]
            if abs(x - crit) <= errs[i]:
                raise ResolutionError(
                    f"x_{i + 1} is not separated from the critical point", index=i + 1
                )
            symbols.append(SYMBOL_TMINUS if x < crit else SYMBOL_TPLUS)

    with workprec(2 * p):
        start = to_mpf(x0)
    orb = OrbitRecord(start, tuple(high[:n]), errs[:n], digits[:n], p)
    return orb, ClassASeq(tuple(symbols), fmap.component), escape
