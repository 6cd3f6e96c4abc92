# src/fibmap/model_map.py
"""
Exact piecewise-linear model F of the Fibonacci map on [y_1, y_2].

Everything here is exact: rationals via fractions.Fraction and the
quadratic field Q(√5) via QuadSurd.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import math
from typing import List, Optional, Tuple, Union

from .errors import DepthError, DomainError
from .fib_arith import FibIndexSet

Rational = Union[int, Fraction]
IndexLike = Union[int, FibIndexSet]


def _as_fraction(x: Rational) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class QuadSurd:
    """a + b√5 with rational a, b."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", _as_fraction(self.a))
        object.__setattr__(self, "b", _as_fraction(self.b))

    @staticmethod
    def _lift(other: "QuadSurd | Rational") -> "QuadSurd":
        if isinstance(other, QuadSurd):
            return other
        return QuadSurd(_as_fraction(other), Fraction(0))

    def __add__(self, other: "QuadSurd | Rational") -> "QuadSurd":
        o = self._lift(other)
        return QuadSurd(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self) -> "QuadSurd":
        return QuadSurd(-self.a, -self.b)

    def __sub__(self, other: "QuadSurd | Rational") -> "QuadSurd":
        return self + (-self._lift(other))

    def __rsub__(self, other: "QuadSurd | Rational") -> "QuadSurd":
        return self._lift(other) - self

    def __mul__(self, other: "QuadSurd | Rational") -> "QuadSurd":
        o = self._lift(other)
        return QuadSurd(self.a * o.a + 5 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def conjugate(self) -> "QuadSurd":
        return QuadSurd(self.a, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a - 5 * self.b * self.b

    def inverse(self) -> "QuadSurd":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("QuadSurd division by zero")
        c = self.conjugate()
        return QuadSurd(c.a / n, c.b / n)

    def __truediv__(self, other: "QuadSurd | Rational") -> "QuadSurd":
        return self * self._lift(other).inverse()

    def __rtruediv__(self, other: "QuadSurd | Rational") -> "QuadSurd":
        return self._lift(other) * self.inverse()

    def __pow__(self, k: int) -> "QuadSurd":
        if k < 0:
            return self.inverse() ** (-k)
        result = QuadSurd(Fraction(1))
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == 0 or sb == 0 or sa == sb:
            return sa or sb
        # opposite signs: compare a^2 with 5 b^2
        d = self.a * self.a - 5 * self.b * self.b
        return sa if d > 0 else -sa

    def __lt__(self, other: "QuadSurd | Rational") -> bool:
        return (self - other).sign() < 0

    def __le__(self, other: "QuadSurd | Rational") -> bool:
        return (self - other).sign() <= 0

    def __gt__(self, other: "QuadSurd | Rational") -> bool:
        return (self - other).sign() > 0

    def __ge__(self, other: "QuadSurd | Rational") -> bool:
        return (self - other).sign() >= 0

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(5.0)

    def is_integer(self) -> bool:
        return self.b == 0 and self.a.denominator == 1

    def floor(self) -> int:
        g = math.floor(float(self))
        while (self - g).sign() < 0:
            g -= 1
        while (self - (g + 1)).sign() >= 0:
            g += 1
        return g

    def mod1(self) -> "QuadSurd":
        return self - self.floor()

    def __str__(self) -> str:
        return f"{self.a} + {self.b}*sqrt5"


GAMMA = QuadSurd(Fraction(1, 2), Fraction(-1, 2))


@dataclass(frozen=True)
class ModelParams:
    t: Fraction = Fraction(1, 2)

    def __post_init__(self) -> None:
        t = _as_fraction(self.t)
        object.__setattr__(self, "t", t)
        if not (t > 0 and t * t + t < 1):
            raise DomainError(f"model parameter needs 0 < t and t^2 + t < 1, got {t}")


def _as_index_set(m: IndexLike) -> FibIndexSet:
    if isinstance(m, FibIndexSet):
        return m
    return FibIndexSet.from_int(int(m))


def _leading_sign(n1: int) -> int:
    return -1 if n1 % 4 in (0, 1) else 1


def y_value(m: IndexLike, p: ModelParams) -> Fraction:
    """y_m = ±(t^n1 - t^n2 + ...), negative when n1 = 0, 1 (mod 4)."""
    s = _as_index_set(m)
    lead = s.leading
    if lead is None:
        return Fraction(0)
    t = p.t
    total = Fraction(0)
    sgn = 1
    for i in s.indices:
        total += sgn * t**i
        sgn = -sgn
    if s.tail is not None:
        total += sgn * t**s.tail / (1 + t * t)
    return _leading_sign(lead) * total


def zero_preimages(p: ModelParams) -> Tuple[Fraction, Fraction]:
    """The two limit points whose image is 0: y of u(1)+u(3)+... and u(2)+u(4)+..."""
    t = p.t
    return (-t / (1 + t * t), t * t / (1 + t * t))


@dataclass(frozen=True)
class ModelCell:
    """F(y) = slope*y + offset on [lo, hi]."""

    n: int
    lo: Fraction
    hi: Fraction
    slope: int
    offset: Fraction

    def contains(self, x: Fraction) -> bool:
        return self.lo <= x <= self.hi

    def apply(self, x: Fraction) -> Fraction:
        return self.slope * x + self.offset


@lru_cache(maxsize=4096)
def _cell(n: int, t: Fraction) -> ModelCell:
    if n == 0:
        return ModelCell(0, -(t**4), Fraction(0), -1, -t)
    if n == 1:
        return ModelCell(1, Fraction(0), t**3, 1, -t)
    s_n = -1 if n % 4 in (0, 1) else 1
    if n % 2 == 0:
        P = sum((-1) ** j * t ** (2 * j + 1) for j in range(n // 2))
        e1 = -P
        e2 = -P - (-1) ** (n // 2) * t ** (n + 2)
        return ModelCell(n, min(e1, e2), max(e1, e2), -1, s_n * t**n - P)
    P = sum((-1) ** j * t ** (2 * j + 2) for j in range((n - 1) // 2))
    e1 = P
    e2 = P + (-1) ** ((n - 1) // 2) * t ** (n + 2)
    return ModelCell(n, min(e1, e2), max(e1, e2), 1, s_n * t**n - P)


def model_cells(p: ModelParams, depth: int) -> List[ModelCell]:
    return [_cell(n, p.t) for n in range(depth + 1)]


@dataclass(frozen=True)
class ModelGap:
    n: int
    lo: Fraction
    hi: Fraction
    f_lo: Fraction
    f_hi: Fraction

    @property
    def slope(self) -> Fraction:
        return (self.f_hi - self.f_lo) / (self.hi - self.lo)

    def apply(self, x: Fraction) -> Fraction:
        return self.f_lo + self.slope * (x - self.lo)


@lru_cache(maxsize=4096)
def _gap(n: int, t: Fraction) -> ModelGap:
    a = _cell(n, t)
    b = _cell(n + 4, t)
    if a.hi < b.lo:
        lo, hi, left, right = a.hi, b.lo, a, b
    else:
        lo, hi, left, right = b.hi, a.lo, b, a
    return ModelGap(n, lo, hi, left.apply(lo), right.apply(hi))


def gap_slope(n: int, p: ModelParams) -> Fraction:
    """Slope of F across the gap between A_n and A_{n+4}."""
    if n < 0:
        raise DomainError(f"gap index must be >= 0, got {n}")
    return _gap(n, p.t).slope


def eval_F(x: Rational, p: ModelParams, depth: int = 40) -> Fraction:
    x = _as_fraction(x)
    t = p.t
    if x < -t or x > t * t:
        raise DomainError(f"{x} lies outside [y_1, y_2] = [{-t}, {t * t}]")
    if x in zero_preimages(p):
        return Fraction(0)
    for n in range(depth + 1):
        cell = _cell(n, t)
        if cell.contains(x):
            return cell.apply(x)
        gap = _gap(n, t)
        if gap.lo < x < gap.hi:
            return gap.apply(x)
    raise DepthError(
        f"{x} is not resolved by the first {depth + 1} cells; raise the cell depth"
    )


def order_compare(m1: IndexLike, m2: IndexLike) -> int:
    """
    Sign of y_{m1} - y_{m2}, decided from the index sets alone.

    Leading summands order the points along
    y_{1+..} < y_{5+..} < y_{8+..} < ... < 0 < ... < y_{3+..} < y_{2+..};
    after k common summands a missing or larger next index means larger
    |y| for odd k and smaller |y| for even k.
    """
    s1 = _as_index_set(m1)
    s2 = _as_index_set(m2)
    if s1 == s2:
        return 0
    l1, l2 = s1.leading, s2.leading
    if l1 is None or l2 is None:
        return -_leading_sign(l2) if l1 is None else _leading_sign(l1)
    g1, g2 = _leading_sign(l1), _leading_sign(l2)
    if g1 != g2:
        return 1 if g1 > g2 else -1
    if l1 != l2:
        # negative side: deeper leading index is closer to 0, hence larger
        larger = l1 > l2 if g1 < 0 else l1 < l2
        return 1 if larger else -1

    span = max(len(s1.indices), len(s2.indices)) + 2
    t1 = s1.terms(span)
    t2 = s2.terms(span)
    k = 0
    while k < span and k < len(t1) and k < len(t2) and t1[k] == t2[k]:
        k += 1
    j1 = t1[k] if k < len(t1) else None
    j2 = t2[k] if k < len(t2) else None
    if j1 == j2:
        return 0
    if j1 is None:
        bigger_magnitude = True
    elif j2 is None:
        bigger_magnitude = False
    else:
        bigger_magnitude = j1 > j2
    if k % 2 == 0:
        bigger_magnitude = not bigger_magnitude
    return g1 if bigger_magnitude else -g1


def phi_raw(mu: IndexLike) -> QuadSurd:
    """γ(γ^n1 + γ^n2 + ...) before reduction mod 1."""
    s = _as_index_set(mu)
    total = QuadSurd()
    for i in s.indices:
        total = total + GAMMA**i
    if s.tail is not None:
        # γ^a / (1 - γ^2) = -γ^(a-1)
        total = total - GAMMA ** (s.tail - 1)
    return GAMMA * total


def phi(mu: IndexLike) -> QuadSurd:
    return phi_raw(mu).mod1()
