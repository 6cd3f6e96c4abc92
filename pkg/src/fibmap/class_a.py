# src/fibmap/class_a.py
"""
Maps of type (2,1): a diffeomorphic branch on J and a unimodal branch on T.

Covers the explicit two-branch family, the restriction of a quadratic
Fibonacci map to two intervals, numeric renormalization towers and the
geometry comparison across the family.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import mpmath
from mpmath import mpf, workprec

from .errors import (
    ConstructionError,
    DomainError,
    PrecisionError,
    ResolutionError,
    SearchError,
    ShapeError,
)
from .fib_arith import _u, fib, sigma_power
from .kneading import (
    SYMBOL_J,
    SYMBOL_TMINUS,
    SYMBOL_TPLUS,
    ClassASeq,
    fib_classA,
)
from .mp_dynamics import (
    MIN_PRECISION,
    OrbitRecord,
    orbit_piecewise,
    orbit_quadratic,
    to_mpf,
)

logger = logging.getLogger(__name__)

J_LEFT = "J-left"
J_RIGHT = "J-right"
SYMBOL_T = "T"


def _fmt(x: Any, digits: int = 30) -> str:
    return mpmath.nstr(x, digits)


@dataclass(frozen=True)
class Interval:
    lo: mpf
    hi: mpf

    @classmethod
    def hull(cls, a: Any, b: Any) -> "Interval":
        return cls(min(a, b), max(a, b))

    @property
    def length(self) -> mpf:
        return self.hi - self.lo

    @property
    def mid(self) -> mpf:
        return (self.lo + self.hi) / 2

    def contains(self, x: Any, slack: Any = 0) -> bool:
        return self.lo - slack <= x <= self.hi + slack

    def distance(self, x: Any) -> mpf:
        if x < self.lo:
            return self.lo - x
        if x > self.hi:
            return x - self.hi
        return mpf(0)

    def includes(self, other: "Interval", tol: Any = 0) -> bool:
        return self.lo - tol <= other.lo and other.hi <= self.hi + tol

    def to_list(self, digits: int = 30) -> List[str]:
        return [_fmt(self.lo, digits), _fmt(self.hi, digits)]


# ---------------------------------------------------------------------------
# class A maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassAMap:
    """
    f(x) = q (x - x0)^2 - c0                    on T
    f(x) = j_quad x^2 + alpha_lin x + b_lin     on J
    """

    J: Interval
    T: Interval
    q: mpf
    c0: mpf
    x0: mpf
    alpha_lin: mpf
    b_lin: mpf
    j_quad: mpf = mpf(0)
    component: int = 1
    arrangement: str = J_LEFT
    precision: int = 256

    def __post_init__(self) -> None:
        if self.arrangement == J_LEFT and not self.J.hi < self.T.lo:
            raise ConstructionError(
                f"branch domains overlap: J ends at {_fmt(self.J.hi, 12)}, "
                f"T starts at {_fmt(self.T.lo, 12)}"
            )
        if self.arrangement == J_RIGHT and not self.T.hi < self.J.lo:
            raise ConstructionError("branch domains overlap (J right of T)")
        if not self.T.lo < self.x0 < self.T.hi:
            raise ConstructionError("critical point must be interior to T")
        if self.q == 0:
            raise ConstructionError("T branch must be quadratic (q != 0)")
        d_lo = self._j_derivative(self.J.lo)
        d_hi = self._j_derivative(self.J.hi)
        if d_lo == 0 or d_hi == 0 or (d_lo > 0) != (d_hi > 0):
            raise ConstructionError("J branch is not a diffeomorphism on J")
        sign = 1 if d_lo > 0 else -1
        if sign != self.component:
            raise ConstructionError(
                f"component {self.component} disagrees with the J-branch orientation {sign}"
            )

    @property
    def critical_point(self) -> mpf:
        return self.x0

    def _j_derivative(self, x: mpf) -> mpf:
        return 2 * self.j_quad * x + self.alpha_lin

    def _on_j_side(self, x: mpf) -> bool:
        if self.arrangement == J_LEFT:
            return x < (self.J.hi + self.T.lo) / 2
        return x > (self.T.hi + self.J.lo) / 2

    def branch_of(self, x: mpf, slack: mpf) -> Optional[str]:
        if self.J.contains(x, slack):
            return SYMBOL_J
        if self.T.contains(x, slack):
            return SYMBOL_T
        return None

    def apply(self, x: mpf) -> mpf:
        if self._on_j_side(x):
            return (self.j_quad * x + self.alpha_lin) * x + self.b_lin
        d = x - self.x0
        return self.q * d * d - self.c0

    def derivative(self, x: mpf) -> mpf:
        if self._on_j_side(x):
            return self._j_derivative(x)
        return 2 * self.q * (x - self.x0)

    def iterate(self, x: mpf, k: int) -> mpf:
        for _ in range(k):
            x = self.apply(x)
        return x

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "class_a",
            "J": self.J.to_list(),
            "T": self.T.to_list(),
            "T_branch": {"q": _fmt(self.q), "c0": _fmt(self.c0), "x0": _fmt(self.x0)},
            "J_branch": {
                "j_quad": _fmt(self.j_quad),
                "alpha_lin": _fmt(self.alpha_lin),
                "b_lin": _fmt(self.b_lin),
            },
            "component": self.component,
            "arrangement": self.arrangement,
            "precision": self.precision,
        }


def two_branch_example(c: Any, lam: Any, v: Any, precision: int = 256) -> ClassAMap:
    """
    T = [-1, λ] with f = q x^2 - c, q = c + λ;
    J = [-c, -c + q λ^2] with f = α x + b, α = (1 + v)/(q λ^2), b = α c - 1.

    The critical orbit starts 0 -> -c -> -1 -> λ -> -c + qλ^2 -> v.
    """
    with workprec(precision):
        cc, ll, vv = to_mpf(c), to_mpf(lam), to_mpf(v)
        if cc <= 1 or ll <= 0:
            raise ConstructionError(f"need c > 1 and λ > 0, got c={c}, λ={lam}")
        if 1 + vv <= 0:
            raise ConstructionError(f"J branch must preserve orientation, got v={v}")
        q = cc + ll
        if q * ll * ll >= cc - 1:
            raise ConstructionError(
                f"J = [-c, -c + qλ^2] overlaps T = [-1, λ] for c={c}, λ={lam}"
            )
        alpha = (1 + vv) / (q * ll * ll)
        return ClassAMap(
            J=Interval(-cc, -cc + q * ll * ll),
            T=Interval(mpf(-1), ll),
            q=q,
            c0=cc,
            x0=mpf(0),
            alpha_lin=alpha,
            b_lin=alpha * cc - 1,
            component=1,
            arrangement=J_LEFT,
            precision=precision,
        )


def class_a_orbit(fmap: Any, N: int, p: int):
    """Critical orbit and kneading of a class A map or tower level."""
    return orbit_piecewise(fmap, fmap.critical_point, N, p)


# ---------------------------------------------------------------------------
# tuning the free parameter
# ---------------------------------------------------------------------------

_SYMBOL_ORDINAL_J_LEFT = {SYMBOL_J: 1.0, SYMBOL_TMINUS: 3.0, SYMBOL_TPLUS: 4.0}


def _region_ordinal(fmap: ClassAMap, x: mpf, err: mpf, slack: mpf) -> float:
    """
    Position of x along the line: escape-left 0, J 1, gap 2, T- 3,
    critical point 3.5, T+ 4, escape-right 5.
    """
    if fmap.J.contains(x, slack):
        return 1.0
    if fmap.T.contains(x, slack):
        if abs(x - fmap.x0) <= slack:
            return 3.5
        if abs(x - fmap.x0) <= err:
            raise ResolutionError("orbit point not separated from the critical point")
        return 3.0 if x < fmap.x0 else 4.0
    if x < fmap.J.lo:
        return 0.0
    if x > fmap.T.hi:
        return 5.0
    return 2.0


@dataclass(frozen=True)
class VInterval:
    lo: mpf
    hi: mpf
    v: mpf
    c: mpf
    lam: mpf
    depth: int
    precision: int
    iterations: int
    kneading: str

    @property
    def width(self) -> mpf:
        return self.hi - self.lo


def _tune_direction(fmap: ClassAMap, target: ClassASeq, p: int) -> Tuple[int, Optional[int]]:
    """
    Twisted first-difference comparison of the critical itinerary with the
    target: +1 means v should decrease, -1 increase, 0 a full match.
    """
    N = len(target)
    runs: List[List[mpf]] = []
    for prec in (p, 2 * p):
        with workprec(prec):
            slack = mpf(2) ** (-(prec // 2))
            x = fmap.x0
            pts: List[mpf] = []
            for _ in range(N):
                x = fmap.apply(x)
                pts.append(x)
                if fmap.branch_of(x, slack) is None:
                    break
            runs.append(pts)
    low, high = runs
    with workprec(2 * p):
        slack = mpf(2) ** (-(p // 2))
        twist = 1
        for i in range(1, N + 1):
            if i > len(high) or i > len(low):
                raise ResolutionError(f"escape at {i} not certified", index=i)
            x = high[i - 1]
            err = abs(high[i - 1] - low[i - 1])
            region = _region_ordinal(fmap, x, err, slack)
            want = _SYMBOL_ORDINAL_J_LEFT[target.at(i)]
            if region != want:
                raw = 1 if region > want else -1
                return raw * twist, i
            if i >= 5:
                twist *= fmap.component if region == 1.0 else (1 if region > 3.5 else -1)
    return 0, None


def tune_v(
    c: Any,
    lam: Any,
    N: int,
    p: int = 256,
    *,
    precision_cap: int = 2**16,
    max_iter: Optional[int] = None,
) -> VInterval:
    """Bisect v in [0, λ] until the two-branch example realizes fib^+ through u(N)."""
    if N < 4:
        raise DomainError(f"tuning depth must be >= 4, got {N}")
    if p < MIN_PRECISION:
        raise DomainError(f"precision must be >= {MIN_PRECISION} bits, got {p}")
    target = fib_classA(1, fib(N))
    work = 2 * p + 64

    with workprec(work):
        cc, ll = to_mpf(c), to_mpf(lam)
    two_branch_example(cc, ll, 0, work)

    def direction(v: mpf) -> Tuple[int, Optional[int]]:
        nonlocal p, work
        while True:
            try:
                fmap = two_branch_example(cc, ll, v, work)
                return _tune_direction(fmap, target, p)
            except ResolutionError as exc:
                if 2 * p > precision_cap:
                    raise PrecisionError(
                        f"precision cap {precision_cap} reached while tuning", index=exc.index
                    ) from exc
                p *= 2
                work = 2 * p + 64
                logger.debug("tune_v: precision raised to %d bits", p)

    lo, hi = mpf(0), ll
    d_lo, _ = direction(lo)
    d_hi, _ = direction(hi)
    if d_lo >= 0 or d_hi <= 0:
        raise SearchError(
            f"no sign change of the kneading comparison over v in [0, {lam}] "
            f"(directions {d_lo}, {d_hi})"
        )

    limit = max_iter or (work - 16)
    for it in range(1, limit + 1):
        with workprec(work):
            mid = (lo + hi) / 2
        d, idx = direction(mid)
        logger.debug("tune_v step %d: direction %d at %s", it, d, idx)
        if d == 0:
            fmap = two_branch_example(cc, ll, mid, work)
            _, seq, _ = class_a_orbit(fmap, fib(N), p)
            logger.info("tune_v matched fib+ through u(%d) after %d steps", N, it)
            return VInterval(lo, hi, mid, cc, ll, N, p, it, seq.to_string())
        if d > 0:
            hi = mid
        else:
            lo = mid
        with workprec(work):
            if hi - lo <= mpf(2) ** (-(work - 8)):
                break
    raise SearchError(
        f"bisection on v collapsed without matching fib+ through u({N})"
    )


# ---------------------------------------------------------------------------
# surgery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SurgeryRestriction:
    c: mpf
    T_domain: Interval
    J_domain: Interval
    fmap: ClassAMap
    component: int
    orbit_stays: bool
    checked_horizon: int
    first_exit: Optional[int] = None

    @property
    def rule(self) -> str:
        return "evaluate the quadratic x^2 + c on both intervals"


def surgery_from_unimodal(
    c: Any, p: int, *, horizon_level: int = 10, orbit: Optional[OrbitRecord] = None
) -> SurgeryRestriction:
    """
    Restrict x^2 + c to [x5, x2] ∪ [x1, x4].

    `T_domain` and `J_domain` are the restriction itself and `orbit_stays`
    is checked against them.  The returned ClassAMap differs on T: its T
    piece is [-|x3|, x2], wider than [x5, x2], so that the first
    renormalization finds T_1 = [-|x3|, |x3|].  Both pieces keep the quadratic.
    """
    horizon = fib(horizon_level)
    orb = orbit if orbit is not None and len(orbit) >= horizon else orbit_quadratic(c, max(horizon, 5), p)
    with workprec(orb.working_bits):
        x1, x2, x3, x4, x5 = (orb.x(i) for i in range(1, 6))
        if not (x1 < x4 < x5 < x2):
            raise ShapeError("critical orbit does not satisfy x1 < x4 < x5 < x2")
        if not (x1 < 0 < x2):
            raise ShapeError("x1 and x2 must lie on opposite sides of 0")
        T_dom = Interval(x5, x2)
        J_dom = Interval(x1, x4)
        cc = to_mpf(c)
        fmap = ClassAMap(
            J=J_dom,
            T=Interval(-abs(x3), x2),
            q=mpf(1),
            c0=-cc,
            x0=mpf(0),
            alpha_lin=mpf(0),
            b_lin=cc,
            j_quad=mpf(1),
            component=-1,
            arrangement=J_LEFT,
            precision=orb.working_bits,
        )
        slack = mpf(2) ** (-(orb.precision // 2))
        first_exit = None
        for i in range(1, horizon + 1):
            x = orb.x(i)
            if not (T_dom.contains(x, slack) or J_dom.contains(x, slack)):
                first_exit = i
                break
    return SurgeryRestriction(
        c=cc,
        T_domain=T_dom,
        J_domain=J_dom,
        fmap=fmap,
        component=-1,
        orbit_stays=first_exit is None,
        checked_horizon=horizon,
        first_exit=first_exit,
    )


# ---------------------------------------------------------------------------
# renormalization
# ---------------------------------------------------------------------------


def fib_intervals(orb: OrbitRecord, k: int, x0: Any = 0) -> Tuple[Interval, Interval]:
    """T^k = [[x_u(k), x_u(k)']] and J^k = [x_u(k-1), x_{u(k-1)+u(k+1)}]."""
    if k < 1:
        raise DomainError(f"level must be >= 1, got {k}")
    with workprec(orb.working_bits):
        z = to_mpf(x0)
        xt = orb.x(fib(k))
        T = Interval.hull(xt, 2 * z - xt)
        a = _u(k - 1)
        J = Interval.hull(orb.x(a), orb.x(a + fib(k + 1)))
    return T, J


@dataclass(frozen=True)
class InclusionCheck:
    ok: bool
    details: Tuple[Tuple[str, bool], ...]


@dataclass(frozen=True)
class RenormalizedMap:
    """
    Level-n return map in base coordinates: f^t_iter on T, f^j_iter on J,
    viewed through the affine chart that sends `image` onto [-1, 1].
    """

    base: ClassAMap
    level: int
    T: Interval
    J: Interval
    t_iter: int
    j_iter: int
    image: Interval
    sigma: int
    component: int
    precision: int
    inclusions: Optional[InclusionCheck] = None

    # affine chart -------------------------------------------------------
    def to_normal(self, x: mpf) -> mpf:
        return self.sigma * (x - self.image.mid) * 2 / self.image.length

    def from_normal(self, y: mpf) -> mpf:
        return self.image.mid + self.sigma * y * self.image.length / 2

    @property
    def rescale(self) -> Tuple[mpf, mpf, int]:
        """(center, half-width, sign) of the chart."""
        return self.image.mid, self.image.length / 2, self.sigma

    # PiecewiseMap in normalized coordinates ------------------------------
    @property
    def critical_point(self) -> mpf:
        return self.to_normal(self.base.x0)

    def branch_of(self, y: mpf, slack: mpf) -> Optional[str]:
        x = self.from_normal(y)
        s = slack * self.image.length / 2
        if self.J.contains(x, s):
            return SYMBOL_J
        if self.T.contains(x, s):
            return SYMBOL_T
        return None

    def _base_steps(self, x: mpf) -> int:
        return self.t_iter if self.T.distance(x) <= self.J.distance(x) else self.j_iter

    def apply_base(self, x: mpf) -> mpf:
        return self.base.iterate(x, self._base_steps(x))

    def apply(self, y: mpf) -> mpf:
        return self.to_normal(self.apply_base(self.from_normal(y)))

    def derivative(self, y: mpf) -> mpf:
        x = self.from_normal(y)
        d = mpf(1)
        for _ in range(self._base_steps(x)):
            d *= self.base.derivative(x)
            x = self.base.apply(x)
        return d

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": "renormalized",
            "level": self.level,
            "T": self.T.to_list(),
            "J": self.J.to_list(),
            "t_iter": self.t_iter,
            "j_iter": self.j_iter,
            "rescale": {
                "image": self.image.to_list(),
                "sigma": self.sigma,
            },
            "component": self.component,
            "inclusions_ok": None if self.inclusions is None else self.inclusions.ok,
        }


def _boundary(pred, inside: mpf, outside: mpf, steps: int) -> mpf:
    """Point between inside (pred true) and outside (pred false)."""
    if pred(outside):
        return outside
    a, b = inside, outside
    for _ in range(steps):
        m = (a + b) / 2
        if m == a or m == b:
            break
        if pred(m):
            a = m
        else:
            b = m
    return a


@dataclass(frozen=True)
class _Located:
    T: Interval
    J: Interval
    sigma: int
    component: int


def _locate(
    base: ClassAMap, T: Interval, J: Interval, t: int, j: int, prec: int
) -> _Located:
    with workprec(prec):
        slack = mpf(2) ** (-(prec // 2))
        x0 = base.x0
        y1 = base.iterate(x0, t)
        if not J.contains(y1, slack):
            raise ShapeError("critical value of the return map is not in J")
        y2 = base.iterate(y1, j)
        if not T.contains(y2, slack):
            raise ShapeError("second return of the critical point is not in T")

        def in_T_return(x: mpf) -> bool:
            z = base.iterate(x, t)
            return J.contains(z, slack) and T.contains(base.iterate(z, j), slack)

        def in_J_return(x: mpf) -> bool:
            return T.contains(base.iterate(x, t), slack)

        steps = prec // 2
        T_new = Interval(
            _boundary(in_T_return, x0, T.lo, steps),
            _boundary(in_T_return, x0, T.hi, steps),
        )
        if not in_J_return(y2):
            raise ShapeError("x_2 does not return to T under the T branch")
        if y2 > x0:
            J_new = Interval(
                _boundary(in_J_return, y2, x0, steps),
                _boundary(in_J_return, y2, T.hi, steps),
            )
        else:
            J_new = Interval(
                _boundary(in_J_return, y2, T.lo, steps),
                _boundary(in_J_return, y2, x0, steps),
            )

        d = mpf(1)
        x = J_new.mid
        for _ in range(t):
            d *= base.derivative(x)
            x = base.apply(x)
        component = 1 if d > 0 else -1

        delta = T_new.length / 4
        g0 = base.iterate(base.iterate(x0, t), j)
        g1 = base.iterate(base.iterate(x0 + delta, t), j)
        sigma = 1 if g1 > g0 else -1
    return _Located(T_new, J_new, sigma, component)


def _check_inclusions(
    level: int, T_n: Interval, J_n: Interval, orb: OrbitRecord, x0: mpf, tol: mpf
) -> InclusionCheck:
    T_next, _ = fib_intervals(orb, level + 1, x0)
    T_next2, J_next2 = fib_intervals(orb, level + 2, x0)
    details = (
        ("T^{n+2} in T_n", T_n.includes(T_next2, tol)),
        ("T_n in T^{n+1}", T_next.includes(T_n, tol)),
        ("J^{n+2} in J_n", J_n.includes(J_next2, tol)),
    )
    return InclusionCheck(all(ok for _, ok in details), details)


def inclusion_orbit_length(level: int) -> int:
    return _u(level + 1) + fib(level + 3)


def renormalize_numeric(
    m: Union[ClassAMap, RenormalizedMap],
    p: int,
    *,
    base_orbit: Optional[OrbitRecord] = None,
) -> RenormalizedMap:
    """
    One renormalization step.  T_{n+1} is the component of the critical point
    in {x in T_n : f^t(x) in J_n, f^{t+j}(x) in T_n}; J_{n+1} is the
    component of x_2 in {x in T_n : f^t(x) in T_n}.  Counts become
    (t + j, t), the component flips sign and the chart sends T_n to [-1, 1]
    with the critical point a minimum.
    """
    if isinstance(m, ClassAMap):
        base, level, T, J, t, j = m, 0, m.T, m.J, 1, 1
    else:
        base, level, T, J, t, j = m.base, m.level, m.T, m.J, m.t_iter, m.j_iter

    low = _locate(base, T, J, t, j, p)
    high = _locate(base, T, J, t, j, 2 * p)
    with workprec(2 * p):
        tol = mpf(2) ** (-(p // 4)) * max(T.length, mpf(1) / 2**32)
        for a, b, name in (
            (low.T.lo, high.T.lo, "T.lo"),
            (low.T.hi, high.T.hi, "T.hi"),
            (low.J.lo, high.J.lo, "J.lo"),
            (low.J.hi, high.J.hi, "J.hi"),
        ):
            if abs(a - b) > tol:
                raise PrecisionError(
                    f"{name} of level {level + 1} not located at p={p}", index=level + 1
                )
    if low.sigma != high.sigma or low.component != high.component:
        raise PrecisionError("orientation of the return map not certified", index=level + 1)

    new_level = level + 1
    inclusions: Optional[InclusionCheck] = None
    need = inclusion_orbit_length(new_level)
    orb = base_orbit
    if orb is None or len(orb) < need:
        try:
            orb, _, escape = class_a_orbit(base, need, p)
        except PrecisionError:
            orb, escape = None, None
        if escape is not None:
            orb = None
    if orb is not None and len(orb) >= need:
        with workprec(2 * p):
            inclusions = _check_inclusions(
                new_level, high.T, high.J, orb, base.x0, mpf(2) ** (-(p // 4))
            )

    logger.debug(
        "level %d: T=%s J=%s component=%d", new_level, high.T.to_list(12), high.J.to_list(12), high.component
    )
    return RenormalizedMap(
        base=base,
        level=new_level,
        T=high.T,
        J=high.J,
        t_iter=t + j,
        j_iter=t,
        image=T,
        sigma=high.sigma,
        component=high.component,
        precision=2 * p,
        inclusions=inclusions,
    )


def renormalization_tower(
    fmap: ClassAMap, levels: int, p: int, *, base_orbit: Optional[OrbitRecord] = None
) -> List[RenormalizedMap]:
    out: List[RenormalizedMap] = []
    cur: Union[ClassAMap, RenormalizedMap] = fmap
    for _ in range(levels):
        cur = renormalize_numeric(cur, p, base_orbit=base_orbit)
        out.append(cur)
    return out


@dataclass(frozen=True)
class IndexLawRow:
    level: int
    m: int
    index: int
    residual: float


def index_law_check(
    tower: Sequence[RenormalizedMap],
    m_max: int = 30,
    base_orbit: Optional[OrbitRecord] = None,
) -> List[IndexLawRow]:
    """Compare (f_n)^m(x0) with x_{σ^n(m)} of the base orbit, in base coordinates."""
    rows: List[IndexLawRow] = []
    if not tower:
        return rows
    if base_orbit is None:
        need = max(sigma_power(m_max, lm.level) for lm in tower)
        base = tower[0].base
        base_orbit, _, _ = class_a_orbit(base, need, max(MIN_PRECISION, tower[0].precision // 2))
    for level_map in tower:
        n = level_map.level
        with workprec(level_map.precision):
            x = level_map.base.x0
            for m in range(1, m_max + 1):
                x = level_map.apply_base(x)
                idx = sigma_power(m, n)
                if idx > len(base_orbit):
                    break
                rows.append(
                    IndexLawRow(n, m, idx, float(abs(x - base_orbit.x(idx))))
                )
    return rows


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------


def lambda_sequence(fmap: Any, N: int, p: int) -> Dict[int, float]:
    """λ_n = d_n / d_{n-1} with d_n = |x_u(n) - x0| along the critical orbit."""
    orb, _, escape = class_a_orbit(fmap, fib(N), p)
    if escape is not None:
        raise ShapeError(f"critical orbit escapes before u({N}): {escape}")
    with workprec(orb.working_bits):
        x0 = to_mpf(fmap.critical_point)
        d = {n: abs(orb.x(fib(n)) - x0) for n in range(1, N + 1)}
        return {n: float(d[n] / d[n - 1]) for n in range(2, N + 1)}


@dataclass(frozen=True)
class GeometryRow:
    c: float
    lam: float
    v: float
    lambda0: float
    a_estimate: float
    a_ratio: float
    reference_level: int
    lambdas: Dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class GeometryReport:
    rows: Tuple[GeometryRow, ...]
    depth: int

    @property
    def a_decreasing_in_c(self) -> bool:
        ordered = sorted(self.rows, key=lambda r: r.c)
        return all(a.a_estimate > b.a_estimate for a, b in zip(ordered, ordered[1:]))

    @property
    def expected_ratio(self) -> float:
        return 2.0 ** (-1.0 / 3.0)


DEFAULT_GEOMETRY_PARAMS: Tuple[Tuple[float, float], ...] = (
    (10, 0.05),
    (20, 0.025),
    (40, 0.0125),
)


def geometry_experiment(
    params: Sequence[Tuple[Any, Any]] = DEFAULT_GEOMETRY_PARAMS,
    N: int = 10,
    p: int = 256,
) -> GeometryReport:
    """
    Tune each (c, λ) example, then compare a_n = λ_n 2^{n/3} across the
    family and across one renormalization.
    """
    rows: List[GeometryRow] = []
    ref = max(3, N - 2)
    for c, lam in params:
        tuned = tune_v(c, lam, N, p)
        fmap = two_branch_example(c, lam, tuned.v, 2 * tuned.precision + 64)
        lambdas = lambda_sequence(fmap, N, tuned.precision)
        orb, _, _ = class_a_orbit(fmap, 2, tuned.precision)
        with workprec(orb.working_bits):
            lambda0 = float(abs(orb.x(2) - fmap.x0) / abs(orb.x(1) - fmap.x0))
        a_f = {n: lam_n * 2.0 ** (n / 3.0) for n, lam_n in lambdas.items()}

        level1 = renormalize_numeric(fmap, tuned.precision)
        lambdas_r = lambda_sequence(level1, N - 1, tuned.precision)
        a_r = {n: lam_n * 2.0 ** (n / 3.0) for n, lam_n in lambdas_r.items()}
        ratio = a_r[ref] / a_f[ref] if ref in a_r else float("nan")

        rows.append(
            GeometryRow(
                c=float(c),
                lam=float(lam),
                v=float(tuned.v),
                lambda0=lambda0,
                a_estimate=a_f[ref],
                a_ratio=ratio,
                reference_level=ref,
                lambdas=lambdas,
            )
        )
        logger.info("geometry c=%s: a=%.6g ratio=%.4f", c, a_f[ref], ratio)
    return GeometryReport(tuple(rows), N)
