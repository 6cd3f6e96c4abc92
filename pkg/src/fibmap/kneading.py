# src/fibmap/kneading.py
"""
Kneading data for unimodal maps (sign sequences, the kneading series and
its entropy root) and for two-interval maps over the alphabet {J, T+, T-}.

Serialized forms:
  SignSeq      "-++-..."   (sign of x_1, x_2, ...)
  ClassASeq    "JMPJP..."  J, P = T+, M = T-
"""
from __future__ import annotations

from dataclasses import dataclass
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, PrecisionError, ShapeError
from .fib_arith import _u, fib_index, largest_fib_below

logger = logging.getLogger(__name__)

SYMBOL_J = "J"
SYMBOL_TPLUS = "P"
SYMBOL_TMINUS = "M"
CLASS_A_SYMBOLS = (SYMBOL_J, SYMBOL_TPLUS, SYMBOL_TMINUS)


def _sign_char(s: int) -> str:
    return "+" if s > 0 else "-"


# ---------------------------------------------------------------------------
# unimodal signs
# ---------------------------------------------------------------------------


def fib_sign(i: int) -> int:
    if i < 1:
        raise DomainError(f"fib_sign expects i >= 1, got {i}")
    while True:
        n = fib_index(i)
        if n is not None:
            return -1 if ((n + 1) * (n + 2) // 2) % 2 else 1
        i -= _u(largest_fib_below(i))


@dataclass(frozen=True)
class SignSeq:
    signs: Tuple[int, ...]

    def __post_init__(self) -> None:
        bad = [s for s in self.signs if s not in (-1, 1)]
        if bad:
            raise DomainError(f"signs must be +1/-1, got {bad[:3]}")

    def __len__(self) -> int:
        return len(self.signs)

    def at(self, i: int) -> int:
        """Sign of x_i (1-based)."""
        return self.signs[i - 1]

    def to_string(self) -> str:
        return "".join(_sign_char(s) for s in self.signs)

    @classmethod
    def from_string(cls, text: str) -> "SignSeq":
        mapping = {"+": 1, "-": -1}
        try:
            return cls(tuple(mapping[ch] for ch in text.strip()))
        except KeyError as exc:
            raise DomainError(f"unexpected sign character {exc}") from None

    def first_disagreement(self, other: "SignSeq") -> Optional[int]:
        """1-based index of the first differing sign over the common length."""
        for i, (a, b) in enumerate(zip(self.signs, other.signs), start=1):
            if a != b:
                return i
        return None


def fib_signs(length: int) -> SignSeq:
    """sgn(x_1..x_length) of the Fibonacci map, built with the block recursion."""
    if length < 0:
        raise DomainError(f"length must be >= 0, got {length}")
    out: List[int] = [0] * (length + 1)
    n = 1
    for i in range(1, length + 1):
        while _u(n + 1) <= i:
            n += 1
        if _u(n) == i:
            out[i] = -1 if ((n + 1) * (n + 2) // 2) % 2 else 1
        else:
            out[i] = out[i - _u(n)]
    return SignSeq(tuple(out[1:]))


# ---------------------------------------------------------------------------
# kneading series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KneadingSeries:
    """Coefficients ε_0 = 1, ε_1, ..., ε_N."""

    coefficients: Tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.coefficients or self.coefficients[0] != 1:
            raise DomainError("kneading series must start with ε_0 = 1")

    @property
    def horizon(self) -> int:
        return len(self.coefficients) - 1

    def eps(self, i: int) -> int:
        return self.coefficients[i]

    def truncate(self, n: int) -> "KneadingSeries":
        return KneadingSeries(self.coefficients[: n + 1])

    @classmethod
    def from_signs(cls, signs: SignSeq) -> "KneadingSeries":
        coeffs = [1]
        for s in signs.signs:
            coeffs.append(coeffs[-1] * s)
        return cls(tuple(coeffs))

    @classmethod
    def fibonacci(cls, horizon: int) -> "KneadingSeries":
        return cls.from_signs(fib_signs(horizon))

    @classmethod
    def full_map(cls, horizon: int) -> "KneadingSeries":
        """Series of x^2 - 2: every ε_n = -1 for n >= 1."""
        return cls((1,) + (-1,) * horizon)

    def to_string(self) -> str:
        return "".join(_sign_char(s) for s in self.coefficients[1:])


@dataclass(frozen=True)
class AdmissibilityVerdict:
    ok: bool
    horizon: int
    failing_m: Optional[int] = None
    failing_i: Optional[int] = None

    def __bool__(self) -> bool:
        return self.ok


def first_difference(eps: KneadingSeries, m: int) -> Optional[int]:
    """Smallest i with ε_{m+i} != ε_m ε_i inside the horizon, or None."""
    N = eps.horizon
    em = eps.eps(m)
    for i in range(1, N - m + 1):
        if eps.eps(m + i) != em * eps.eps(i):
            return i
    return None


def admissible(eps: KneadingSeries) -> AdmissibilityVerdict:
    """
    Truncated admissibility test: for every 1 <= m < N the first index i
    where ε_{m+i} departs from ε_m ε_i must carry ε_i = -1.

    The verdict only speaks for the checked horizon N.
    """
    N = eps.horizon
    if N < 2:
        raise DomainError(f"admissibility needs horizon >= 2, got {N}")
    for m in range(1, N):
        i = first_difference(eps, m)
        if i is not None and eps.eps(i) != -1:
            return AdmissibilityVerdict(False, N, failing_m=m, failing_i=i)
    return AdmissibilityVerdict(True, N)


@dataclass(frozen=True)
class EntropyEstimate:
    growth_rate: float
    entropy: float
    root: Optional[float]
    horizon: int
    root_doubled: Optional[float]


def _smallest_root(coeffs: Sequence[int], t_max: float, grid: int = 4096) -> Optional[float]:
    # numpy.polyval wants the highest degree first
    poly = np.asarray(coeffs[::-1], dtype=float)
    ts = np.linspace(0.0, t_max, grid + 1)[1:]
    vals = np.polyval(poly, ts)
    change = np.nonzero(np.sign(vals) <= 0)[0]
    if change.size == 0:
        return None
    k = int(change[0])
    if vals[k] == 0.0:
        return float(ts[k])
    lo = 0.0 if k == 0 else float(ts[k - 1])
    hi = float(ts[k])
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if np.polyval(poly, mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def entropy_from_kneading(
    eps: KneadingSeries,
    N: Optional[int] = None,
    tol: float = 1e-10,
) -> EntropyEstimate:
    """
    Growth rate s = 1/r of the smallest root r in (0, 1) of the truncated
    kneading series D(t) = Σ ε_i t^i, and h = log s.

    The root of the degree-N truncation is compared with the degree-2N one;
    disagreement beyond `tol` raises PrecisionError.
    """
    if N is None:
        N = eps.horizon // 2
    if N < 1:
        raise DomainError(f"truncation must be >= 1, got {N}")
    if eps.horizon < 2 * N:
        raise DomainError(
            f"series horizon {eps.horizon} is shorter than 2N = {2 * N}"
        )

    t_max = 0.999
    r1 = _smallest_root(eps.coefficients[: N + 1], t_max)
    r2 = _smallest_root(eps.coefficients[: 2 * N + 1], t_max)
    logger.debug("kneading roots N=%d: %s, 2N: %s", N, r1, r2)

    if (r1 is None) != (r2 is None) or (
        r1 is not None and r2 is not None and abs(1.0 / r1 - 1.0 / r2) > tol
    ):
        raise PrecisionError(
            f"kneading root not stable at N={N}: {r1} vs {r2}",
            index=N,
            estimates={"root_N": r1, "root_2N": r2},
        )
    if r1 is None:
        return EntropyEstimate(1.0, 0.0, None, N, None)
    s = 1.0 / r2
    return EntropyEstimate(s, math.log(s), r2, N, r1)


# ---------------------------------------------------------------------------
# two-interval (class A) sequences
# ---------------------------------------------------------------------------


def _flip(sym: str) -> str:
    if sym == SYMBOL_TPLUS:
        return SYMBOL_TMINUS
    if sym == SYMBOL_TMINUS:
        return SYMBOL_TPLUS
    return sym


def _signed_t(sign: int) -> str:
    return SYMBOL_TPLUS if sign > 0 else SYMBOL_TMINUS


def _t_sign(sym: str) -> int:
    return 1 if sym == SYMBOL_TPLUS else -1


@dataclass(frozen=True)
class ClassASeq:
    symbols: Tuple[str, ...]
    component: int

    def __post_init__(self) -> None:
        if self.component not in (-1, 1):
            raise DomainError(f"component must be +1/-1, got {self.component}")
        bad = [s for s in self.symbols if s not in CLASS_A_SYMBOLS]
        if bad:
            raise DomainError(f"unknown class-A symbols: {bad[:3]}")

    def __len__(self) -> int:
        return len(self.symbols)

    def at(self, i: int) -> str:
        return self.symbols[i - 1]

    def to_string(self) -> str:
        return "".join(self.symbols)

    @classmethod
    def from_string(cls, text: str, component: int) -> "ClassASeq":
        return cls(tuple(text.strip()), component)

    def first_disagreement(self, other: "ClassASeq") -> Optional[int]:
        for i, (a, b) in enumerate(zip(self.symbols, other.symbols), start=1):
            if a != b:
                return i
        return None


def fib_classA(component: int, L: int) -> ClassASeq:
    """
    Length-L prefix of fib^±.  The block u(n)+1 .. u(n+1) copies the prefix
    of length u(n-1) with its final T flipped.
    """
    if component not in (-1, 1):
        raise DomainError(f"component must be +1/-1, got {component}")
    if L < 1:
        raise DomainError(f"length must be >= 1, got {L}")
    if component > 0:
        seq = [SYMBOL_J, SYMBOL_TMINUS, SYMBOL_TPLUS]
    else:
        seq = [SYMBOL_J, SYMBOL_TPLUS, SYMBOL_TPLUS]
    n = 3
    while len(seq) < L:
        block = seq[: _u(n - 1)]
        block[-1] = _flip(block[-1])
        seq.extend(block)
        n += 1
    return ClassASeq(tuple(seq[:L]), component)


def _is_fib_prefix(seq: ClassASeq) -> bool:
    ref = fib_classA(seq.component, len(seq))
    return ref.symbols == seq.symbols


def renormalize_kneading(
    seq: ClassASeq, lookahead: Optional[str] = None
) -> ClassASeq:
    """
    Symbolic renormalization, one left-to-right pass:
      J                 -> deleted
      T_s followed by J -> T_{k s}   (k = component of seq)
      T_s followed by T -> J
    The output lives in the opposite component.

    The final symbol needs one symbol of lookahead: an explicit `lookahead`
    wins, a fib^k prefix uses its own continuation, and otherwise a trailing
    T is dropped.
    """
    syms = seq.symbols
    if len(syms) < 2 or syms[0] != SYMBOL_J or syms[1] == SYMBOL_J:
        raise ShapeError(
            f"sequence must start with J T_s to renormalize: {seq.to_string()[:12]!r}"
        )
    if lookahead is None and _is_fib_prefix(seq):
        lookahead = fib_classA(seq.component, len(syms) + 1).symbols[-1]

    k = seq.component
    out: List[str] = []
    for pos, sym in enumerate(syms):
        if sym == SYMBOL_J:
            continue
        nxt = syms[pos + 1] if pos + 1 < len(syms) else lookahead
        if nxt is None:
            break
        if nxt == SYMBOL_J:
            out.append(_signed_t(k * _t_sign(sym)))
        else:
            out.append(SYMBOL_J)
    return ClassASeq(tuple(out), -k)
