# src/fibmap/fib_arith.py
"""
Fibonacci numeration: u(1)=1, u(2)=2, u(n+1)=u(n)+u(n-1).

Points of the Fibonacci shift are stored as FibIndexSet values: a finite
set of non-consecutive indices plus an optional period-2 tail
u(a)+u(a+2)+u(a+4)+... starting at index `a`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

from .errors import DomainError, UnsupportedRepresentationError


_FIB: List[int] = [0, 1, 1, 2]  # u(-1), u(0), u(1), u(2)


def _u(n: int) -> int:
    """u(n) for n >= -1, using the backward extension u(0)=1, u(-1)=0."""
    if n < -1:
        raise DomainError(f"Fibonacci index out of range: {n}")
    while len(_FIB) <= n + 1:
        _FIB.append(_FIB[-1] + _FIB[-2])
    return _FIB[n + 1]


def fib(n: int) -> int:
    if n < 1:
        raise DomainError(f"fib expects n >= 1, got {n}")
    return _u(n)


def fib_index(value: int) -> Optional[int]:
    """Return n with u(n) == value, or None when value is not a Fibonacci number."""
    if value < 1:
        return None
    n = 1
    while _u(n) < value:
        n += 1
    return n if _u(n) == value else None


def largest_fib_below(i: int) -> int:
    """Largest n with u(n) < i (requires i >= 2)."""
    if i < 2:
        raise DomainError(f"no Fibonacci number below {i}")
    n = 1
    while _u(n + 1) < i:
        n += 1
    return n


@dataclass(frozen=True)
class FibIndexSet:
    indices: Tuple[int, ...] = ()
    tail: Optional[int] = None

    def __post_init__(self) -> None:
        idx = tuple(int(i) for i in self.indices)
        for i in idx:
            if i < 1:
                raise DomainError(f"Fibonacci indices start at 1, got {i}")
        for a, b in zip(idx, idx[1:]):
            if b < a + 2:
                raise DomainError(
                    f"indices must be increasing with gaps >= 2: {idx}"
                )
        tail = self.tail
        if tail is not None:
            tail = int(tail)
            if tail < 1:
                raise DomainError(f"tail must start at index >= 1, got {tail}")
            if idx and idx[-1] > tail - 2:
                raise DomainError(
                    f"prefix {idx} overlaps the tail starting at {tail}"
                )
            # fold u(a-2) + tail(a) into tail(a-2)
            while idx and idx[-1] == tail - 2:
                tail = idx[-1]
                idx = idx[:-1]
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "tail", tail)

    @classmethod
    def from_int(cls, m: int) -> "FibIndexSet":
        if m < 0:
            raise DomainError(f"cannot encode a negative integer: {m}")
        if m == 0:
            return cls()
        return zeckendorf(m)

    @classmethod
    def from_word(cls, word: str) -> "FibIndexSet":
        """Finite point from a 0/1 word a_1 a_2 ... a_k."""
        if "11" in word or set(word) - {"0", "1"}:
            raise DomainError(f"not an admissible Fibonacci word: {word!r}")
        return cls(tuple(i + 1 for i, ch in enumerate(word) if ch == "1"))

    @property
    def is_finite(self) -> bool:
        return self.tail is None

    @property
    def is_empty(self) -> bool:
        return not self.indices and self.tail is None

    @property
    def leading(self) -> Optional[int]:
        if self.indices:
            return self.indices[0]
        return self.tail

    @property
    def value(self) -> int:
        if self.tail is not None:
            raise UnsupportedRepresentationError(
                f"infinite Fibonacci sum has no integer value: {self}"
            )
        return sum(_u(i) for i in self.indices)

    def terms(self, limit: int) -> List[int]:
        """The first `limit` summand indices (expanding the tail if any)."""
        out = list(self.indices[:limit])
        if self.tail is not None:
            k = self.tail
            while len(out) < limit:
                out.append(k)
                k += 2
        return out

    def contains(self, i: int) -> bool:
        if i in self.indices:
            return True
        return self.tail is not None and i >= self.tail and (i - self.tail) % 2 == 0

    def __str__(self) -> str:
        parts = [f"u({i})" for i in self.indices]
        if self.tail is not None:
            parts.append(f"u({self.tail})+u({self.tail + 2})+...")
        return "+".join(parts) if parts else "0"


def zeckendorf(m: int) -> FibIndexSet:
    if m < 1:
        raise DomainError(f"zeckendorf expects m >= 1, got {m}")
    n = 1
    while _u(n + 1) <= m:
        n += 1
    out: List[int] = []
    rest = m
    while rest > 0:
        while _u(n) > rest:
            n -= 1
        out.append(n)
        rest -= _u(n)
        n -= 2
    return FibIndexSet(tuple(reversed(out)))


def successor(s: FibIndexSet) -> FibIndexSet:
    if s.tail is None:
        return FibIndexSet.from_int(s.value + 1)
    if not s.indices and s.tail in (1, 2):
        # the two maximal sequences wrap to zero
        return FibIndexSet()
    prefix = FibIndexSet(s.indices)
    bumped = FibIndexSet.from_int(prefix.value + 1)
    return FibIndexSet(bumped.indices, s.tail)


def sigma_shift(s: FibIndexSet) -> FibIndexSet:
    tail = None if s.tail is None else s.tail + 1
    return FibIndexSet(tuple(i + 1 for i in s.indices), tail)


def sigma_power(m: int, n: int) -> int:
    """σ^n applied to the integer m (σ^n(0) = 0)."""
    s = FibIndexSet.from_int(m)
    for _ in range(n):
        s = sigma_shift(s)
    return s.value


def epsilon(m: int) -> int:
    if m < 1:
        raise DomainError(f"epsilon expects m >= 1, got {m}")
    return -1 if len(zeckendorf(m).indices) % 2 else 1


def enumerate_cylinders(k: int) -> List[str]:
    """All length-k 0/1 words with no two consecutive ones, in lexicographic order."""
    if k < 1:
        raise DomainError(f"cylinder length must be >= 1, got {k}")
    words = [""]
    for _ in range(k):
        nxt: List[str] = []
        for w in words:
            nxt.append(w + "0")
            if not w.endswith("1"):
                nxt.append(w + "1")
        words = nxt
    return sorted(words)


def cylinder_word(s: FibIndexSet, k: int) -> str:
    return "".join("1" if s.contains(i) else "0" for i in range(1, k + 1))


def decode(indices: Iterable[int]) -> int:
    return FibIndexSet(tuple(indices)).value
