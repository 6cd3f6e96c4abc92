# src/fibmap/fitting.py
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from sklearn.linear_model import LinearRegression
from sklearn.metrics import r2_score

from .errors import DomainError


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r2: float
    residuals: Tuple[float, ...]

    @property
    def max_residual(self) -> float:
        return max((abs(r) for r in self.residuals), default=0.0)

    def predict(self, x: float) -> float:
        return self.slope * x + self.intercept


@dataclass(frozen=True)
class MultiFit:
    coefficients: Tuple[float, ...]
    intercept: float
    r2: float
    residuals: Tuple[float, ...]

    @property
    def max_residual(self) -> float:
        return max((abs(r) for r in self.residuals), default=0.0)


def _r2(y: np.ndarray, pred: np.ndarray) -> float:
    # r2 is undefined for a constant target
    if len(y) < 2 or float(np.ptp(y)) == 0.0:
        return 1.0 if np.allclose(y, pred) else 0.0
    return float(r2_score(y, pred))


def linear_fit(x: Sequence[float], y: Sequence[float]) -> LinearFit:
    """Ordinary least squares y ~ slope * x + intercept."""
    xa = np.asarray(x, dtype=float).reshape(-1, 1)
    ya = np.asarray(y, dtype=float)
    if len(ya) < 2 or len(xa) != len(ya):
        raise DomainError(f"linear fit needs >= 2 paired points, got {len(xa)}/{len(ya)}")
    model = LinearRegression().fit(xa, ya)
    pred = model.predict(xa)
    return LinearFit(
        slope=float(model.coef_[0]),
        intercept=float(model.intercept_),
        r2=_r2(ya, pred),
        residuals=tuple(float(r) for r in ya - pred),
    )


def multi_fit(X: Sequence[Sequence[float]], y: Sequence[float]) -> MultiFit:
    Xa = np.asarray(X, dtype=float)
    ya = np.asarray(y, dtype=float)
    if Xa.ndim != 2 or len(Xa) != len(ya) or len(ya) <= Xa.shape[1]:
        raise DomainError(
            f"multi fit needs more rows than columns, got shape {Xa.shape} for {len(ya)} targets"
        )
    model = LinearRegression().fit(Xa, ya)
    pred = model.predict(Xa)
    return MultiFit(
        coefficients=tuple(float(c) for c in model.coef_),
        intercept=float(model.intercept_),
        r2=_r2(ya, pred),
        residuals=tuple(float(r) for r in ya - pred),
    )


def top_half(levels: Sequence[int]) -> Tuple[int, int]:
    """Window covering the upper half of a sorted list of levels."""
    if not levels:
        raise DomainError("empty level list")
    lo, hi = min(levels), max(levels)
    return (hi - (hi - lo) // 2, hi)


def in_window(n: int, window: Optional[Tuple[int, int]]) -> bool:
    return window is None or window[0] <= n <= window[1]
