# src/fibmap/errors.py
from __future__ import annotations

from typing import Any, Dict, Optional


class FibmapError(Exception):
    """Base class for every error raised by the fibmap package."""


class DomainError(FibmapError, ValueError):
    pass


class UnsupportedRepresentationError(FibmapError, ValueError):
    pass


class PrecisionError(FibmapError, ArithmeticError):
    """
    Two-precision certification ran out of agreeing digits.

    `index` names the first orbit index (or truncation horizon) that could
    not be certified; `estimates` carries competing values when a
    stabilization check failed.
    """

    def __init__(
        self,
        message: str,
        *,
        index: Optional[int] = None,
        estimates: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message)
        self.index = index
        self.estimates = dict(estimates or {})


class ResolutionError(PrecisionError):
    """A sign or branch decision fell inside the certified error bound."""


class DepthError(FibmapError, ValueError):
    pass


class ShapeError(FibmapError, ValueError):
    pass


class StructuralError(FibmapError, RuntimeError):
    pass


class SearchError(FibmapError, RuntimeError):
    pass


class ConstructionError(FibmapError, ValueError):
    pass
