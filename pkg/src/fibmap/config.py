# src/fibmap/config.py
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import os


# Fibonacci quadratic parameter, quoted to 22 digits.
REFERENCE_C = "-1.8705286321646448888906"


def _env_bool(name: str, default: bool = False) -> bool:
    v = os.getenv(name)
    if v is None:
        return default
    v = v.strip().lower()
    return v in ("1", "true", "yes", "y", "on")


def _env_int(name: str, default: int) -> int:
    v = os.getenv(name)
    if v is None or not str(v).strip():
        return default
    try:
        return int(v)
    except ValueError:
        return default


def _env_str(name: str, default: str) -> str:
    v = os.getenv(name)
    if v is None:
        return default
    return v.strip() or default


def _env_fraction(name: str, default: str) -> str:
    v = _env_str(name, default)
    try:
        Fraction(v)
    except (ValueError, ZeroDivisionError):
        return default
    return v


@dataclass(frozen=True)
class FibmapConfig:
    output_root: str = "data/runs"

    # precision schedule (bits)
    precision_bits: int = 512
    precision_cap: int = 2**20

    # search / analysis depths
    depth: int = 16
    target_bits: int = 80
    cell_depth: int = 40

    # model map parameter, kept as an exact rational string
    model_t: str = "1/2"

    write_parquet: bool = False
    log_level: str = "WARNING"

    @property
    def model_t_fraction(self) -> Fraction:
        return Fraction(self.model_t)


def load_config() -> FibmapConfig:
    return FibmapConfig(
        output_root=_env_str("FIBMAP_OUTPUT_ROOT", "data/runs"),
        precision_bits=_env_int("FIBMAP_PRECISION_BITS", 512),
        precision_cap=_env_int("FIBMAP_PRECISION_CAP", 2**20),
        depth=_env_int("FIBMAP_DEPTH", 16),
        target_bits=_env_int("FIBMAP_TARGET_BITS", 80),
        cell_depth=_env_int("FIBMAP_CELL_DEPTH", 40),
        model_t=_env_fraction("FIBMAP_MODEL_T", "1/2"),
        write_parquet=_env_bool("FIBMAP_WRITE_PARQUET", False),
        log_level=_env_str("FIBMAP_LOG_LEVEL", "WARNING").upper(),
    )
