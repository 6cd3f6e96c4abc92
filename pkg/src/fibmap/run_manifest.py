# src/fibmap/run_manifest.py
from __future__ import annotations

from dataclasses import asdict, dataclass, field
import platform
from typing import Any, Dict, List


MANIFEST_VERSION = 1


def library_versions() -> Dict[str, str]:
    import mpmath
    import numpy
    import pandas

    return {
        "python": platform.python_version(),
        "mpmath": mpmath.__version__,
        "numpy": numpy.__version__,
        "pandas": pandas.__version__,
    }


@dataclass
class RunManifest:
    manifest_version: int = MANIFEST_VERSION
    created_utc: str = ""

    subcommand: str = ""
    argv: List[str] = field(default_factory=list)
    parameters: Dict[str, Any] = field(default_factory=dict)
    precision_schedule: Dict[str, Any] = field(default_factory=dict)
    depths: Dict[str, Any] = field(default_factory=dict)
    versions: Dict[str, str] = field(default_factory=dict)

    # relative path -> sha256
    outputs: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def csv_outputs(self) -> Dict[str, str]:
        return {k: v for k, v in self.outputs.items() if k.endswith(".csv")}


def run_manifest_from_dict(data: Dict[str, Any]) -> RunManifest:
    payload = dict(data or {})
    known = set(RunManifest.__dataclass_fields__)
    payload = {k: v for k, v in payload.items() if k in known}
    payload["argv"] = [str(a) for a in payload.get("argv", []) or []]
    payload["outputs"] = {
        str(k): str(v) for k, v in (payload.get("outputs") or {}).items()
    }
    return RunManifest(**payload)
