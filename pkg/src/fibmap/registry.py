# src/fibmap/registry.py
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
import json
import os
import platform
import re
import subprocess
import uuid
from typing import Any, Dict, Optional

REPO_ROOT = Path(__file__).resolve().parents[2]
RUN_SUBDIRS = ("tables", "maps")


def utc_now_iso() -> str:
    """Second-resolution UTC stamp used in run.json and every manifest."""
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z")


def git_revision(cwd: Path = REPO_ROOT) -> Optional[str]:
    """Short commit of the checkout, with a `+dirty` mark for local edits."""
    def git(*argv: str) -> str:
        return subprocess.run(
            ["git", *argv], cwd=cwd, capture_output=True, text=True, check=True
        ).stdout.strip()

    try:
        rev = git("rev-parse", "--short=10", "HEAD")
        dirty = bool(git("status", "--porcelain", "--untracked-files=no"))
    except (OSError, subprocess.CalledProcessError):
        return None
    if not rev:
        return None
    return f"{rev}+dirty" if dirty else rev


def run_alias_slug(alias: str, max_len: int = 40) -> str:
    """Lower-case word chars only: 'Find C' -> 'find_c'."""
    words = re.findall(r"[a-z0-9]+", alias.lower())
    return "_".join(words)[:max_len].rstrip("_")


def fibmap_env() -> Dict[str, Optional[str]]:
    return {k: v for k, v in sorted(os.environ.items()) if k.startswith("FIBMAP_")}


@dataclass(frozen=True)
class RunRegistry:
    run_id: str
    run_dir: Path
    created_utc: str
    meta: Dict[str, Any]

    @property
    def tables_dir(self) -> Path:
        return self.run_dir / "tables"

    @property
    def maps_dir(self) -> Path:
        return self.run_dir / "maps"


def create_run(
    output_root: str | Path,
    run_alias: Optional[str] = None,
    metadata: Optional[Dict[str, Any]] = None,
) -> RunRegistry:
    """
    Creates <output_root>/<YYYYmmdd_HHMMSS>_<alias>_<suffix>/ holding run.json,
    tables/ and maps/. The random suffix keeps same-second runs apart.
    """
    root = Path(output_root)
    root.mkdir(parents=True, exist_ok=True)

    stamp = datetime.now(timezone.utc).strftime("%Y%m%d_%H%M%S")
    parts = [stamp, run_alias_slug(run_alias or ""), uuid.uuid4().hex[:6]]
    run_id = "_".join(part for part in parts if part)

    run_dir = root / run_id
    run_dir.mkdir(parents=True, exist_ok=False)
    for name in RUN_SUBDIRS:
        (run_dir / name).mkdir()

    meta: Dict[str, Any] = {
        "run_id": run_id,
        "created_utc": utc_now_iso(),
        "run_alias": run_alias or None,
        "git_commit": git_revision(),
        "python": platform.python_version(),
        "platform": platform.platform(),
        "hostname": platform.node(),
        "env": fibmap_env(),
        **(metadata or {}),
    }
    (run_dir / "run.json").write_text(json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8")
    return RunRegistry(run_id=run_id, run_dir=run_dir, created_utc=meta["created_utc"], meta=meta)
