# src/fibmap/export.py
from __future__ import annotations

from pathlib import Path
import hashlib
import json
import logging
from typing import Any, Dict, Optional

import pandas as pd

from .registry import utc_now_iso

logger = logging.getLogger(__name__)


def write_json(path: Path, obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True, default=str)
    return path


def read_json(path: Path) -> Any:
    with Path(path).open("r", encoding="utf-8") as f:
        return json.load(f)


def file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_table(
    run_dir: Path,
    name: str,
    frame: pd.DataFrame,
    *,
    write_parquet: bool = False,
    overwrite: bool = False,
) -> Dict[str, Optional[Path]]:
    """
    Writes tables/<name>.csv and, when enabled and pyarrow is importable,
    tables/<name>.parquet.
    """
    tables = Path(run_dir) / "tables"
    tables.mkdir(parents=True, exist_ok=True)
    csv_path = tables / f"{name}.csv"
    if csv_path.exists() and not overwrite:
        raise FileExistsError(f"Table already exists: {csv_path}")

    frame.to_csv(csv_path, index=False)

    parquet_path: Optional[Path] = None
    if write_parquet:
        try:
            parquet_path = tables / f"{name}.parquet"
            frame.to_parquet(parquet_path, index=False)
        except Exception as exc:
            logger.warning("parquet export of %s skipped: %s", name, exc)
            parquet_path = None

    return {"csv": csv_path, "parquet": parquet_path}


def update_manifest(run_dir: Path, entry: Dict[str, Any], *, section: str) -> None:
    """Append an entry to manifest.json under `section`."""
    run_dir = Path(run_dir)
    mpath = run_dir / "manifest.json"
    manifest: Any = {}
    if mpath.exists():
        try:
            manifest = read_json(mpath)
        except Exception:
            manifest = {}
    if not isinstance(manifest, dict):
        manifest = {}

    manifest.setdefault("run_id", run_dir.name)
    manifest.setdefault("created_utc", utc_now_iso())
    manifest["updated_utc"] = utc_now_iso()
    if not isinstance(manifest.get(section), list):
        manifest[section] = []
    manifest[section].append(entry)

    write_json(mpath, manifest)


def digest_outputs(run_dir: Path) -> Dict[str, str]:
    """sha256 of every file under tables/ and maps/, keyed by relative path."""
    run_dir = Path(run_dir)
    out: Dict[str, str] = {}
    for sub in ("tables", "maps"):
        base = run_dir / sub
        if not base.exists():
            continue
        for path in sorted(base.rglob("*")):
            if path.is_file():
                out[path.relative_to(run_dir).as_posix()] = file_digest(path)
    return out
