"""
Artifact persistence helpers.

Provides deterministic CSV/JSON writers, SHA-256 checksums and the
per-directory manifest so reruns with the same seed can be compared byte
for byte.
"""

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd

from ..config.settings import settings
from .logger import setup_logger

logger = setup_logger(__name__)

PathLike = Union[str, Path]


def hash_file(path: PathLike) -> str:
    """
    SHA-256 of a file's bytes.

    Args:
        path: File to hash.

    Returns:
        str: Hexadecimal digest.
    """
    digest = hashlib.sha256()
    with open(path, "rb") as fp:
        for block in iter(lambda: fp.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def _to_jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_to_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, float) and not np.isfinite(value):
        # JSON has no infinity; thresholds start at +inf.
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    if isinstance(value, Path):
        return str(value)
    return value


def write_json(path: PathLike, payload: Dict[str, Any]) -> Path:
    """
    Write a JSON document with sorted keys and a trailing newline.

    Args:
        path: Destination file.
        payload: JSON-compatible mapping (numpy scalars and arrays allowed).

    Returns:
        Path: The written path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(_to_jsonable(payload), fp, indent=2, sort_keys=True)
        fp.write("\n")
    return path


def read_json(path: PathLike) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as fp:
        return json.load(fp)


def write_csv(path: PathLike, frame: pd.DataFrame) -> Path:
    """
    Write a DataFrame as CSV with full float precision and no index.

    Args:
        path: Destination file.
        frame: Table to write.

    Returns:
        Path: The written path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=settings.CSV_FLOAT_FORMAT, lineterminator="\n")
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return path


def write_manifest(directory: PathLike, extra: Optional[Dict[str, Any]] = None) -> Path:
    """
    List every file under ``directory`` with its checksum and size.

    The manifest itself is excluded from the listing.

    Args:
        directory: Run directory.
        extra: Additional top-level keys (seed, method, ...).

    Returns:
        Path: Path of the manifest file.
    """
    directory = Path(directory)
    entries = []
    for path in sorted(p for p in directory.rglob("*") if p.is_file()):
        if path.name == settings.MANIFEST_NAME:
            continue
        entries.append({
            "path": path.relative_to(directory).as_posix(),
            "sha256": hash_file(path),
            "bytes": path.stat().st_size,
        })
    payload = {"files": entries}
    if extra:
        payload.update(extra)
    manifest = write_json(directory / settings.MANIFEST_NAME, payload)
    logger.info(f"Manifest lists {len(entries)} artifacts in {directory}")
    return manifest
