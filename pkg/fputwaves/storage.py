"""
storage.py

Output directory handling and the CSV/JSON writers. Every file carries its
provenance: the command, its parameters and the package version.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from fputwaves import __version__
from fputwaves.config import settings
from fputwaves.models import RunConfig

logger = logging.getLogger(__name__)


class Storage:
    root: Optional[Path] = None


storage = Storage()


def set_output_dir(path: Optional[str]) -> Path:
    storage.root = Path(path or settings.OUTPUT_DIR)
    return storage.root


def get_output_dir() -> Path:
    root = storage.root or Path(settings.OUTPUT_DIR)
    root.mkdir(parents=True, exist_ok=True)
    return root


def provenance(command: str, params: Dict[str, Any]) -> Dict[str, Any]:
    run = RunConfig(command=command, params=params)
    return {**run.model_dump(), "version": __version__}


def _plain(value):
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "model_dump"):
        return _plain(value.model_dump())
    return value


def write_csv(name: str, frame: pd.DataFrame, meta: Dict[str, Any]) -> Path:
    """`# {provenance}` header line, then the table with full-precision floats."""
    path = get_output_dir() / name
    header = json.dumps(_plain(meta), sort_keys=True, separators=(",", ":"))
    digits = settings.CSV_SIGNIFICANT_DIGITS
    with open(path, "w", newline="") as fh:
        fh.write(f"# {header}\n")
        frame.to_csv(fh, index=False, float_format=f"%.{digits}g", lineterminator="\n")
    logger.info("wrote %s (%d rows)", path, len(frame))
    return path


def write_json(name: str, payload: Dict[str, Any], meta: Dict[str, Any]) -> Path:
    path = get_output_dir() / name
    document = {"provenance": _plain(meta), **_plain(payload)}
    with open(path, "w") as fh:
        json.dump(document, fh, sort_keys=True, indent=2, allow_nan=True)
        fh.write("\n")
    logger.info("wrote %s", path)
    return path


def read_json(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path) as fh:
        return json.load(fh)
