"""CSV and JSON emission of series, spectra and reports."""

import json
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from src import __version__
from src.shared.config import settings
from src.shared.models import SurvivalSeries

logger = logging.getLogger(__name__)


def _jsonable(value: Any) -> Any:
    """json.dumps fallback for numpy scalars/arrays, complex numbers and enums."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.ndarray):
        return [_jsonable(item) for item in value.tolist()] if np.iscomplexobj(value) else value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dumps(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n"


def series_frame(series: SurvivalSeries) -> pd.DataFrame:
    """Columns t, survival, absorbed_L, absorbed_R[, absorbed_S]."""
    frame = pd.DataFrame({
        "t": np.arange(series.steps + 1),
        "survival": series.survival,
    })
    for label in ("L", "R", "S"):
        if label in series.labels:
            frame[f"absorbed_{label}"] = series.channel_flux(label)
    return frame


def sidecar_path(path: Path) -> Path:
    return path.with_name(path.stem + ".meta.json")


def write_table(frame: pd.DataFrame, path: Path) -> Path:
    """Write a table with '.' decimals and 17 significant digits."""
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=settings.csv_float_format, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def write_json(payload: Dict[str, Any], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(payload), encoding="utf-8")
    logger.info(f"Wrote report to {path}")
    return path


def write_result(
    frame: pd.DataFrame,
    metadata: Dict[str, Any],
    path: Path,
    fmt: str = "csv"
) -> Path:
    """
    Emit a table with its run metadata.

    CSV output gets a ``<stem>.meta.json`` sidecar; JSON output embeds the
    metadata next to the columns.
    """
    metadata = {**metadata, "version": __version__}
    if fmt == "json":
        return write_json({"metadata": metadata, "data": frame.to_dict(orient="list")}, path)
    write_table(frame, path)
    write_json(metadata, sidecar_path(path))
    return path


def default_output(command: str, stem: str, fmt: str, output: Optional[str]) -> Path:
    """Explicit output path, or one under the configured output directory."""
    if output:
        return Path(output)
    return Path(settings.output_dir) / f"{command}_{stem}.{fmt}"
