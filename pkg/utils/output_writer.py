"""Deterministic JSON/CSV artifacts written atomically"""
import csv
import io
import json
import logging
import math
import os
import tempfile
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np
from pydantic import BaseModel

logger = logging.getLogger(__name__)


def to_jsonable(value: Any) -> Any:
    """
    Convert numpy scalars/arrays, complex numbers and pydantic models to
    plain JSON types. Complex values become {"re": ..., "im": ...}.
    """
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump(by_alias=True, exclude_none=False))
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def render_json(payload: Any) -> str:
    """
    Serialize with sorted keys and shortest round-trip floats

    Raises:
        ValueError: If the payload holds nan or inf
    """
    return json.dumps(to_jsonable(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"Non-finite value {value} in CSV output")
        return repr(value)
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def render_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Header row plus one line per row; floats use repr and '.' decimals"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"Row has {len(row)} cells, expected {len(columns)}")
        writer.writerow([_format_cell(cell) for cell in row])
    return buffer.getvalue()


def resolve_output(path: Optional[str]) -> Optional[Path]:
    """Relative paths are placed under SL2C_OUTPUT_DIR when it is set"""
    if path is None:
        return None
    target = Path(path)
    base = os.getenv("SL2C_OUTPUT_DIR")
    if base and not target.is_absolute():
        target = Path(base) / target
    return target


def write_atomic(text: str, path: Path) -> Path:
    """Write to a temporary file in the target directory, then rename"""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except Exception:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.info(f"Wrote {path}")
    return path
