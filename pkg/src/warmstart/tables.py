"""CSV and metadata emission with a strict determinism contract.

Every table is one comment line (`# seed=..., git=..., config=..., time=...`),
one header row, then data rows. The comment carries the timestamp and is the
only nondeterministic line: identical inputs give byte-identical bodies.
Floats are written with repr so they round-trip bit-exactly. NaN or Inf in
any cell aborts the write (numeric failure); absent optional values are
written as empty cells.
"""
from __future__ import annotations

import datetime
import json
import subprocess
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import NumericFailure, ValidationError

ABSENT = ""


def git_revision() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            capture_output=True,
            text=True,
            timeout=5,
        )
    except OSError:
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 and out.stdout.strip() else "unknown"


def format_cell(value) -> str:
    if value is None:
        return ABSENT
    if isinstance(value, str):
        if "," in value or "\n" in value:
            raise ValidationError(f"cell text may not contain separators: {value!r}")
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if not np.isfinite(value):
        raise NumericFailure(f"refusing to write non-finite value {value!r}")
    return repr(value)


def table_comment(seed, config: str, git: str | None = None) -> str:
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return f"# seed={seed}, git={git or git_revision()}, config={config}, time={stamp}"


def write_table(
    path: str | Path,
    columns: Sequence[str],
    rows: Iterable[Sequence],
    comment: str,
) -> None:
    path = Path(path)
    lines = [comment, ",".join(columns)]
    for row in rows:
        cells = [format_cell(v) for v in row]
        if len(cells) != len(columns):
            raise ValidationError(
                f"row width {len(cells)} does not match {len(columns)} columns"
            )
        lines.append(",".join(cells))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def read_table(path: str | Path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """(comment fields, column names, raw string rows); inverse of write_table."""
    lines = Path(path).read_text().splitlines()
    if len(lines) < 2 or not lines[0].startswith("#"):
        raise ValidationError(f"{path}: expected a comment line then a header row")
    meta: dict[str, str] = {}
    for part in lines[0].lstrip("# ").split(", "):
        if "=" in part:
            key, _, val = part.partition("=")
            meta[key] = val
    columns = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:] if line]
    for row in rows:
        if len(row) != len(columns):
            raise ValidationError(f"{path}: ragged row {row!r}")
    return meta, columns, rows


def column(rows: list[list[str]], columns: list[str], name: str) -> np.ndarray:
    """One numeric column as float array; absent cells become NaN."""
    if name not in columns:
        raise ValidationError(f"missing column {name!r}; have {columns}")
    i = columns.index(name)
    return np.array([float(r[i]) if r[i] != ABSENT else np.nan for r in rows])


def write_meta(path: str | Path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    def default(obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, (np.floating, np.integer, np.bool_)):
            return obj.item()
        raise TypeError(f"not JSON-serializable: {type(obj)}")

    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=default) + "\n")


def read_meta(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())
