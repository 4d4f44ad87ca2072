"""Readers for the experiment driver's CSV + JSON artifact pairs.

An artifact is ``<name>.csv`` (one ``#`` provenance comment, a header row,
comma-separated cells, empty cell = absent value) plus an optional
``<name>.meta.json`` sidecar. These files are the only input this package
consumes: every statistic shown in a figure must already be recorded in
them by the producer.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class SchemaError(ValueError):
    """Input file missing, unparseable, or columns deviate from the producer's schema."""


@dataclass(frozen=True)
class Artifact:
    path: Path
    columns: tuple[str, ...]
    rows: list[list[str]]
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        """One numeric column as a float array; absent cells become NaN."""
        if name not in self.columns:
            raise SchemaError(
                f"{self.path.name}: missing column {name!r}; have {list(self.columns)}"
            )
        i = self.columns.index(name)
        return np.array(
            [float(row[i]) if row[i] != "" else np.nan for row in self.rows]
        )

    def strings(self, name: str) -> list[str]:
        if name not in self.columns:
            raise SchemaError(
                f"{self.path.name}: missing column {name!r}; have {list(self.columns)}"
            )
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def load_artifact(
    indir: str | Path,
    name: str,
    expected: Sequence[str],
    extra_prefix: str | None = None,
) -> Artifact:
    """Read and schema-check ``<indir>/<name>.csv`` (+ meta sidecar if present).

    Every expected column must be present; any surplus column must start
    with extra_prefix (the track table carries a variable-width block of
    parameter columns). Mismatches raise with column-level diagnostics.
    """
    indir = Path(indir)
    path = indir / f"{name}.csv"
    if not path.is_file():
        raise SchemaError(f"{name}.csv: not found in {indir}")
    lines = path.read_text().splitlines()
    if len(lines) < 2 or not lines[0].startswith("#"):
        raise SchemaError(f"{path.name}: expected a comment line then a header row")
    columns = lines[1].split(",")
    missing = [c for c in expected if c not in columns]
    surplus = [c for c in columns if c not in expected]
    unexpected = [
        c for c in surplus if extra_prefix is None or not c.startswith(extra_prefix)
    ]
    if missing or unexpected:
        raise SchemaError(
            f"{path.name}: schema mismatch: missing columns {missing}, "
            f"unexpected columns {unexpected}; have {columns}"
        )
    rows = [line.split(",") for line in lines[2:] if line]
    for row in rows:
        if len(row) != len(columns):
            raise SchemaError(
                f"{path.name}: ragged row of width {len(row)}, header has {len(columns)}"
            )
    meta_path = indir / f"{name}.meta.json"
    meta = json.loads(meta_path.read_text()) if meta_path.is_file() else {}
    return Artifact(path=path, columns=tuple(columns), rows=rows, meta=meta)


def load_fits(indir: str | Path, name: str) -> dict[str, dict[str, float]]:
    """Power-law fit rows keyed by quantity name.

    The producer only writes its fit table when enough series exist, so a
    missing file is not an error: figures then draw data without overlays.
    """
    if not (Path(indir) / f"{name}.csv").is_file():
        return {}
    art = load_artifact(indir, name, ("quantity", "exponent", "prefactor", "r_squared"))
    exponent = art.column("exponent")
    prefactor = art.column("prefactor")
    r_squared = art.column("r_squared")
    return {
        q: {
            "exponent": float(exponent[i]),
            "prefactor": float(prefactor[i]),
            "r_squared": float(r_squared[i]),
        }
        for i, q in enumerate(art.strings("quantity"))
    }
