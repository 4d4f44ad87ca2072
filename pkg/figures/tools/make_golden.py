"""Regenerate the golden CSV fixtures under tests/golden.

Runs the warmstart CLI (the data producer's public interface) once per
artifact with a pinned seed. Output CSVs are committed; rerun this only
when the producer's schemas change, then re-inspect the figures.
"""
from __future__ import annotations

import subprocess
import sys
from pathlib import Path

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"
# seed 2 makes the jump-scan fixtures actually jump; see minima-cut.ini
SEED = 2

RUNS = [
    ("variance-sweep", "variance-sweep.ini"),
    ("variance-vs-dt", "variance-vs-dt.ini"),
    ("adiabatic-track", "adiabatic-track.ini"),
    ("minima-cut", "minima-cut.ini"),
    ("landscape-2d", "descent.ini"),
    ("grad-path", "descent.ini"),
]


def main() -> int:
    for subcommand, config in RUNS:
        # relative paths, run from the golden dir: keeps the provenance
        # comment in committed CSVs free of machine-specific prefixes
        cmd = [
            "warmstart",
            subcommand,
            "--config",
            f"configs/{config}",
            "--outdir",
            ".",
            "--seed",
            str(SEED),
        ]
        print("+", " ".join(cmd), flush=True)
        result = subprocess.run(cmd, cwd=GOLDEN)
        if result.returncode != 0:
            print(f"{subcommand} failed with exit {result.returncode}", file=sys.stderr)
            return result.returncode
    return 0


if __name__ == "__main__":
    sys.exit(main())
