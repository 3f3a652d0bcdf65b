"""Output artifacts: atomic file writes, CSV/JSON emission, run manifests.

All writes go through a temp-file-then-rename so concurrent readers never
see a partial file.  Floats are serialized with 17 significant digits;
every results file parses back losslessly through `read_csv`/`json`.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import os
from pathlib import Path
from typing import Sequence

SCHEMA_VERSION = 1


def write_text_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.parent / f".{path.name}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fp:
        fp.write(text)
        fp.flush()
        os.fsync(fp.fileno())
    os.replace(tmp, path)


def fmt_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return "%.17g" % x
    return str(x)


def rows_to_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(fmt_value(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def write_csv(path: Path, rows: Sequence[dict], columns: Sequence[str]) -> None:
    write_text_atomic(path, rows_to_csv(rows, columns))


def read_csv(path: Path) -> list[dict]:
    """Parse a file written by `write_csv` back into typed rows."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    columns = lines[0].split(",")
    out = []
    for line in lines[1:]:
        if not line:
            continue
        cells = line.split(",")
        row = {}
        for col, cell in zip(columns, cells):
            row[col] = _parse_cell(cell)
        out.append(row)
    return out


def _parse_cell(cell: str):
    if cell == "":
        return None
    if cell in ("true", "false"):
        return cell == "true"
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def write_json(path: Path, payload: dict) -> None:
    write_text_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fp:
        for chunk in iter(lambda: fp.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(
    out_dir: Path,
    command: str,
    parameters: dict,
    master_seed: int,
    output_files: Sequence[str],
) -> Path:
    """Record the full run configuration and digests of every data file.

    Written last, after the data files exist, so a manifest always
    references complete outputs.  Timestamps live only here; the data
    files themselves are byte-deterministic for a given seed.
    """
    from . import __version__

    out_dir = Path(out_dir)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "tool": "dlmtrial",
        "version": __version__,
        "command": command,
        "parameters": parameters,
        "master_seed": master_seed,
        "created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "outputs": {name: sha256_file(out_dir / name) for name in sorted(output_files)},
    }
    path = out_dir / "manifest.json"
    write_json(path, manifest)
    return path
