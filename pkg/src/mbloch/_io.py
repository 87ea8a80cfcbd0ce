"""Flat-file serialization: CSV and JSON writers with atomic replacement.

Floats are printed with 17 significant digits, which round-trips IEEE
doubles exactly; JSON mirrors the same fields.  Files are written to a
temporary sibling and moved into place, so readers never observe a
partial file.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence


def format_float(v: float) -> str:
    return format(float(v), ".17g")


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_csv(
    path,
    header: Sequence[str],
    rows: Iterable[Sequence[float]],
    metadata: dict | None = None,
) -> None:
    """Comma-separated file with an optional block of '# key=value'
    metadata lines above the header row."""
    lines = []
    if metadata:
        lines.extend(f"# {key}={value}" for key, value in metadata.items())
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_float(v) for v in row))
    _atomic_write_text(Path(path), "\n".join(lines) + "\n")


def read_csv(path):
    """Metadata, header and float rows of a file written by
    ``write_csv``."""
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln]
    metadata = {}
    while lines and lines[0].startswith("#"):
        key, _, value = lines.pop(0)[1:].strip().partition("=")
        metadata[key] = value
    header = lines[0].split(",")
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    return header, rows, metadata


def write_json(path, obj) -> None:
    _atomic_write_text(Path(path), json.dumps(obj, indent=2) + "\n")


def output_root() -> Path:
    """Default directory for relative output paths (MBLOCH_OUT_DIR, else
    the working directory)."""
    return Path(os.environ.get("MBLOCH_OUT_DIR", "."))


def resolve_out(path) -> Path:
    p = Path(path)
    return p if p.is_absolute() else output_root() / p
