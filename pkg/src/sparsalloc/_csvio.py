"""Small I/O helpers: atomic file writes and the package's CSV dialect.

Every CSV written by this package has a header row, data rows, and a
trailing metadata comment line ``# seed=..., version=...`` so a report can
be traced back to the run that produced it. Floats are rendered with
``repr`` (shortest round-trip form), which makes outputs byte-identical
across runs with identical inputs.
"""

from __future__ import annotations

import os
import tempfile
from typing import Iterable, Sequence


def atomic_write_bytes(path, data: bytes) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(
    header: Sequence[str],
    rows: Iterable[Sequence],
    *,
    seed,
    version: str,
) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_cell(v) for v in row))
    lines.append(f"# seed={seed}, version={version}")
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows, *, seed, version: str) -> None:
    atomic_write_text(path, render_csv(header, rows, seed=seed, version=version))


def read_csv(path) -> tuple[list[str], list[list[str]], str]:
    """Read a package CSV: (header, rows, metadata line or '')."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"empty CSV: {path}")
    meta = ""
    if lines[-1].startswith("#"):
        meta = lines[-1]
        lines = lines[:-1]
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    return header, rows, meta
