"""Byte-stable CSV reading and writing.

All floating-point values are rendered with 12 significant digits through a
fixed format so repeated runs produce identical bytes. Comment lines start
with '#' and may appear after the data rows (histogram marker footers).
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np


def fmt(value) -> str:
    """Render one CSV cell: floats at 12 significant digits, ints plain."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.12g" % float(value)
    return str(value)


def write_csv(path, header: list[str], rows, footer: list[str] | None = None) -> None:
    """Write rows under a header, with optional '#' footer lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(fmt(cell) for cell in row) + "\n")
        for line in footer or ():
            f.write("# " + line + "\n")


def read_csv(path) -> tuple[list[str], list[list[str]], list[str]]:
    """Read a CSV written by write_csv: (header, rows, footer lines)."""
    header: list[str] | None = None
    rows: list[list[str]] = []
    footers: list[str] = []
    with open(path, newline="\n") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                footers.append(line[1:].strip())
                continue
            if header is None:
                header = line.split(",")
            else:
                rows.append(line.split(","))
    if header is None:
        raise ValueError(f"{path} has no header line")
    return header, rows, footers


def require_header(path, expected: list[str]) -> None:
    header, _, _ = read_csv(path)
    if header != expected:
        raise ValueError(f"{path} has header {header}, expected {expected}")


def relative_tree(root) -> list[str]:
    """Sorted relative paths of all files under root (for determinism checks)."""
    root = Path(root)
    found = []
    for dirpath, _, filenames in os.walk(root):
        for name in filenames:
            found.append(str((Path(dirpath) / name).relative_to(root)))
    return sorted(found)
