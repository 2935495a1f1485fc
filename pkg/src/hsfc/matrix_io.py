"""Plain-text matrix files.

Line 1 holds the dimension ``n``; each of the next ``n`` lines holds ``n``
whitespace-separated entries ``re,im``. Numbers are written with Python's
shortest round-trip ``repr``, so parse(format(m)) reproduces ``m`` bit for bit.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import PreconditionError


class MatrixFormatError(PreconditionError):
    pass


def format_entry(z: complex) -> str:
    z = complex(z)
    return f"{float(z.real)!r},{float(z.imag)!r}"


def parse_entry(token: str) -> complex:
    re_part, sep, im_part = token.partition(",")
    try:
        return complex(float(re_part), float(im_part) if sep else 0.0)
    except ValueError:
        raise MatrixFormatError(f"bad matrix entry {token!r}") from None


def format_matrix(m) -> str:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise MatrixFormatError(f"expected a square matrix, got shape {m.shape}")
    lines = [str(m.shape[0])]
    lines += [" ".join(format_entry(v) for v in row) for row in m]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MatrixFormatError("empty matrix file")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise MatrixFormatError(f"first line must be the dimension, got {lines[0]!r}") from None
    if n <= 0:
        raise MatrixFormatError(f"dimension must be positive, got {n}")
    rows = lines[1:]
    if len(rows) != n:
        raise MatrixFormatError(f"expected {n} rows, found {len(rows)}")
    out = np.empty((n, n), dtype=complex)
    for i, row in enumerate(rows):
        tokens = row.split()
        if len(tokens) != n:
            raise MatrixFormatError(f"row {i + 1} has {len(tokens)} entries, expected {n}")
        out[i] = [parse_entry(t) for t in tokens]
    return out


def read_matrix(path) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MatrixFormatError(f"cannot read matrix file {path}: {exc}") from None
    return parse_matrix(text)


def write_matrix(path, m) -> None:
    Path(path).write_text(format_matrix(m))
