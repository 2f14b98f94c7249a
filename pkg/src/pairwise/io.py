"""Columnar text files: one header line of column names, then rows.

Numbers are written with 17 significant digits so a rerun with the same
inputs produces byte-identical files.
"""

from __future__ import annotations

import hashlib
import os
from typing import Mapping

import numpy as np


def write_columns(path, columns: Mapping[str, np.ndarray]) -> None:
    names = list(columns)
    if not names:
        raise ValueError("no columns to write")
    for name in names:
        if not name or any(c.isspace() for c in name):
            raise ValueError(f"column name {name!r} must be a single token")
    data = [np.asarray(columns[k], dtype=float).ravel() for k in names]
    length = {len(c) for c in data}
    if len(length) != 1:
        raise ValueError("columns differ in length")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("# " + " ".join(names) + "\n")
        np.savetxt(fh, np.column_stack(data), fmt="%.17g")


def read_columns(path) -> dict[str, np.ndarray]:
    with open(path, encoding="ascii") as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing header line")
        names = header[1:].split()
        data = np.loadtxt(fh, ndmin=2)
    if data.size == 0:
        data = np.zeros((0, len(names)))
    if data.shape[1] != len(names):
        raise ValueError(f"{path}: header names {len(names)} columns, rows have {data.shape[1]}")
    return {n: data[:, i] for i, n in enumerate(names)}


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def ensure_dir(path) -> None:
    os.makedirs(path, exist_ok=True)
