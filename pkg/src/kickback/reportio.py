"""Text serialization shared by certificates, reports and configs.

Reports are flat `key = value` lines. Complex matrices serialize row-major
as pairs of decimal reals with 17 significant digits.
"""

from __future__ import annotations

import math

import numpy as np


def fmt(value: float) -> str:
    return format(float(value), ".17g")


def fmt_bool(value: bool) -> str:
    return "true" if value else "false"


def kv_line(key: str, *values) -> str:
    rendered = []
    for v in values:
        if isinstance(v, bool):
            rendered.append(fmt_bool(v))
        elif isinstance(v, float):
            rendered.append(fmt(v))
        else:
            rendered.append(str(v))
    return f"{key} = {' '.join(rendered)}"


def matrix_to_pairs(matrix: np.ndarray) -> str:
    """Row-major flat text of a complex matrix: 're im' per entry."""
    flat = np.asarray(matrix, dtype=complex).reshape(-1)
    return " ".join(f"{fmt(z.real)} {fmt(z.imag)}" for z in flat)


def pairs_to_matrix(values: list[float]) -> np.ndarray:
    """Square complex matrix from a flat row-major list of real pairs."""
    if len(values) % 2 != 0:
        raise ValueError("matrix text needs an even count of reals (re/im pairs)")
    entries = np.asarray(values[0::2], dtype=float) + 1j * np.asarray(values[1::2], dtype=float)
    dim = math.isqrt(entries.size)
    if dim * dim != entries.size:
        raise ValueError(f"{entries.size} complex entries do not form a square matrix")
    return entries.reshape(dim, dim)
