"""Deterministic file I/O: full-precision CSV and atomic writes.

All numeric output uses 17 significant digits (exact float round-trip),
"." as the decimal separator and "\n" line endings, so repeated runs
with the same seed produce byte-identical artifacts.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

__all__ = [
    "fmt",
    "write_text_atomic",
    "complex_matrix_to_csv",
    "complex_matrix_from_csv",
    "curve_to_csv",
    "trajectory_to_csv",
    "json_dumps_stable",
]


def fmt(x: float) -> str:
    """Round-trip decimal rendering of a float."""
    return format(float(x), ".17g")


def write_text_atomic(path: str, text: str) -> None:
    """Write text via a temp file + rename so readers never see partials."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def complex_matrix_to_csv(m) -> str:
    """Complex matrix as CSV rows of interleaved re,im fields."""
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    lines = []
    for row in m:
        fields = []
        for z in row:
            fields.append(fmt(z.real))
            fields.append(fmt(z.imag))
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def complex_matrix_from_csv(text: str) -> np.ndarray:
    rows = []
    for line in text.strip().splitlines():
        parts = [p for p in line.strip().split(",") if p != ""]
        if len(parts) % 2 != 0:
            raise ValueError("complex CSV rows need an even number of fields")
        vals = [float(p) for p in parts]
        rows.append([complex(re, im) for re, im in zip(vals[::2], vals[1::2])])
    if not rows:
        raise ValueError("empty matrix CSV")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("ragged matrix CSV")
    return np.asarray(rows, dtype=complex)


def curve_to_csv(header: tuple[str, ...], columns) -> str:
    """Column-wise real-valued curve CSV with a header line."""
    cols = [np.asarray(c, dtype=float).reshape(-1) for c in columns]
    if any(c.shape != cols[0].shape for c in cols):
        raise ValueError("curve columns must share a length")
    lines = [",".join(header)]
    for k in range(cols[0].shape[0]):
        lines.append(",".join(fmt(c[k]) for c in cols))
    return "\n".join(lines) + "\n"


def trajectory_to_csv(times, states, energies, drift) -> str:
    """Trajectory CSV: time, energy, reality drift, then re/im per dof.

    The state columns are named u1_XXX_re/u1_XXX_im then u2_XXX_re/...,
    with XXX the dof index.
    """
    states = np.atleast_2d(np.asarray(states, dtype=complex))
    n = states.shape[1] // 2
    header = ["time", "energy", "reality_drift"]
    for name, count in (("u1", n), ("u2", states.shape[1] - n)):
        for j in range(count):
            header.append(f"{name}_{j:03d}_re")
            header.append(f"{name}_{j:03d}_im")
    lines = [",".join(header)]
    for k in range(states.shape[0]):
        fields = [fmt(times[k]), fmt(energies[k]), fmt(drift[k])]
        for z in states[k]:
            fields.append(fmt(z.real))
            fields.append(fmt(z.imag))
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def json_dumps_stable(obj) -> str:
    """Deterministic JSON rendering (stable key order, trailing newline)."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"
