"""Small dense complex linear algebra.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Every matrix in
this package is at most 32x32, so nothing here worries about performance
beyond avoiding Python-level loops where it is cheap to do so.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .errors import ShapeError, SizeLimitError, ValidationError

PERMANENT_MAX_SIZE = 12

__all__ = [
    "as_matrix",
    "kron",
    "adjoint",
    "permanent",
    "is_unitary",
    "max_abs",
    "equal_up_to_phase",
    "phase_aligned_distance",
    "matrix_to_dict",
    "matrix_from_dict",
    "matrix_to_json",
    "matrix_from_json",
]


def as_matrix(a: Any) -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix contains NaN or Inf entries")
    return m


def kron(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if rows * cols > 2**26:
        raise SizeLimitError(f"kron result {rows}x{cols} is too large")
    return np.kron(a, b)


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def _require_square(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")


def permanent(a) -> complex:
    """Matrix permanent by Ryser's inclusion-exclusion formula.

    All ``2**n`` column subsets are enumerated at once: row sums over each
    subset come from a single matrix product with the 0/1 subset table, so
    the cost is ``O(2**n * n**2)`` arithmetic with no per-permutation work.

    :param a: square matrix with at most 12 rows
    :raises ShapeError: if ``a`` is not square
    :raises SizeLimitError: if ``a`` has more than 12 rows
    """
    a = as_matrix(a)
    _require_square(a)
    n = a.shape[0]
    if n > PERMANENT_MAX_SIZE:
        raise SizeLimitError(f"permanent limited to {PERMANENT_MAX_SIZE} rows, got {n}")
    if n == 1:
        return complex(a[0, 0])
    if n == 2:
        return complex(a[0, 0] * a[1, 1] + a[0, 1] * a[1, 0])

    subsets = np.arange(1, 2**n)
    table = ((subsets[:, None] >> np.arange(n)) & 1).astype(np.float64)
    row_sums = table @ a.T  # row_sums[s, i] = sum_{j in s} a[i, j]
    sizes = table.sum(axis=1)
    signs = np.where((n - sizes) % 2 == 0, 1.0, -1.0)
    return complex(np.sum(signs * np.prod(row_sums, axis=1)))


def is_unitary(a, tol: float) -> bool:
    if tol <= 0:
        raise ValidationError("tol must be positive")
    a = as_matrix(a)
    _require_square(a)
    gram = a.conj().T @ a
    return bool(np.max(np.abs(gram - np.eye(a.shape[0]))) < tol)


def max_abs(a) -> float:
    """Max-norm (largest entry modulus)."""
    return float(np.max(np.abs(a)))


def equal_up_to_phase(a, b, tol: float) -> bool:
    return phase_aligned_distance(a, b) < tol


def phase_aligned_distance(a, b) -> float:
    """Max-norm distance between ``a`` and ``b`` after removing the best global phase."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return max_abs(a - phase * b)


# --- JSON codec -------------------------------------------------------------


def matrix_to_dict(a) -> dict:
    a = as_matrix(a)
    flat = a.ravel()
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "re": [float(v) for v in flat.real],
        "im": [float(v) for v in flat.imag],
    }


def matrix_from_dict(d: Any) -> np.ndarray:
    """Inverse of :func:`matrix_to_dict`; error messages name the bad field."""
    if not isinstance(d, dict):
        raise ValidationError("matrix JSON must be an object with rows, cols, re, im")
    for key in ("rows", "cols", "re", "im"):
        if key not in d:
            raise ValidationError(f"matrix JSON is missing field '{key}'")
    rows, cols = d["rows"], d["cols"]
    for key, val in (("rows", rows), ("cols", cols)):
        if not isinstance(val, int) or isinstance(val, bool) or val < 1:
            raise ValidationError(f"matrix field '{key}' must be a positive integer")
    for key in ("re", "im"):
        vals = d[key]
        if not isinstance(vals, list) or len(vals) != rows * cols:
            raise ValidationError(f"matrix field '{key}' must be a list of {rows * cols} numbers")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
            raise ValidationError(f"matrix field '{key}' contains a non-numeric entry")
    re = np.array(d["re"], dtype=float)
    im = np.array(d["im"], dtype=float)
    if not (np.all(np.isfinite(re)) and np.all(np.isfinite(im))):
        raise ValidationError("matrix fields 're'/'im' must be finite")
    return (re + 1j * im).reshape(rows, cols)


def matrix_to_json(a) -> str:
    return json.dumps(matrix_to_dict(a))


def matrix_from_json(text: str) -> np.ndarray:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"matrix JSON is not valid JSON: {exc}") from None
    return matrix_from_dict(d)
