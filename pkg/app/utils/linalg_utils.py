import logging
import math
from typing import Literal, Tuple

import numpy as np

from app.utils.errors import (
    DimensionError,
    InvalidInputError,
    InvalidParameterError,
    SingularityError,
)

logger = logging.getLogger(__name__)

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
SYMMETRY_TOL = 1e-10


def _as_finite(v, name: str = "input") -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.size == 0:
        raise InvalidInputError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def lp_norm(v, p: float) -> float:
    """(sum |v_i|^p)^(1/p) for finite p, max |v_i| for p = inf."""
    if not p > 0:
        raise InvalidParameterError(f"p must be positive, got {p}")
    arr = np.abs(_as_finite(v, "vector"))
    if math.isinf(p):
        return float(arr.max())
    return float(np.sum(arr**p) ** (1.0 / p))


def hadamard(u, v) -> np.ndarray:
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.shape} vs {b.shape}")
    return a * b


def signum(v) -> np.ndarray:
    # np.sign maps 0 to 0, which is the convention the updates rely on
    return np.sign(np.asarray(v, dtype=np.float64))


def pow_abs(v, e: float) -> np.ndarray:
    """Elementwise |v_i|^e with 0^0 = 1."""
    arr = np.abs(np.asarray(v, dtype=np.float64))
    if e < 0 and np.any(arr == 0):
        raise SingularityError(f"zero entry raised to negative power {e}")
    return arr**e


def _jacobi_eig(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi rotations on a symmetric matrix.

    Returns unsorted eigenvalues and the matching eigenvector columns.
    """
    a = a.copy()
    n = a.shape[0]
    vecs = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), vecs

    for sweep in range(JACOBI_MAX_SWEEPS):
        off = math.sqrt(max(np.sum(a**2) - np.sum(np.diag(a) ** 2), 0.0))
        if off < JACOBI_TOL * scale:
            logger.debug("Jacobi converged after %d sweeps", sweep)
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 if theta == 0.0 else math.copysign(1.0, theta) / (
                    abs(theta) + math.sqrt(theta * theta + 1.0)
                )
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q

                vec_p = vecs[:, p].copy()
                vec_q = vecs[:, q].copy()
                vecs[:, p] = c * vec_p - s * vec_q
                vecs[:, q] = s * vec_p + c * vec_q
    else:
        logger.warning(
            "Jacobi eigensolver hit the %d sweep cap", JACOBI_MAX_SWEEPS
        )
    return np.diag(a).copy(), vecs


def sym_eig(
    A, r: int, method: Literal["lapack", "jacobi"] = "lapack"
) -> Tuple[np.ndarray, np.ndarray]:
    """Top-r eigenpairs of a symmetric matrix.

    Returns (W, d): W has orthonormal columns, d is sorted descending. Each
    eigenvector is signed so its largest-magnitude entry is positive (ties go
    to the lowest index).
    """
    a = _as_finite(A, "matrix")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"matrix must be square, got shape {a.shape}")
    n = a.shape[0]
    if not 1 <= r <= n:
        raise InvalidParameterError(f"r must lie in [1, {n}], got {r}")
    if np.max(np.abs(a - a.T)) > SYMMETRY_TOL * np.max(np.abs(a)):
        raise InvalidInputError("matrix is not symmetric")

    sym = 0.5 * (a + a.T)
    if method == "lapack":
        values, vectors = np.linalg.eigh(sym)
    elif method == "jacobi":
        values, vectors = _jacobi_eig(sym)
    else:
        raise InvalidParameterError(f"unknown eigensolver '{method}'")

    order = np.argsort(values, kind="stable")[::-1][:r]
    d = values[order]
    W = vectors[:, order]
    pivots = np.argmax(np.abs(W), axis=0)
    signs = np.where(W[pivots, np.arange(r)] < 0, -1.0, 1.0)
    return W * signs, d
