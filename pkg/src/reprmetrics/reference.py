"""Slow reference implementations for cross-checking the main paths.

These exist for trust, not speed: a cyclic Jacobi eigensolver that
touches every off-diagonal pair each sweep, singular values obtained by
rooting the Gram matrix's eigenvalues, and a literal two-pass entropy
evaluated in extended precision. Dimension-capped on purpose. Shipped
in the library (not only the tests) so the command-line verify mode can
run the same checks in the field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllZeroSpectrumError, ConvergenceError, NotSymmetricError

DIMENSION_CAP = 256
MAX_SWEEPS = 100
_CONVERGENCE_RATIO = 1e-12


@dataclass(frozen=True)
class OracleResult:
    eigenvalues: np.ndarray
    iterations: int
    off_diagonal_residual: float


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt((off * off).sum()))


def jacobi_eigenvalues(a: np.ndarray, *, max_sweeps: int = MAX_SWEEPS) -> OracleResult:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps rotate every (p, q) pair in row order until the off-diagonal
    Frobenius mass drops below 1e-12 times the matrix norm. Descending
    order on return.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n > DIMENSION_CAP:
        raise ValueError(f"dimension {n} exceeds the reference cap {DIMENSION_CAP}")
    if np.abs(a - a.T).max(initial=0.0) > 1e-12:
        raise NotSymmetricError("matrix is not symmetric within 1e-12")

    work = a.copy()
    fro = float(np.linalg.norm(a))
    tol = _CONVERGENCE_RATIO * fro
    sweeps = 0
    residual = _off_diagonal_norm(work)
    while residual > tol:
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"no convergence after {max_sweeps} sweeps "
                f"(residual {residual!r}, tolerance {tol!r})"
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                if apq == 0.0:
                    continue
                tau = (work[q, q] - work[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # Apply the rotation to columns p, q, then rows p, q.
                col_p = work[:, p].copy()
                col_q = work[:, q].copy()
                work[:, p] = c * col_p - s * col_q
                work[:, q] = s * col_p + c * col_q
                row_p = work[p, :].copy()
                row_q = work[q, :].copy()
                work[p, :] = c * row_p - s * row_q
                work[q, :] = s * row_p + c * row_q
                work[p, q] = 0.0
                work[q, p] = 0.0
        sweeps += 1
        residual = _off_diagonal_norm(work)
    eigenvalues = np.sort(np.diag(work))[::-1].copy()
    return OracleResult(eigenvalues, sweeps, residual)


def naive_singular_values(m: np.ndarray) -> np.ndarray:
    """Singular values as square roots of the Gram matrix's eigenvalues.

    Uses M^T M or M M^T, whichever is smaller; negatives from rounding
    are clamped before the root.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got {m.ndim}-D")
    n, d = m.shape
    gram = m.T @ m if d <= n else m @ m.T
    gram = (gram + gram.T) / 2.0
    result = jacobi_eigenvalues(gram)
    return np.sqrt(np.maximum(result.eigenvalues, 0.0))


def direct_entropy(values) -> float:
    """Literal two-pass entropy in nats: normalize, then sum.

    Runs in extended precision where the platform provides it.
    """
    arr = np.asarray(values, dtype=np.longdouble)
    if arr.ndim != 1:
        raise ValueError("expected a flat list of spectrum values")
    if arr.size and float(arr.min()) < 0.0:
        raise ValueError(f"negative spectrum value {float(arr.min())!r}")
    total = arr.sum()
    if arr.size == 0 or float(total) <= 0.0:
        raise AllZeroSpectrumError("spectrum sums to zero")
    p = arr / total
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())
