"""Covariance construction and singular-value spectra.

The covariance of n unit rows is (1/n) H^T H, so its trace is 1 by
construction and its eigenvalues coincide with its singular values.
Spectra come from two backends: an exact dense path backed by LAPACK's
symmetric eigensolver (or full SVD for the rectangular hidden-state
matrix), and a seeded randomized range-finder for top-k truncation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    KOutOfRangeError,
    NotPositiveSemidefiniteError,
    NotSymmetricError,
)
from .normalize import NormalizedStates

EIGENVALUE_CLAMP_FLOOR = -1e-10

DEFAULT_OVERSAMPLE = 10
DEFAULT_POWER_ITERS = 2
DEFAULT_SEED = 42


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetric d x d covariance of normalized hidden states."""

    data: np.ndarray
    n_tokens: int

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"covariance must be square, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("covariance contains non-finite values")
        if np.abs(arr - arr.T).max(initial=0.0) > 1e-12:
            raise NotSymmetricError("covariance is not symmetric within 1e-12")
        if self.n_tokens < 1:
            raise ValueError(f"n_tokens must be positive, got {self.n_tokens}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def d(self) -> int:
        return self.data.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.data))


@dataclass(frozen=True)
class Spectrum:
    """Singular values in descending order, with provenance.

    ``source`` records which matrix was decomposed ("covariance" or
    "hidden_states"), ``backend`` which solver produced the values, and
    ``total_dim`` the full spectrum length the values were drawn from.
    """

    values: np.ndarray
    source: str
    backend: str
    total_dim: int

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("spectrum values must be a 1-D array")
        if arr.size and arr.min() < 0:
            raise ValueError(f"negative singular value {arr.min()!r}")
        if arr.size > 1 and np.any(np.diff(arr) > 0):
            raise ValueError("spectrum values must be non-increasing")
        if self.source not in ("covariance", "hidden_states"):
            raise ValueError(f"unknown source {self.source!r}")
        if self.backend not in ("exact", "randomized"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if arr.size > self.total_dim:
            raise ValueError(
                f"{arr.size} values exceed total_dim {self.total_dim}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def k(self) -> int:
        """Number of retained values."""
        return int(self.values.size)

    def truncated(self, k: int) -> "Spectrum":
        if not 1 <= k <= self.k:
            raise KOutOfRangeError(f"k={k} outside [1, {self.k}]")
        return Spectrum(self.values[:k], self.source, self.backend, self.total_dim)


def covariance(s: NormalizedStates) -> CovarianceMatrix:
    """Build (1/n) H^T H, symmetrized as (A + A^T) / 2."""
    a = (s.data.T @ s.data) / s.n
    return CovarianceMatrix((a + a.T) / 2.0, s.n)


def _clamp_eigenvalues(w: np.ndarray) -> np.ndarray:
    low = w.min(initial=0.0)
    if low < EIGENVALUE_CLAMP_FLOOR:
        raise NotPositiveSemidefiniteError(
            f"eigenvalue {low!r} is below the rounding floor {EIGENVALUE_CLAMP_FLOOR}"
        )
    return np.maximum(w, 0.0)


def exact_spectrum(c: CovarianceMatrix) -> Spectrum:
    """All d eigenvalues of the symmetric PSD covariance, descending.

    For a symmetric positive semidefinite matrix these are also its
    singular values. Eigenvalues within rounding of zero are clamped to
    zero; anything further negative signals an inconsistent input.
    """
    try:
        w = np.linalg.eigvalsh(c.data)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"symmetric eigensolver failed: {exc}") from None
    w = _clamp_eigenvalues(w[::-1])
    return Spectrum(w, "covariance", "exact", c.d)


def singular_values(a: np.ndarray) -> np.ndarray:
    """Exact singular values of an arbitrary dense matrix, descending."""
    try:
        return np.linalg.svd(np.asarray(a, dtype=np.float64), compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"SVD failed: {exc}") from None


def hidden_spectrum(s: NormalizedStates, k: int | str = "full") -> Spectrum:
    """Top-k singular values of the n x d hidden-state matrix itself.

    ``k="full"`` retains all min(n, d) values via the exact backend.
    """
    small = min(s.n, s.d)
    sv = singular_values(s.data)
    if k == "full":
        return Spectrum(sv, "hidden_states", "exact", small)
    if not isinstance(k, int) or isinstance(k, bool):
        raise KOutOfRangeError(f"k must be 'full' or a positive integer, got {k!r}")
    if not 1 <= k <= small:
        raise KOutOfRangeError(f"k={k} outside [1, {small}] for shape ({s.n}, {s.d})")
    return Spectrum(sv[:k], "hidden_states", "exact", small)


def randomized_singular_values(
    a: np.ndarray,
    k: int,
    *,
    oversample: int = DEFAULT_OVERSAMPLE,
    power_iters: int = DEFAULT_POWER_ITERS,
    seed: int = DEFAULT_SEED,
) -> np.ndarray:
    """Approximate top-k singular values via a seeded Gaussian range finder.

    Sketches the range of ``a`` with k + oversample random directions,
    refines it with ``power_iters`` rounds of subspace iteration
    (re-orthonormalized each half step), then takes the exact SVD of the
    small projected matrix. Deterministic for a fixed seed.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got {a.ndim}-D")
    n, d = a.shape
    small = min(n, d)
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise KOutOfRangeError(f"k must be a positive integer, got {k!r}")
    if oversample < 0:
        raise ValueError(f"oversample must be non-negative, got {oversample}")
    width = k + oversample
    if width > small:
        raise KOutOfRangeError(
            f"k + oversample = {width} exceeds min(n, d) = {small}"
        )
    rng = np.random.default_rng(seed)
    sketch = rng.standard_normal((d, width))
    q, _ = np.linalg.qr(a @ sketch)
    for _ in range(power_iters):
        z, _ = np.linalg.qr(a.T @ q)
        q, _ = np.linalg.qr(a @ z)
    b = q.T @ a
    sv = np.linalg.svd(b, compute_uv=False)
    return sv[:k]


def randomized_spectrum(
    s: NormalizedStates,
    k: int,
    *,
    oversample: int = DEFAULT_OVERSAMPLE,
    power_iters: int = DEFAULT_POWER_ITERS,
    seed: int = DEFAULT_SEED,
) -> Spectrum:
    """Randomized top-k spectrum of the hidden-state matrix."""
    sv = randomized_singular_values(
        s.data, k, oversample=oversample, power_iters=power_iters, seed=seed
    )
    return Spectrum(sv, "hidden_states", "randomized", min(s.n, s.d))
