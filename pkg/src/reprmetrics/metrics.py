"""Scalar metrics over spectra: entropy, effective rank, nuclear norm.

Entropy is computed over the spectrum normalized to a probability
distribution; effective rank is exp of the natural-log entropy; the
nuclear norm is the plain sum of retained singular values. Two nuclear
norm variants are reported per sequence: over the hidden-state matrix
and over the covariance. The covariance variant is provably 1 for any
full spectrum of unit-row states (the trace identity), which is exactly
why the hidden-state variant is the default for scoring; the degenerate
one is kept to make that visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AllZeroSpectrumError, KOutOfRangeError
from .normalize import NormalizedStates
from .spectra import (
    DEFAULT_OVERSAMPLE,
    DEFAULT_POWER_ITERS,
    DEFAULT_SEED,
    Spectrum,
    covariance,
    exact_spectrum,
    hidden_spectrum,
    randomized_singular_values,
)

# Relative floor below which spectrum values count as exact zeros for
# the 0 * log 0 convention; keeps rounding dust from injecting -inf.
ZERO_MASS_RATIO = 1e-14


@dataclass(frozen=True)
class BundleConfig:
    """Settings a metric bundle was computed under.

    ``k`` is "full" or the number of retained singular values. The
    randomized backend only applies for numeric ``k``; a full spectrum
    is always computed exactly.
    """

    k: int | str = "full"
    base: str = "nats"
    backend: str = "exact"
    oversample: int = DEFAULT_OVERSAMPLE
    power_iters: int = DEFAULT_POWER_ITERS
    seed: int = DEFAULT_SEED
    # Consumed by the normalization stage when bundles are built from
    # files; recorded here so mismatched pipelines cannot be compared.
    skip_centering: bool = False

    def __post_init__(self) -> None:
        if self.k != "full" and (
            not isinstance(self.k, int) or isinstance(self.k, bool) or self.k < 1
        ):
            raise ValueError(f"k must be 'full' or a positive integer, got {self.k!r}")
        if self.base not in ("nats", "bits"):
            raise ValueError(f"base must be 'nats' or 'bits', got {self.base!r}")
        if self.backend not in ("exact", "randomized"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if not isinstance(self.skip_centering, bool):
            raise ValueError(
                f"skip_centering must be a bool, got {self.skip_centering!r}"
            )


@dataclass(frozen=True)
class MetricBundle:
    """All per-sequence metrics for one model, plus shape metadata."""

    label: str
    n_tokens: int
    hidden_dim: int
    entropy_nats: float
    entropy_bits: float
    effective_rank: float
    mnn_hidden: float
    mnn_covariance: float
    k_used: int
    config: BundleConfig

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "n_tokens": self.n_tokens,
            "hidden_dim": self.hidden_dim,
            "entropy_nats": self.entropy_nats,
            "entropy_bits": self.entropy_bits,
            "effective_rank": self.effective_rank,
            "mnn_hidden": self.mnn_hidden,
            "mnn_covariance": self.mnn_covariance,
            "k_used": self.k_used,
        }


def _distribution(values: np.ndarray) -> np.ndarray:
    if values.size == 0:
        raise AllZeroSpectrumError("empty spectrum")
    top = values.max(initial=0.0)
    if top <= 0.0:
        raise AllZeroSpectrumError("spectrum sums to zero")
    kept = np.where(values < ZERO_MASS_RATIO * top, 0.0, values)
    return kept / kept.sum()


def spectral_entropy(sp: Spectrum, base: str = "nats") -> float:
    """Shannon entropy of the normalized spectrum.

    Values are scaled to sum to 1; terms with zero mass contribute
    nothing. The result lies in [0, log k] for k retained values.
    """
    if base not in ("nats", "bits"):
        raise ValueError(f"base must be 'nats' or 'bits', got {base!r}")
    p = _distribution(sp.values)
    nz = p[p > 0.0]
    h = float(-(nz * np.log(nz)).sum())
    h = max(h, 0.0)
    return h / math.log(2.0) if base == "bits" else h


def effective_rank(sp: Spectrum) -> float:
    """exp of the natural-log entropy; equals k for a uniform k-spectrum."""
    return math.exp(spectral_entropy(sp, "nats"))


def nuclear_norm(sp: Spectrum) -> float:
    """Sum of the retained singular values."""
    return float(sp.values.sum())


def bundle(s: NormalizedStates, config: BundleConfig | None = None) -> MetricBundle:
    """Compute every per-sequence metric in one pass.

    Entropy and effective rank come from the covariance spectrum; both
    nuclear norm variants are reported. With a numeric ``k`` and the
    randomized backend, the covariance spectrum is derived from the
    hidden-state singular values through sigma_i(Sigma) = sigma_i(H)^2 / n,
    which avoids forming the d x d covariance at all.
    """
    cfg = config or BundleConfig()
    small = min(s.n, s.d)

    if cfg.k == "full":
        cov_sp = exact_spectrum(covariance(s))
        hid_sp = hidden_spectrum(s, "full")
    elif cfg.backend == "randomized":
        if cfg.k > small:
            raise KOutOfRangeError(
                f"k={cfg.k} outside [1, {small}] for shape ({s.n}, {s.d})"
            )
        oversample = min(cfg.oversample, small - cfg.k)
        sv = randomized_singular_values(
            s.data,
            cfg.k,
            oversample=oversample,
            power_iters=cfg.power_iters,
            seed=cfg.seed,
        )
        hid_sp = Spectrum(sv, "hidden_states", "randomized", small)
        cov_sp = Spectrum(sv * sv / s.n, "covariance", "randomized", s.d)
    else:
        cov_sp = exact_spectrum(covariance(s)).truncated(cfg.k)
        hid_sp = hidden_spectrum(s, cfg.k)

    entropy_nats = spectral_entropy(cov_sp, "nats")
    return MetricBundle(
        label=s.source_label,
        n_tokens=s.n,
        hidden_dim=s.d,
        entropy_nats=entropy_nats,
        entropy_bits=entropy_nats / math.log(2.0),
        effective_rank=math.exp(entropy_nats),
        mnn_hidden=nuclear_norm(hid_sp),
        mnn_covariance=nuclear_norm(cov_sp),
        k_used=hid_sp.k,
        config=cfg,
    )
