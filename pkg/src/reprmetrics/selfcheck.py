"""Randomized agreement checks between the fast paths and the oracles.

Each case draws a random hidden-state matrix, runs it through the
normal pipeline, and demands that the production spectra and entropy
agree with the reference module. Used by the command-line verify mode
and by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import reference
from .matrix_io import HiddenStateMatrix
from .metrics import spectral_entropy
from .normalize import normalize
from .spectra import covariance, exact_spectrum, singular_values

EIGENVALUE_TOLERANCE = 1e-8
ENTROPY_TOLERANCE = 1e-10
CROSS_SPECTRUM_TOLERANCE = 1e-8


@dataclass(frozen=True)
class SelfCheckResult:
    ok: bool
    cases_run: int
    failures: tuple[str, ...] = field(default_factory=tuple)

    def describe(self) -> str:
        if self.ok:
            return f"self-check passed ({self.cases_run} cases)"
        return f"self-check failed: {self.failures[0]}"


def _check_case(index: int, rng: np.random.Generator, perturb: float,
                max_n: int, max_d: int) -> list[str]:
    n = int(rng.integers(2, max_n + 1))
    d = int(rng.integers(2, max_d + 1))
    raw = rng.standard_normal((n, d))
    m = HiddenStateMatrix(raw, "float64", label=f"case{index:03d}")
    states = normalize(m)
    cov = covariance(states)

    failures: list[str] = []
    main = exact_spectrum(cov).values + perturb
    oracle = reference.jacobi_eigenvalues(cov.data).eigenvalues
    gap = float(np.abs(main - oracle).max())
    if gap >= EIGENVALUE_TOLERANCE:
        failures.append(
            f"case {index} ({n}x{d}): eigenvalue mismatch {gap!r} "
            f"vs oracle tolerance {EIGENVALUE_TOLERANCE!r}"
        )

    clamped = np.maximum(main, 0.0)
    try:
        entropy_gap = abs(
            spectral_entropy_of(clamped) - reference.direct_entropy(clamped)
        )
    except Exception as exc:  # surfaced as a failure, not a crash
        failures.append(f"case {index} ({n}x{d}): entropy check raised {exc!r}")
    else:
        if entropy_gap >= ENTROPY_TOLERANCE:
            failures.append(
                f"case {index} ({n}x{d}): entropy mismatch {entropy_gap!r} "
                f"vs tolerance {ENTROPY_TOLERANCE!r}"
            )

    sv = singular_values(states.data)
    via_hidden = (sv * sv) / n
    cov_values = exact_spectrum(cov).values
    width = min(via_hidden.size, cov_values.size)
    cross = float(np.abs(via_hidden[:width] - cov_values[:width]).max())
    if cross >= CROSS_SPECTRUM_TOLERANCE:
        failures.append(
            f"case {index} ({n}x{d}): hidden-state and covariance spectra "
            f"disagree by {cross!r}"
        )
    return failures


def spectral_entropy_of(values: np.ndarray) -> float:
    """Entropy in nats of a raw non-negative value array."""
    from .spectra import Spectrum

    sp = Spectrum(np.sort(values)[::-1].copy(), "covariance", "exact",
                  total_dim=values.size)
    return spectral_entropy(sp, base="nats")


def run_selfcheck(*, seed: int = 42, cases: int = 50, perturb: float = 0.0,
                  max_n: int = 64, max_d: int = 64) -> SelfCheckResult:
    """Run the agreement battery and report the first failures found."""
    rng = np.random.default_rng(seed)
    failures: list[str] = []
    for index in range(cases):
        failures.extend(_check_case(index, rng, perturb, max_n, max_d))
        if failures:
            break
    return SelfCheckResult(not failures, index + 1 if cases else 0,
                           tuple(failures))
