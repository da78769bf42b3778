"""Timing harness comparing exact and sketched spectra on synthetic data.

Synthetic matrices get geometrically decaying column scales so the
sketch has real structure to find. Exact runs are skipped above a size
cap rather than letting the table take minutes to fill.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .spectra import (
    DEFAULT_OVERSAMPLE,
    DEFAULT_POWER_ITERS,
    DEFAULT_SEED,
    randomized_singular_values,
    singular_values,
)

DEFAULT_SIZES = (256, 512, 1024, 2048)
EXACT_SIZE_CAP = 4096


@dataclass(frozen=True)
class BenchRow:
    size: int
    k: int
    exact_seconds: float | None
    randomized_seconds: float
    relative_error: float | None

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "k": self.k,
            "exact_seconds": self.exact_seconds,
            "randomized_seconds": self.randomized_seconds,
            "relative_error": self.relative_error,
        }


def synthetic_matrix(size: int, seed: int) -> np.ndarray:
    """Square Gaussian matrix with column scales decaying to 1e-3."""
    rng = np.random.default_rng(seed)
    scales = np.geomspace(1.0, 1e-3, size)
    return rng.standard_normal((size, size)) * scales


def run_bench(sizes=DEFAULT_SIZES, *, k: int = 64,
              oversample: int = DEFAULT_OVERSAMPLE,
              power_iters: int = DEFAULT_POWER_ITERS,
              seed: int = DEFAULT_SEED,
              exact_cap: int = EXACT_SIZE_CAP) -> list[BenchRow]:
    """Time both backends per size and report top-k relative error."""
    rows: list[BenchRow] = []
    for size in sizes:
        size = int(size)
        if size < 2:
            raise ValueError(f"bench size must be at least 2, got {size}")
        a = synthetic_matrix(size, seed)
        k_used = min(k, size)
        slack = size - k_used
        os_used = min(oversample, slack) if slack else 0

        start = time.perf_counter()
        approx = randomized_singular_values(
            a, k_used, oversample=os_used, power_iters=power_iters, seed=seed
        )
        randomized_seconds = time.perf_counter() - start

        exact_seconds: float | None = None
        relative_error: float | None = None
        if size <= exact_cap:
            start = time.perf_counter()
            exact = singular_values(a)
            exact_seconds = time.perf_counter() - start
            top = exact[:k_used]
            denom = float(np.linalg.norm(top))
            if denom > 0.0:
                relative_error = float(np.linalg.norm(approx - top) / denom)
        rows.append(BenchRow(size, k_used, exact_seconds,
                             randomized_seconds, relative_error))
    return rows


def format_table(rows: list[BenchRow]) -> str:
    """Fixed-width text table for terminal display."""
    header = (f"{'size':>6}  {'k':>4}  {'exact_s':>10}  "
              f"{'rand_s':>10}  {'rel_err':>10}")
    lines = [header, "-" * len(header)]
    for row in rows:
        exact = f"{row.exact_seconds:.4f}" if row.exact_seconds is not None else "skipped"
        err = f"{row.relative_error:.2e}" if row.relative_error is not None else "n/a"
        lines.append(f"{row.size:>6}  {row.k:>4}  {exact:>10}  "
                     f"{row.randomized_seconds:>10.4f}  {err:>10}")
    return "\n".join(lines)
