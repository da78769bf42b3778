"""Two-stage normalization of hidden states.

Rows are first centered against the token mean, then each row is scaled
to unit L2 norm so all tokens lie on the unit hypersphere. A row whose
post-centering norm falls below ``zero_row_epsilon`` cannot be scaled;
such sequences are reported as degenerate rather than repaired.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroVectorAfterCenteringError
from .matrix_io import HiddenStateMatrix

ZERO_ROW_EPSILON = 1e-12


@dataclass(frozen=True)
class NormalizedStates:
    """Mean-centered, row-unit-normalized hidden states.

    ``centered_mean`` is the token mean that was subtracted (all zeros
    when centering was skipped). Column means of ``data`` are generally
    not zero: unit scaling after centering breaks exact column-mean
    zero, and only the pre-scaling intermediate is mean-free.
    """

    data: np.ndarray
    source_label: str
    centered_mean: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D matrix, got {arr.ndim}-D")
        mean = np.ascontiguousarray(self.centered_mean, dtype=np.float64)
        if mean.shape != (arr.shape[1],):
            raise ValueError(
                f"centered_mean has shape {mean.shape}, expected ({arr.shape[1]},)"
            )
        norms = np.linalg.norm(arr, axis=1)
        if not np.allclose(norms, 1.0, rtol=0.0, atol=1e-12):
            worst = int(np.argmax(np.abs(norms - 1.0)))
            raise ValueError(
                f"row {worst} has norm {norms[worst]!r}, expected 1 within 1e-12"
            )
        arr.flags.writeable = False
        mean.flags.writeable = False
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "centered_mean", mean)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


def mean_center(m: HiddenStateMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Subtract the token mean from every row.

    Returns ``(centered, mean)`` where ``mean`` is the average of the
    rows and ``centered`` has column means of zero (within rounding).
    """
    mean = m.data.mean(axis=0)
    return m.data - mean, mean


def l2_normalize_rows(
    centered: np.ndarray,
    *,
    mean: np.ndarray | None = None,
    label: str = "",
    zero_row_epsilon: float = ZERO_ROW_EPSILON,
) -> NormalizedStates:
    """Scale every row to unit L2 norm.

    Raises ``ZeroVectorAfterCenteringError`` for the first row whose
    norm is at or below ``zero_row_epsilon``; with the default threshold
    that distinguishes genuine degeneracy from rounding.
    """
    arr = np.asarray(centered, dtype=np.float64)
    norms = np.linalg.norm(arr, axis=1)
    too_small = norms <= zero_row_epsilon
    if too_small.any():
        raise ZeroVectorAfterCenteringError(int(np.argmax(too_small)), label)
    if mean is None:
        mean = np.zeros(arr.shape[1], dtype=np.float64)
    return NormalizedStates(arr / norms[:, None], label, mean)


def normalize(
    m: HiddenStateMatrix,
    *,
    skip_centering: bool = False,
    zero_row_epsilon: float = ZERO_ROW_EPSILON,
) -> NormalizedStates:
    """Run the full pipeline: center against the token mean, then unit-scale rows.

    ``skip_centering`` applies only the scaling stage, which is needed
    for controlled fixtures with hand-picked directions. Single-token
    sequences always fail under centering because their one row becomes
    exactly zero.
    """
    if skip_centering:
        return l2_normalize_rows(
            m.data, label=m.label, zero_row_epsilon=zero_row_epsilon
        )
    centered, mean = mean_center(m)
    return l2_normalize_rows(
        centered, mean=mean, label=m.label, zero_row_epsilon=zero_row_epsilon
    )
