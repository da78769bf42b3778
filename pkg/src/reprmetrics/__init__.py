"""Spectral representation metrics over hidden-state matrices.

Pipeline: load an (n_tokens, hidden_dim) matrix, mean-center and
row-normalize it, form the covariance, take its spectrum, and reduce
the spectrum to scalar metrics (spectral entropy, effective rank,
nuclear norm). Two models are compared through per-sequence metric
deltas folded into a weighted composite score.
"""

from .compare import (
    AggregateDeltas,
    ComparisonReport,
    SequenceComparison,
    SkippedSequence,
    Weights,
    collect_bundles,
    collect_pairs,
    compare_corpus,
    composite_score,
    report_to_dict,
    report_to_json,
    sweep_grid,
    weight_sweep,
)
from .errors import (
    AllSequencesSkippedError,
    AllZeroSpectrumError,
    ConfigMismatchError,
    ConvergenceError,
    DuplicateEntryError,
    EmptyManifestError,
    FileUnreadableError,
    KOutOfRangeError,
    MalformedHeaderError,
    ManifestMismatchError,
    MatrixTooLargeError,
    NonFiniteValueError,
    NotPositiveSemidefiniteError,
    NotSymmetricError,
    ReprMetricsError,
    WrongRankError,
    ZeroVectorAfterCenteringError,
)
from .matrix_io import (
    DatasetManifest,
    HiddenStateMatrix,
    ManifestEntry,
    load_manifest,
    load_matrix,
    write_matrix,
)
from .metrics import (
    BundleConfig,
    MetricBundle,
    bundle,
    effective_rank,
    nuclear_norm,
    spectral_entropy,
)
from .normalize import NormalizedStates, l2_normalize_rows, mean_center, normalize
from .spectra import (
    CovarianceMatrix,
    Spectrum,
    covariance,
    exact_spectrum,
    hidden_spectrum,
    randomized_singular_values,
    randomized_spectrum,
    singular_values,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateDeltas",
    "AllSequencesSkippedError",
    "AllZeroSpectrumError",
    "BundleConfig",
    "ComparisonReport",
    "ConfigMismatchError",
    "ConvergenceError",
    "CovarianceMatrix",
    "DatasetManifest",
    "DuplicateEntryError",
    "EmptyManifestError",
    "FileUnreadableError",
    "HiddenStateMatrix",
    "KOutOfRangeError",
    "MalformedHeaderError",
    "ManifestEntry",
    "ManifestMismatchError",
    "MatrixTooLargeError",
    "MetricBundle",
    "NonFiniteValueError",
    "NormalizedStates",
    "NotPositiveSemidefiniteError",
    "NotSymmetricError",
    "ReprMetricsError",
    "SequenceComparison",
    "SkippedSequence",
    "Spectrum",
    "Weights",
    "WrongRankError",
    "ZeroVectorAfterCenteringError",
    "bundle",
    "collect_bundles",
    "collect_pairs",
    "compare_corpus",
    "composite_score",
    "covariance",
    "effective_rank",
    "exact_spectrum",
    "hidden_spectrum",
    "l2_normalize_rows",
    "load_manifest",
    "load_matrix",
    "mean_center",
    "normalize",
    "nuclear_norm",
    "randomized_singular_values",
    "randomized_spectrum",
    "report_to_dict",
    "report_to_json",
    "singular_values",
    "spectral_entropy",
    "sweep_grid",
    "weight_sweep",
    "write_matrix",
]
