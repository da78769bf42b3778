"""Two-model comparison: per-sequence deltas and the weighted composite.

The composite is w_entropy * D1 + w_mnn * DMNN, where D1 is either the
entropy delta or the effective-rank delta (selected by ``delta_kind``)
and DMNN is the hidden-state nuclear norm delta, all taken as model B
minus model A. With ``normalize_terms`` each side's metric is first
divided by its own scale cap (log of total dimension for entropy, total
dimension for effective rank, sqrt(min(n, d)) for the nuclear norm) so
the two terms live on comparable scales even when the models have
different widths; when shapes match this reduces to dividing the deltas
themselves.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from . import jsonout
from .errors import (
    AllSequencesSkippedError,
    ConfigMismatchError,
    ManifestMismatchError,
    ZeroVectorAfterCenteringError,
)
from .matrix_io import (
    MAX_COLS_DEFAULT,
    MAX_ROWS_DEFAULT,
    DatasetManifest,
    load_matrix,
)
from .metrics import BundleConfig, MetricBundle, bundle
from .normalize import normalize

REPORT_SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class Weights:
    """Composite weights and the choice of first delta term."""

    w_entropy: float = 0.5
    w_mnn: float = 0.5
    delta_kind: str = "effective_rank"
    normalize_terms: bool = True

    def __post_init__(self) -> None:
        if self.w_entropy < 0 or self.w_mnn < 0:
            raise ValueError("weights must be non-negative")
        if self.w_entropy + self.w_mnn <= 0:
            raise ValueError("at least one weight must be positive")
        if self.delta_kind not in ("entropy", "effective_rank"):
            raise ValueError(
                f"delta_kind must be 'entropy' or 'effective_rank', got {self.delta_kind!r}"
            )


@dataclass(frozen=True)
class SequenceComparison:
    label: str
    bundle_a: MetricBundle
    bundle_b: MetricBundle
    delta_entropy: float
    delta_erank: float
    delta_mnn: float
    composite: float


@dataclass(frozen=True)
class SkippedSequence:
    label: str
    reason: str


@dataclass(frozen=True)
class AggregateDeltas:
    delta_entropy: float
    delta_erank: float
    delta_mnn: float
    composite: float


@dataclass(frozen=True)
class ComparisonReport:
    per_sequence: tuple[SequenceComparison, ...]
    aggregate: AggregateDeltas
    weights_used: Weights
    skipped: tuple[SkippedSequence, ...]
    config: BundleConfig
    skip_policy: str
    config_fingerprint: str


def _entropy_in_base(b: MetricBundle) -> float:
    return b.entropy_bits if b.config.base == "bits" else b.entropy_nats


def _entropy_term(b: MetricBundle, normalized: bool) -> float:
    value = _entropy_in_base(b)
    if not normalized:
        return value
    if b.hidden_dim <= 1:
        # Entropy of a one-dimensional spectrum is identically zero.
        return 0.0
    cap = math.log(b.hidden_dim)
    if b.config.base == "bits":
        cap /= math.log(2.0)
    return value / cap


def _erank_term(b: MetricBundle, normalized: bool) -> float:
    return b.effective_rank / b.hidden_dim if normalized else b.effective_rank


def _mnn_term(b: MetricBundle, normalized: bool) -> float:
    if not normalized:
        return b.mnn_hidden
    return b.mnn_hidden / math.sqrt(min(b.n_tokens, b.hidden_dim))


def composite_score(a: MetricBundle, b: MetricBundle, w: Weights) -> float:
    """Weighted composite of the B-minus-A deltas.

    Both bundles must have been computed under identical settings.
    """
    if a.config != b.config:
        raise ConfigMismatchError(
            f"bundle settings differ: {a.config} vs {b.config}"
        )
    if w.delta_kind == "entropy":
        d1 = _entropy_term(b, w.normalize_terms) - _entropy_term(a, w.normalize_terms)
    else:
        d1 = _erank_term(b, w.normalize_terms) - _erank_term(a, w.normalize_terms)
    dmnn = _mnn_term(b, w.normalize_terms) - _mnn_term(a, w.normalize_terms)
    return w.w_entropy * d1 + w.w_mnn * dmnn


def _sequence_comparison(
    label: str, a: MetricBundle, b: MetricBundle, w: Weights
) -> SequenceComparison:
    return SequenceComparison(
        label=label,
        bundle_a=a,
        bundle_b=b,
        delta_entropy=_entropy_in_base(b) - _entropy_in_base(a),
        delta_erank=b.effective_rank - a.effective_rank,
        delta_mnn=b.mnn_hidden - a.mnn_hidden,
        composite=composite_score(a, b, w),
    )


def _check_paired(manifest_a: DatasetManifest, manifest_b: DatasetManifest) -> None:
    if len(manifest_a) != len(manifest_b):
        raise ManifestMismatchError(
            f"manifest lengths differ: {len(manifest_a)} vs {len(manifest_b)}"
        )
    for i, (la, lb) in enumerate(zip(manifest_a.labels, manifest_b.labels)):
        if la != lb:
            raise ManifestMismatchError(
                f"labels differ at entry {i}: {la!r} vs {lb!r}"
            )


def _load_bundle(
    manifest: DatasetManifest,
    index: int,
    config: BundleConfig,
    max_rows: int,
    max_cols: int,
) -> MetricBundle:
    entry = manifest.entries[index]
    m = load_matrix(entry.path, label=entry.label, max_rows=max_rows, max_cols=max_cols)
    if manifest.expected_d is not None and m.d != manifest.expected_d:
        raise ManifestMismatchError(
            f"{entry.path}: width {m.d} does not match expected {manifest.expected_d}"
        )
    return bundle(normalize(m, skip_centering=config.skip_centering), config)


def collect_pairs(
    manifest_a: DatasetManifest,
    manifest_b: DatasetManifest,
    config: BundleConfig,
    *,
    skip_policy: str = "drop",
    threads: int = 1,
    max_rows: int = MAX_ROWS_DEFAULT,
    max_cols: int = MAX_COLS_DEFAULT,
) -> tuple[list[tuple[str, MetricBundle, MetricBundle]], list[SkippedSequence]]:
    """Compute bundle pairs for every matched sequence.

    Degenerate sequences (a zero row after centering on either side) are
    collected under the "drop" policy and re-raised under "strict"; any
    other load or validation failure always propagates.
    """
    if skip_policy not in ("drop", "strict"):
        raise ValueError(f"skip_policy must be 'drop' or 'strict', got {skip_policy!r}")
    _check_paired(manifest_a, manifest_b)

    def worker(i: int):
        label = manifest_a.entries[i].label
        try:
            a = _load_bundle(manifest_a, i, config, max_rows, max_cols)
            b = _load_bundle(manifest_b, i, config, max_rows, max_cols)
        except ZeroVectorAfterCenteringError as exc:
            return ("skip", label, exc)
        return ("ok", label, (a, b))

    indices = range(len(manifest_a))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(worker, indices))
    else:
        results = [worker(i) for i in indices]

    pairs: list[tuple[str, MetricBundle, MetricBundle]] = []
    skipped: list[SkippedSequence] = []
    for status, label, payload in results:
        if status == "skip":
            if skip_policy == "strict":
                raise payload
            skipped.append(SkippedSequence(label, str(payload)))
        else:
            a, b = payload
            pairs.append((label, a, b))
    if not pairs:
        raise AllSequencesSkippedError(
            f"all {len(manifest_a)} sequence pairs were degenerate"
        )
    return pairs, skipped


def collect_bundles(
    manifest: DatasetManifest,
    config: BundleConfig,
    *,
    skip_policy: str = "drop",
    threads: int = 1,
    max_rows: int = MAX_ROWS_DEFAULT,
    max_cols: int = MAX_COLS_DEFAULT,
) -> tuple[list[tuple[str, MetricBundle]], list[SkippedSequence]]:
    """Single-model variant of ``collect_pairs``: one bundle per entry."""
    if skip_policy not in ("drop", "strict"):
        raise ValueError(f"skip_policy must be 'drop' or 'strict', got {skip_policy!r}")
    if len(manifest) == 0:
        raise AllSequencesSkippedError("manifest has no entries")

    def worker(i: int):
        label = manifest.entries[i].label
        try:
            b = _load_bundle(manifest, i, config, max_rows, max_cols)
        except ZeroVectorAfterCenteringError as exc:
            return ("skip", label, exc)
        return ("ok", label, b)

    indices = range(len(manifest))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(worker, indices))
    else:
        results = [worker(i) for i in indices]

    bundles: list[tuple[str, MetricBundle]] = []
    skipped: list[SkippedSequence] = []
    for status, label, payload in results:
        if status == "skip":
            if skip_policy == "strict":
                raise payload
            skipped.append(SkippedSequence(label, str(payload)))
        else:
            bundles.append((label, payload))
    if not bundles:
        raise AllSequencesSkippedError(
            f"all {len(manifest)} sequences were degenerate"
        )
    return bundles, skipped


def _fingerprint(w: Weights, config: BundleConfig, skip_policy: str) -> str:
    canon = jsonout.dumps(
        {
            "schema_version": REPORT_SCHEMA_VERSION,
            "weights": _weights_dict(w),
            "config": _config_dict(config, skip_policy),
        }
    )
    return hashlib.sha256(canon.encode("ascii")).hexdigest()


def compare_corpus(
    manifest_a: DatasetManifest,
    manifest_b: DatasetManifest,
    weights: Weights | None = None,
    config: BundleConfig | None = None,
    *,
    skip_policy: str = "drop",
    threads: int = 1,
    max_rows: int = MAX_ROWS_DEFAULT,
    max_cols: int = MAX_COLS_DEFAULT,
) -> ComparisonReport:
    """Compare two models over paired manifests.

    Manifests must be equal length with pairwise-matching labels; entry
    i of model A corresponds to entry i of model B. Aggregates are
    arithmetic means over the non-skipped pairs, in manifest order.
    """
    w = weights or Weights()
    cfg = config or BundleConfig()
    pairs, skipped = collect_pairs(
        manifest_a,
        manifest_b,
        cfg,
        skip_policy=skip_policy,
        threads=threads,
        max_rows=max_rows,
        max_cols=max_cols,
    )
    rows = tuple(_sequence_comparison(label, a, b, w) for label, a, b in pairs)
    count = len(rows)
    aggregate = AggregateDeltas(
        delta_entropy=sum(r.delta_entropy for r in rows) / count,
        delta_erank=sum(r.delta_erank for r in rows) / count,
        delta_mnn=sum(r.delta_mnn for r in rows) / count,
        composite=sum(r.composite for r in rows) / count,
    )
    return ComparisonReport(
        per_sequence=rows,
        aggregate=aggregate,
        weights_used=w,
        skipped=tuple(skipped),
        config=cfg,
        skip_policy=skip_policy,
        config_fingerprint=_fingerprint(w, cfg, skip_policy),
    )


def weight_sweep(
    pairs: list[tuple[str, MetricBundle, MetricBundle]],
    grid: list[Weights],
) -> list[tuple[Weights, float]]:
    """Aggregate composite per grid point, reusing precomputed bundles."""
    if not grid:
        raise ValueError("weight grid is empty")
    out = []
    for w in grid:
        total = sum(composite_score(a, b, w) for _, a, b in pairs)
        out.append((w, total / len(pairs)))
    return out


def sweep_grid(w_entropy_values: list[float], base: Weights | None = None) -> list[Weights]:
    """Build a grid of weight pairs (w, 1 - w) sharing one delta/normalize setup."""
    template = base or Weights()
    return [
        replace(template, w_entropy=we, w_mnn=1.0 - we) for we in w_entropy_values
    ]


def _weights_dict(w: Weights) -> dict:
    return {
        "w_entropy": w.w_entropy,
        "w_mnn": w.w_mnn,
        "delta_kind": w.delta_kind,
        "normalize_terms": w.normalize_terms,
    }


def _config_dict(config: BundleConfig, skip_policy: str) -> dict:
    # Thread count is deliberately absent: reports must not depend on it.
    return {
        "k": config.k,
        "base": config.base,
        "backend": config.backend,
        "oversample": config.oversample,
        "power_iters": config.power_iters,
        "seed": config.seed,
        "skip_centering": config.skip_centering,
        "skip_policy": skip_policy,
    }


def report_to_dict(report: ComparisonReport) -> dict:
    config = _config_dict(report.config, report.skip_policy)
    config["fingerprint"] = report.config_fingerprint
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "weights": _weights_dict(report.weights_used),
        "config": config,
        "per_sequence": [
            {
                "label": r.label,
                "bundle_a": r.bundle_a.to_dict(),
                "bundle_b": r.bundle_b.to_dict(),
                "delta_entropy": r.delta_entropy,
                "delta_erank": r.delta_erank,
                "delta_mnn": r.delta_mnn,
                "composite": r.composite,
            }
            for r in report.per_sequence
        ],
        "aggregate": {
            "delta_entropy": report.aggregate.delta_entropy,
            "delta_erank": report.aggregate.delta_erank,
            "delta_mnn": report.aggregate.delta_mnn,
            "composite": report.aggregate.composite,
        },
        "skipped": [
            {"label": s.label, "reason": s.reason} for s in report.skipped
        ],
    }


def report_to_json(report: ComparisonReport) -> str:
    return jsonout.dumps(report_to_dict(report))
