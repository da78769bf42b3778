import json
import math

import numpy as np
import pytest
from conftest import make_corpus, random_corpus

from reprmetrics import (
    AllSequencesSkippedError,
    BundleConfig,
    ConfigMismatchError,
    ManifestMismatchError,
    MetricBundle,
    Weights,
    ZeroVectorAfterCenteringError,
    collect_bundles,
    collect_pairs,
    compare_corpus,
    composite_score,
    load_manifest,
    report_to_dict,
    report_to_json,
    sweep_grid,
    weight_sweep,
)

CFG = BundleConfig()


def mk_bundle(entropy=0.5, erank=None, mnn=1.0, n=8, d=4, label="s",
              config=CFG):
    return MetricBundle(
        label=label,
        n_tokens=n,
        hidden_dim=d,
        entropy_nats=entropy,
        entropy_bits=entropy / math.log(2),
        effective_rank=erank if erank is not None else math.exp(entropy),
        mnn_hidden=mnn,
        mnn_covariance=1.0,
        k_used=min(n, d),
        config=config,
    )


class TestWeights:
    def test_defaults(self):
        w = Weights()
        assert (w.w_entropy, w.w_mnn) == (0.5, 0.5)
        assert w.delta_kind == "effective_rank"
        assert w.normalize_terms is True

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            Weights(-0.1, 0.5)

    def test_rejects_zero_sum(self):
        with pytest.raises(ValueError):
            Weights(0.0, 0.0)

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            Weights(delta_kind="mnn")


class TestCompositeScore:
    def test_identical_bundles_exactly_zero(self):
        b = mk_bundle()
        for w in (Weights(), Weights(1, 0), Weights(0.3, 0.9, "entropy", False)):
            assert composite_score(b, b, w) == 0.0

    def test_direct_weighted_sum(self):
        a = mk_bundle(entropy=0.5, mnn=1.0)
        b = mk_bundle(entropy=0.7, mnn=2.5)
        w = Weights(0.5, 0.5, "entropy", normalize_terms=False)
        assert abs(composite_score(a, b, w) - 0.85) < 1e-12

    def test_weight_projection(self):
        a = mk_bundle(entropy=0.5, mnn=1.0)
        b = mk_bundle(entropy=0.9, mnn=2.0)
        w = Weights(1.0, 0.0, "entropy", normalize_terms=False)
        assert composite_score(a, b, w) == b.entropy_nats - a.entropy_nats

    def test_erank_kind_uses_effective_rank(self):
        a = mk_bundle(erank=1.5, mnn=1.0)
        b = mk_bundle(erank=3.5, mnn=1.0)
        w = Weights(1.0, 0.0, "effective_rank", normalize_terms=False)
        assert composite_score(a, b, w) == 2.0

    def test_normalized_terms_divide_by_caps(self):
        a = mk_bundle(entropy=0.5, mnn=1.0, n=8, d=4)
        b = mk_bundle(entropy=0.7, mnn=2.5, n=8, d=4)
        w = Weights(0.5, 0.5, "entropy", normalize_terms=True)
        expected = 0.5 * (0.7 - 0.5) / math.log(4) + 0.5 * (2.5 - 1.0) / 2.0
        assert abs(composite_score(a, b, w) - expected) < 1e-12

    def test_antisymmetry_exact(self):
        rng = np.random.default_rng(51)
        for _ in range(20):
            e1, e2 = rng.uniform(0.1, 1.3, size=2)
            m1, m2 = rng.uniform(0.5, 4.0, size=2)
            a = mk_bundle(entropy=e1, mnn=m1)
            b = mk_bundle(entropy=e2, mnn=m2)
            w = Weights(rng.uniform(0, 1), rng.uniform(0.1, 1))
            assert composite_score(a, b, w) == -composite_score(b, a, w)

    def test_linearity_in_weights(self):
        a = mk_bundle(entropy=0.5, mnn=1.0)
        b = mk_bundle(entropy=0.8, mnn=3.0)
        lo = composite_score(a, b, Weights(1.0, 0.0))
        hi = composite_score(a, b, Weights(0.0, 1.0))
        mid = composite_score(a, b, Weights(0.5, 0.5))
        assert abs(mid - (lo + hi) / 2.0) < 1e-12

    def test_sign_contract(self):
        a = mk_bundle(entropy=0.5)
        w = Weights(0.7, 0.3, "entropy")
        lower = composite_score(a, mk_bundle(entropy=0.6), w)
        higher = composite_score(a, mk_bundle(entropy=0.9), w)
        assert higher > lower

    def test_config_mismatch(self):
        a = mk_bundle(config=BundleConfig(k=3))
        b = mk_bundle(config=BundleConfig(k="full"))
        with pytest.raises(ConfigMismatchError):
            composite_score(a, b, Weights())


class TestCompareCorpus:
    def test_self_comparison_all_zero(self, tmp_path):
        manifest = random_corpus(tmp_path, 4, seed=52)
        report = compare_corpus(load_manifest(manifest), load_manifest(manifest))
        assert all(r.composite == 0.0 for r in report.per_sequence)
        assert report.aggregate.composite == 0.0
        assert report.skipped == ()

    def test_drop_policy_skips_degenerate(self, tmp_path):
        a = random_corpus(tmp_path / "a", 3, seed=53, degenerate=(1,))
        b = random_corpus(tmp_path / "b", 3, seed=54)
        report = compare_corpus(load_manifest(a), load_manifest(b))
        assert len(report.per_sequence) == 2
        assert [s.label for s in report.skipped] == ["seq001"]

    def test_strict_policy_aborts(self, tmp_path):
        a = random_corpus(tmp_path / "a", 3, seed=53, degenerate=(1,))
        b = random_corpus(tmp_path / "b", 3, seed=54)
        with pytest.raises(ZeroVectorAfterCenteringError):
            compare_corpus(load_manifest(a), load_manifest(b),
                           skip_policy="strict")

    def test_all_skipped(self, tmp_path):
        a = random_corpus(tmp_path / "a", 2, seed=55, degenerate=(0, 1))
        b = random_corpus(tmp_path / "b", 2, seed=56)
        with pytest.raises(AllSequencesSkippedError):
            compare_corpus(load_manifest(a), load_manifest(b))

    def test_length_mismatch(self, tmp_path):
        a = random_corpus(tmp_path / "a", 3, seed=57)
        b = random_corpus(tmp_path / "b", 2, seed=58)
        with pytest.raises(ManifestMismatchError):
            compare_corpus(load_manifest(a), load_manifest(b))

    def test_label_mismatch(self, tmp_path):
        rng = np.random.default_rng(59)
        a = make_corpus(tmp_path / "a", {"x": rng.standard_normal((5, 3))})
        b = make_corpus(tmp_path / "b", {"y": rng.standard_normal((5, 3))})
        with pytest.raises(ManifestMismatchError):
            compare_corpus(load_manifest(a), load_manifest(b))

    def test_aggregate_is_mean(self, tmp_path):
        a = random_corpus(tmp_path / "a", 4, seed=60)
        b = random_corpus(tmp_path / "b", 4, seed=61)
        report = compare_corpus(load_manifest(a), load_manifest(b))
        rows = report.per_sequence
        assert abs(
            report.aggregate.composite - sum(r.composite for r in rows) / 4
        ) < 1e-12
        assert abs(
            report.aggregate.delta_mnn - sum(r.delta_mnn for r in rows) / 4
        ) < 1e-12

    def test_composite_recomputable_from_stored_fields(self, tmp_path):
        a = random_corpus(tmp_path / "a", 3, seed=62)
        b = random_corpus(tmp_path / "b", 3, seed=63)
        w = Weights(0.4, 0.6, "entropy", normalize_terms=False)
        report = compare_corpus(load_manifest(a), load_manifest(b), w)
        for r in report.per_sequence:
            again = w.w_entropy * r.delta_entropy + w.w_mnn * r.delta_mnn
            assert abs(r.composite - again) < 1e-12

    def test_threads_do_not_change_report(self, tmp_path):
        a = random_corpus(tmp_path / "a", 5, seed=64, degenerate=(2,))
        b = random_corpus(tmp_path / "b", 5, seed=65)
        one = compare_corpus(load_manifest(a), load_manifest(b), threads=1)
        four = compare_corpus(load_manifest(a), load_manifest(b), threads=4)
        assert report_to_json(one) == report_to_json(four)

    def test_fingerprint_tracks_settings(self, tmp_path):
        a = random_corpus(tmp_path / "a", 2, seed=66)
        base = compare_corpus(load_manifest(a), load_manifest(a))
        reseeded = compare_corpus(load_manifest(a), load_manifest(a),
                                  config=BundleConfig(seed=7))
        assert base.config_fingerprint != reseeded.config_fingerprint
        again = compare_corpus(load_manifest(a), load_manifest(a))
        assert base.config_fingerprint == again.config_fingerprint


class TestCollect:
    def test_collect_bundles_order(self, tmp_path):
        manifest = random_corpus(tmp_path, 4, seed=67)
        bundles, skipped = collect_bundles(load_manifest(manifest), CFG)
        assert [label for label, _ in bundles] == [f"seq{i:03d}" for i in range(4)]
        assert skipped == []

    def test_collect_bundles_strict(self, tmp_path):
        manifest = random_corpus(tmp_path, 2, seed=68, degenerate=(0,))
        with pytest.raises(ZeroVectorAfterCenteringError):
            collect_bundles(load_manifest(manifest), CFG, skip_policy="strict")

    def test_collect_pairs_thread_order(self, tmp_path):
        a = random_corpus(tmp_path / "a", 6, seed=69)
        b = random_corpus(tmp_path / "b", 6, seed=70)
        seq = collect_pairs(load_manifest(a), load_manifest(b), CFG)[0]
        par = collect_pairs(load_manifest(a), load_manifest(b), CFG, threads=3)[0]
        assert [p[0] for p in seq] == [p[0] for p in par]
        assert seq == par


class TestWeightSweep:
    def test_projections(self, tmp_path):
        a = random_corpus(tmp_path / "a", 3, seed=71)
        b = random_corpus(tmp_path / "b", 3, seed=72)
        pairs, _ = collect_pairs(load_manifest(a), load_manifest(b), CFG)
        raw = Weights(1.0, 0.0, "effective_rank", normalize_terms=False)
        rows = weight_sweep(pairs, [raw, Weights(0.0, 1.0, "effective_rank", False)])
        report = compare_corpus(load_manifest(a), load_manifest(b))
        assert abs(rows[0][1] - report.aggregate.delta_erank) < 1e-12
        assert abs(rows[1][1] - report.aggregate.delta_mnn) < 1e-12

    def test_midpoint_linearity(self, tmp_path):
        a = random_corpus(tmp_path / "a", 3, seed=73)
        b = random_corpus(tmp_path / "b", 3, seed=74)
        pairs, _ = collect_pairs(load_manifest(a), load_manifest(b), CFG)
        grid = [Weights(1.0, 0.0), Weights(0.0, 1.0), Weights(0.5, 0.5)]
        rows = weight_sweep(pairs, grid)
        assert abs(rows[2][1] - (rows[0][1] + rows[1][1]) / 2.0) < 1e-12

    def test_self_comparison_zero(self, tmp_path):
        manifest = random_corpus(tmp_path, 2, seed=75)
        pairs, _ = collect_pairs(load_manifest(manifest), load_manifest(manifest), CFG)
        rows = weight_sweep(pairs, [Weights(0.5, 0.5)])
        assert rows[0][1] == 0.0

    def test_empty_grid_rejected(self, tmp_path):
        manifest = random_corpus(tmp_path, 2, seed=76)
        pairs, _ = collect_pairs(load_manifest(manifest), load_manifest(manifest), CFG)
        with pytest.raises(ValueError):
            weight_sweep(pairs, [])

    def test_sweep_grid_builds_complements(self):
        grid = sweep_grid([1.0, 0.25])
        assert [(w.w_entropy, w.w_mnn) for w in grid] == [(1.0, 0.0), (0.25, 0.75)]
        assert all(w.delta_kind == "effective_rank" for w in grid)


class TestReportSerialization:
    def test_top_level_shape(self, tmp_path):
        manifest = random_corpus(tmp_path, 2, seed=77)
        report = compare_corpus(load_manifest(manifest), load_manifest(manifest))
        doc = json.loads(report_to_json(report))
        assert list(doc) == [
            "schema_version", "weights", "config", "per_sequence",
            "aggregate", "skipped",
        ]
        assert doc["schema_version"] == "1"
        assert doc["config"]["fingerprint"] == report.config_fingerprint
        assert "threads" not in doc["config"]
        row = doc["per_sequence"][0]
        assert set(row) == {
            "label", "bundle_a", "bundle_b", "delta_entropy", "delta_erank",
            "delta_mnn", "composite",
        }

    def test_floats_round_trip(self, tmp_path):
        a = random_corpus(tmp_path / "a", 2, seed=78)
        b = random_corpus(tmp_path / "b", 2, seed=79)
        report = compare_corpus(load_manifest(a), load_manifest(b))
        doc = json.loads(report_to_json(report))
        stored = doc["per_sequence"][0]["bundle_a"]["entropy_nats"]
        assert stored == report.per_sequence[0].bundle_a.entropy_nats

    def test_dict_and_json_agree(self, tmp_path):
        manifest = random_corpus(tmp_path, 2, seed=80)
        report = compare_corpus(load_manifest(manifest), load_manifest(manifest))
        assert json.loads(report_to_json(report)) == json.loads(
            json.dumps(report_to_dict(report))
        )
