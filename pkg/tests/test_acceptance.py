"""End-to-end acceptance battery.

Each test prints one ``[acceptance] <name>: PASS/FAIL`` line; run with
``pytest -s tests/test_acceptance.py`` to see them as they complete.
"""

import functools
import math
import time

import numpy as np
import pytest
from conftest import random_corpus

from reprmetrics import (
    BundleConfig,
    HiddenStateMatrix,
    Spectrum,
    Weights,
    bundle,
    composite_score,
    covariance,
    exact_spectrum,
    normalize,
    randomized_singular_values,
    singular_values,
    spectral_entropy,
)
from reprmetrics.cli import main as cli_main
from reprmetrics.metrics import effective_rank, nuclear_norm
from reprmetrics.reference import direct_entropy, jacobi_eigenvalues

FIELDS = ("entropy_nats", "entropy_bits", "effective_rank",
          "mnn_hidden", "mnn_covariance")


def criterion(name):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                result = fn(*args, **kwargs)
            except BaseException:
                print(f"\n[acceptance] {name}: FAIL")
                raise
            print(f"\n[acceptance] {name}: PASS")
            return result

        return wrapper

    return decorate


def spectrum_of(values):
    arr = np.array(sorted(values, reverse=True), dtype=np.float64)
    return Spectrum(arr, "covariance", "exact", arr.size)


@pytest.fixture(scope="module")
def oracle_battery():
    """200 seeded matrices up to 64x64, pushed through both the fast
    paths and the oracles once; shared by the equivalence and
    cross-spectrum criteria."""
    rng = np.random.default_rng(4242)
    worst_eigen = worst_entropy = worst_cross = 0.0
    start = time.perf_counter()
    for _ in range(200):
        n = int(rng.integers(2, 65))
        d = int(rng.integers(2, 65))
        m = HiddenStateMatrix(rng.standard_normal((n, d)), "float64", "case")
        states = normalize(m)
        cov = covariance(states)

        sp = exact_spectrum(cov)
        oracle = jacobi_eigenvalues(cov.data).eigenvalues
        worst_eigen = max(worst_eigen, float(np.abs(sp.values - oracle).max()))
        worst_entropy = max(
            worst_entropy,
            abs(spectral_entropy(sp) - direct_entropy(sp.values)),
        )

        sv = singular_values(states.data)
        width = sv.size
        gap = float(np.abs(sv * sv / n - sp.values[:width]).max())
        if width < sp.values.size:
            gap = max(gap, float(sp.values[width:].max()))
        worst_cross = max(worst_cross, gap)
    elapsed = time.perf_counter() - start
    return {
        "worst_eigen": worst_eigen,
        "worst_entropy": worst_entropy,
        "worst_cross": worst_cross,
        "elapsed": elapsed,
    }


@criterion("trace-identity")
def test_a1_trace_identity():
    rng = np.random.default_rng(1111)
    start = time.perf_counter()
    for _ in range(100):
        n = int(rng.integers(2, 129))
        d = int(rng.integers(2, 65))
        m = HiddenStateMatrix(rng.standard_normal((n, d)), "float64", "case")
        states = normalize(m)
        assert abs(covariance(states).trace - 1.0) < 1e-9
        assert abs(bundle(states).mnn_covariance - 1.0) < 1e-8
    assert time.perf_counter() - start < 5.0


@criterion("oracle-equivalence")
def test_a2_oracle_equivalence(oracle_battery):
    assert oracle_battery["worst_eigen"] < 1e-8
    assert oracle_battery["worst_entropy"] < 1e-10
    assert oracle_battery["elapsed"] < 30.0


@criterion("cross-spectrum")
def test_a3_cross_spectrum_consistency(oracle_battery):
    assert oracle_battery["worst_cross"] < 1e-8


@criterion("analytic-anchors")
def test_a4_analytic_anchors():
    uniform = spectrum_of([0.5, 0.5])
    assert abs(spectral_entropy(uniform) - math.log(2)) < 1e-12
    assert abs(effective_rank(uniform) - 2.0) < 1e-10

    skewed = spectrum_of([2.0 / 3.0, 1.0 / 3.0])
    assert abs(spectral_entropy(skewed) - direct_entropy(skewed.values)) < 1e-12
    assert abs(spectral_entropy(skewed) - 0.63651417) < 1e-7
    assert abs(effective_rank(skewed) - 1.88988157) < 1e-6


@criterion("invariance-battery")
def test_a5_invariance_battery():
    rng = np.random.default_rng(2222)
    arr = rng.standard_normal((24, 10))
    base = bundle(normalize(HiddenStateMatrix(arr, "float64", "base")))

    variants = [c * arr for c in (1e-3, 1.0, 1e3)]
    variants.append(arr + rng.standard_normal(10))
    variants.append(arr[rng.permutation(24)])
    for variant in variants:
        b = bundle(normalize(HiddenStateMatrix(variant, "float64", "v")))
        for field in FIELDS:
            assert abs(getattr(b, field) - getattr(base, field)) < 1e-9


@criterion("composite-algebra")
def test_a6_composite_algebra():
    rng = np.random.default_rng(3333)
    m_a = HiddenStateMatrix(rng.standard_normal((12, 6)), "float64", "s")
    m_b = HiddenStateMatrix(rng.standard_normal((12, 6)), "float64", "s")
    a = bundle(normalize(m_a))
    b = bundle(normalize(m_b))

    weight_sets = [Weights(), Weights(1.0, 0.0), Weights(0.2, 0.8, "entropy"),
                   Weights(0.7, 0.3, "entropy", normalize_terms=False)]
    for w in weight_sets:
        assert composite_score(a, b, w) == -composite_score(b, a, w)

    lo = composite_score(a, b, Weights(1.0, 0.0))
    hi = composite_score(a, b, Weights(0.0, 1.0))
    mid = composite_score(a, b, Weights(0.5, 0.5))
    assert abs(mid - (lo + hi) / 2.0) < 1e-12

    again = bundle(normalize(m_a))
    assert again == a
    for w in weight_sets:
        assert composite_score(a, again, w) == 0.0


@criterion("randomized-backend")
def test_a7_randomized_backend():
    start = time.perf_counter()
    size, k = 1024, 32
    true_values = np.concatenate(
        [np.linspace(10.0, 5.0, k), np.linspace(0.4, 0.01, size - k)]
    )
    assert true_values[k - 1] / true_values[k] >= 10.0
    rng = np.random.default_rng(4444)
    u, _ = np.linalg.qr(rng.standard_normal((size, size)))
    v, _ = np.linalg.qr(rng.standard_normal((size, size)))
    h = (u * true_values) @ v.T

    exact_top = singular_values(h)[:k]
    approx = randomized_singular_values(h, k, power_iters=2, seed=42)
    rel = np.abs(approx - exact_top) / exact_top
    assert rel.max() < 1e-4

    again = randomized_singular_values(h, k, power_iters=2, seed=42)
    np.testing.assert_array_equal(approx, again)
    assert time.perf_counter() - start < 60.0


@criterion("efficiency-ordering")
def test_a8_efficiency_ordering():
    rng = np.random.default_rng(5555)
    size = 2048
    h = rng.standard_normal((size, size)) * np.geomspace(1.0, 1e-3, size)

    start = time.perf_counter()
    singular_values(h)
    exact_seconds = time.perf_counter() - start

    start = time.perf_counter()
    randomized_singular_values(h, 64, seed=42)
    randomized_seconds = time.perf_counter() - start

    assert randomized_seconds < 0.5 * exact_seconds


@criterion("determinism")
def test_a9_determinism(tmp_path, capsys):
    a = random_corpus(tmp_path / "a", 4, seed=6666)
    b = random_corpus(tmp_path / "b", 4, seed=7777)
    blobs = []
    for threads in ("1", "4"):
        for run in range(2):
            out = tmp_path / f"report-t{threads}-{run}.json"
            code = cli_main(["compare", str(a), str(b),
                             "--threads", threads, "--output", str(out)])
            capsys.readouterr()
            assert code == 0
            blobs.append(out.read_bytes())
    assert all(blob == blobs[0] for blob in blobs), "reports differ"


@criterion("randomized-bundle-coherence")
def test_bundle_truncation_matches_backends():
    # Supporting check: the two backends agree end to end through the
    # bundle layer, not only at the raw spectrum level.
    rng = np.random.default_rng(8888)
    arr = rng.standard_normal((96, 24)) * np.geomspace(1.0, 1e-4, 24)
    states = normalize(HiddenStateMatrix(arr, "float64", "t"))
    exact = bundle(states, BundleConfig(k=6))
    approx = bundle(states, BundleConfig(k=6, backend="randomized"))
    assert abs(approx.mnn_hidden - exact.mnn_hidden) / exact.mnn_hidden < 1e-3
    assert abs(approx.entropy_nats - exact.entropy_nats) < 1e-3
