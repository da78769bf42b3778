import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from reprmetrics import write_matrix

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=25,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    monkeypatch.delenv("REPRMETRICS_THREADS", raising=False)
    monkeypatch.delenv("REPRMETRICS_VERIFY_PERTURB", raising=False)


def make_corpus(root, arrays, name="manifest.tsv"):
    """Write one .npy per array plus a manifest; returns the manifest path.

    ``arrays`` maps label -> 2-D array.
    """
    root.mkdir(parents=True, exist_ok=True)
    manifest = root / name
    with manifest.open("w", encoding="utf-8") as f:
        for label, arr in arrays.items():
            path = root / f"{label}.npy"
            write_matrix(np.asarray(arr, dtype=np.float64), path)
            f.write(f"{path.name}\t{label}\n")
    return manifest


def random_corpus(root, count, d=6, seed=0, degenerate=(), name="manifest.tsv"):
    """Random corpus with optional constant (degenerate) sequences."""
    rng = np.random.default_rng(seed)
    arrays = {}
    for i in range(count):
        label = f"seq{i:03d}"
        if i in degenerate:
            arrays[label] = np.ones((4, d))
        else:
            n = int(rng.integers(4, 12))
            arrays[label] = rng.standard_normal((n, d))
    return make_corpus(root, arrays, name=name)
