"""Run a small pretrained transformer over texts and dump hidden states.

One ``.npy`` file per input text, shape (n_tokens, d), plus a
``manifest.tsv`` listing them, in the interchange format the
reprmetrics package consumes. Inference runs in eval mode with
gradients off, so output is deterministic for a fixed model and
inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

_DTYPES = ("float32", "float64")


class ExportError(Exception):
    """Base class for exporter failures."""


class ModelLoadError(ExportError):
    """The model or tokenizer could not be loaded."""


class LayerOutOfRangeError(ModelLoadError):
    """The requested layer index does not exist in the loaded model."""


class EmptySequenceError(ExportError):
    """A text tokenized to fewer than two tokens.

    Single-row matrices are degenerate under mean-centering, so the
    downstream pipeline could never score them; reject at the source.
    """


@dataclass(frozen=True)
class ExportSpec:
    model_id: str
    layer: int | str = "last"
    texts: Sequence[str] | str | Path = field(default=())
    out_dir: str | Path = "."
    dtype: str = "float32"

    def __post_init__(self) -> None:
        if self.dtype not in _DTYPES:
            raise ValueError(f"dtype must be one of {_DTYPES}, got {self.dtype!r}")
        if self.layer != "last" and (
            isinstance(self.layer, bool) or not isinstance(self.layer, int)
        ):
            raise ValueError(f"layer must be an integer or 'last', got {self.layer!r}")


def _read_texts(spec: ExportSpec) -> list[str]:
    if isinstance(spec.texts, (str, Path)):
        try:
            raw = Path(spec.texts).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise ExportError(f"cannot read input file {spec.texts}: {exc}") from exc
    else:
        raw = list(spec.texts)
    texts = [line.strip() for line in raw if line.strip()]
    if not texts:
        raise ExportError("no input texts")
    return texts


def _load_model(model_id: str):
    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModel.from_pretrained(model_id)
    except Exception as exc:
        raise ModelLoadError(f"cannot load {model_id!r}: {exc}") from exc
    model.eval()
    return tokenizer, model


def _resolve_layer(layer: int | str, count: int) -> int:
    if layer == "last":
        return count - 1
    index = layer if layer >= 0 else count + layer
    if not 0 <= index < count:
        raise LayerOutOfRangeError(
            f"layer {layer} out of range; model has hidden states 0..{count - 1}"
        )
    return index


def export_hidden_states(spec: ExportSpec) -> Path:
    """Export per-text hidden states; returns the manifest path."""
    texts = _read_texts(spec)
    tokenizer, model = _load_model(spec.model_id)
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    entries: list[tuple[str, str]] = []
    layer_index: int | None = None
    with torch.no_grad():
        for i, text in enumerate(texts):
            label = f"seq{i:03d}"
            encoded = tokenizer(text, return_tensors="pt")
            n_tokens = int(encoded["input_ids"].shape[1])
            if n_tokens < 2:
                raise EmptySequenceError(
                    f"{label}: tokenized to {n_tokens} token(s); need at least 2"
                )
            output = model(**encoded, output_hidden_states=True)
            states = output.hidden_states
            if layer_index is None:
                layer_index = _resolve_layer(spec.layer, len(states))
            arr = states[layer_index][0].cpu().numpy()
            if arr.shape[0] != n_tokens:
                raise ExportError(
                    f"{label}: model returned {arr.shape[0]} rows for "
                    f"{n_tokens} tokens"
                )
            arr = np.ascontiguousarray(arr, dtype=spec.dtype)
            np.save(out_dir / f"{label}.npy", arr)
            entries.append((f"{label}.npy", label))

    manifest = out_dir / "manifest.tsv"
    manifest.write_text(
        "".join(f"{path}\t{label}\n" for path, label in entries), encoding="utf-8"
    )
    return manifest
