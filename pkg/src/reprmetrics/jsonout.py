"""Deterministic JSON emission.

Report files must be byte-identical across runs, and floating-point
values must carry 17 significant digits. The stdlib encoder formats
floats via repr (shortest round trip), so this module emits the small
report schema itself: insertion-ordered keys, 2-space indentation,
ASCII-escaped strings, floats through ``%.17g``.
"""

from __future__ import annotations

import json
import math


def format_float(value: float) -> str:
    if not math.isfinite(value):
        raise ValueError(f"cannot serialize non-finite value {value!r}")
    return format(value, ".17g")


def _emit(value, out: list[str], depth: int) -> None:
    pad = "  " * depth
    inner = "  " * (depth + 1)
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=True))
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(format_float(value))
    elif isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        out.append("{\n")
        for i, (key, val) in enumerate(value.items()):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            out.append(f"{inner}{json.dumps(key, ensure_ascii=True)}: ")
            _emit(val, out, depth + 1)
            out.append(",\n" if i < len(value) - 1 else "\n")
        out.append(f"{pad}}}")
    elif isinstance(value, (list, tuple)):
        if not value:
            out.append("[]")
            return
        out.append("[\n")
        for i, val in enumerate(value):
            out.append(inner)
            _emit(val, out, depth + 1)
            out.append(",\n" if i < len(value) - 1 else "\n")
        out.append(f"{pad}]")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(value) -> str:
    """Serialize to a deterministic, pretty-printed JSON string."""
    out: list[str] = []
    _emit(value, out, 0)
    return "".join(out)
