"""Loading, validation, and writing of hidden-state matrices.

Two on-disk formats are accepted:

* A subset of the NPY binary format, version 1.0 only: little-endian
  ``<f4`` or ``<f8``, C order, 2-D shape. Fortran-order files and any
  other dtype or version are rejected.
* A CSV fallback: one row of numbers per line, uniform column count,
  no header line.

Values are always promoted to float64 in memory; loaded matrices are
immutable and safe to share across threads. Manifests are UTF-8 text,
one ``<path>\\t<label>`` entry per line, paths resolved relative to the
manifest's own directory.
"""

from __future__ import annotations

import ast
import csv
import io
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import (
    DuplicateEntryError,
    EmptyManifestError,
    FileUnreadableError,
    MalformedHeaderError,
    ManifestMismatchError,
    MatrixTooLargeError,
    NonFiniteValueError,
    WrongRankError,
)

MAX_ROWS_DEFAULT = 65_536
MAX_COLS_DEFAULT = 16_384

_NPY_MAGIC = b"\x93NUMPY"
_DESCR_TO_SOURCE = {"<f4": "float32", "<f8": "float64"}


@dataclass(frozen=True)
class HiddenStateMatrix:
    """A validated n x d activation matrix for one sequence.

    ``data`` is float64 and read-only regardless of the on-disk
    precision recorded in ``dtype_source``.
    """

    data: np.ndarray
    dtype_source: str
    label: str = ""

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise WrongRankError(f"expected a 2-D matrix, got {arr.ndim}-D")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise MalformedHeaderError(f"empty shape {arr.shape} is not allowed")
        if self.dtype_source not in ("float32", "float64"):
            raise ValueError(f"unknown dtype_source {self.dtype_source!r}")
        _check_finite(arr, self.label)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        """Token count (number of rows)."""
        return self.data.shape[0]

    @property
    def d(self) -> int:
        """Hidden width (number of columns)."""
        return self.data.shape[1]


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    label: str


@dataclass(frozen=True)
class DatasetManifest:
    """An ordered list of (path, label) pairs, optionally pinned to one width."""

    entries: tuple[ManifestEntry, ...]
    expected_d: int | None = None
    source: Path | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.entries)


def _check_finite(arr: np.ndarray, label: str) -> None:
    if np.isfinite(arr).all():
        return
    bad = np.argwhere(~np.isfinite(arr))[0]
    raise NonFiniteValueError(int(bad[0]), int(bad[1]), label)


def _check_caps(n_rows: int, n_cols: int, max_rows: int, max_cols: int) -> None:
    if n_rows > max_rows or n_cols > max_cols:
        raise MatrixTooLargeError(
            f"shape ({n_rows}, {n_cols}) exceeds the cap of "
            f"{max_rows} rows x {max_cols} cols"
        )


def _parse_npy(f: io.BufferedReader, path: Path, max_rows: int, max_cols: int) -> tuple[np.ndarray, str]:
    # Magic bytes were already consumed by the caller.
    version = f.read(2)
    if version != b"\x01\x00":
        raise MalformedHeaderError(f"{path}: unsupported format version {version!r}")
    raw_len = f.read(2)
    if len(raw_len) != 2:
        raise MalformedHeaderError(f"{path}: truncated header length field")
    (header_len,) = struct.unpack("<H", raw_len)
    raw_header = f.read(header_len)
    if len(raw_header) != header_len:
        raise MalformedHeaderError(f"{path}: truncated header")
    try:
        header = ast.literal_eval(raw_header.decode("ascii"))
    except (UnicodeDecodeError, ValueError, SyntaxError) as exc:
        raise MalformedHeaderError(f"{path}: unparseable header ({exc})") from None
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise MalformedHeaderError(f"{path}: header must declare descr, fortran_order, shape")

    descr = header["descr"]
    if descr not in _DESCR_TO_SOURCE:
        raise MalformedHeaderError(
            f"{path}: dtype {descr!r} not supported (only '<f4' and '<f8')"
        )
    if header["fortran_order"] is not False:
        raise MalformedHeaderError(f"{path}: Fortran-order files are not supported")
    shape = header["shape"]
    if not (isinstance(shape, tuple) and all(isinstance(s, int) for s in shape)):
        raise MalformedHeaderError(f"{path}: invalid shape field {shape!r}")
    if len(shape) != 2:
        raise WrongRankError(f"{path}: expected a 2-D array, header declares {len(shape)}-D")
    n_rows, n_cols = shape
    if n_rows < 1 or n_cols < 1:
        raise MalformedHeaderError(f"{path}: degenerate shape {shape}")
    # Caps are checked before the payload is touched so memory use stays
    # bounded by the header alone.
    _check_caps(n_rows, n_cols, max_rows, max_cols)

    itemsize = 4 if descr == "<f4" else 8
    expected = n_rows * n_cols * itemsize
    payload = f.read(expected)
    if len(payload) != expected:
        raise MalformedHeaderError(
            f"{path}: payload holds {len(payload)} bytes, header requires {expected}"
        )
    if f.read(1):
        raise MalformedHeaderError(f"{path}: trailing bytes after payload")
    arr = np.frombuffer(payload, dtype=np.dtype(descr)).reshape(n_rows, n_cols)
    return arr, _DESCR_TO_SOURCE[descr]


def _parse_csv(path: Path, max_rows: int, max_cols: int) -> np.ndarray:
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError:
        raise MalformedHeaderError(f"{path}: neither a supported NPY file nor UTF-8 text") from None
    except OSError as exc:
        raise FileUnreadableError(f"{path}: {exc}") from None

    rows: list[list[float]] = []
    n_cols: int | None = None
    for line_no, record in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not record:
            raise MalformedHeaderError(f"{path}: blank line {line_no}")
        if n_cols is None:
            n_cols = len(record)
        elif len(record) != n_cols:
            raise MalformedHeaderError(
                f"{path}: line {line_no} has {len(record)} columns, expected {n_cols}"
            )
        try:
            rows.append([float(tok) for tok in record])
        except ValueError:
            raise MalformedHeaderError(f"{path}: non-numeric value on line {line_no}") from None
    if not rows:
        raise MalformedHeaderError(f"{path}: file contains no rows")
    _check_caps(len(rows), n_cols or 0, max_rows, max_cols)
    return np.array(rows, dtype=np.float64)


def load_matrix(
    path: str | Path,
    *,
    label: str | None = None,
    max_rows: int = MAX_ROWS_DEFAULT,
    max_cols: int = MAX_COLS_DEFAULT,
) -> HiddenStateMatrix:
    """Load one hidden-state matrix from an NPY or CSV file.

    The format is detected from the file's leading bytes. Values are
    promoted to float64 and checked for NaN/infinity; the first
    non-finite entry is reported with its row and column.
    """
    path = Path(path)
    if label is None:
        label = path.stem
    try:
        with path.open("rb") as f:
            head = f.read(len(_NPY_MAGIC))
            if head == _NPY_MAGIC:
                arr, dtype_source = _parse_npy(f, path, max_rows, max_cols)
                return HiddenStateMatrix(arr, dtype_source, label)
    except OSError as exc:
        raise FileUnreadableError(f"{path}: {exc}") from None
    arr = _parse_csv(path, max_rows, max_cols)
    return HiddenStateMatrix(arr, "float64", label)


def write_matrix(
    matrix: HiddenStateMatrix | np.ndarray,
    path: str | Path,
    *,
    dtype: str = "float64",
) -> Path:
    """Write a matrix as an NPY v1.0 file.

    Defaults to float64 so that write(load(p)) reloads bit-identically;
    float32 is available for fixture files.
    """
    if isinstance(matrix, HiddenStateMatrix):
        arr = matrix.data
    else:
        arr = np.ascontiguousarray(matrix, dtype=np.float64)
        if arr.ndim != 2:
            raise WrongRankError(f"expected a 2-D matrix, got {arr.ndim}-D")
    descr = {"float64": "<f8", "float32": "<f4"}.get(dtype)
    if descr is None:
        raise ValueError(f"unsupported dtype {dtype!r}")
    payload = np.ascontiguousarray(arr, dtype=np.dtype(descr))

    header = "{'descr': '%s', 'fortran_order': False, 'shape': (%d, %d), }" % (
        descr,
        arr.shape[0],
        arr.shape[1],
    )
    # Pad so magic + version + length field + header is a multiple of 64,
    # with a terminating newline, matching common NPY writers.
    base = len(_NPY_MAGIC) + 2 + 2
    total = base + len(header) + 1
    pad = (64 - total % 64) % 64
    header = header + " " * pad + "\n"

    path = Path(path)
    with path.open("wb") as f:
        f.write(_NPY_MAGIC)
        f.write(b"\x01\x00")
        f.write(struct.pack("<H", len(header)))
        f.write(header.encode("ascii"))
        f.write(payload.tobytes(order="C"))
    return path


def load_manifest(path: str | Path, *, expected_d: int | None = None) -> DatasetManifest:
    """Load a dataset manifest.

    Each non-blank line is ``<path>\\t<label>``; a line without a tab is
    a bare path whose label defaults to the file stem. Relative paths
    are resolved against the manifest's directory. Duplicate paths are
    rejected.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileUnreadableError(f"{path}: {exc}") from None

    base = path.parent
    entries: list[ManifestEntry] = []
    seen: set[Path] = set()
    for line in text.splitlines():
        line = line.rstrip("\r")
        if not line.strip():
            continue
        raw_path, sep, raw_label = line.partition("\t")
        entry_path = Path(raw_path.strip())
        if not entry_path.is_absolute():
            entry_path = base / entry_path
        label = raw_label.strip() if sep and raw_label.strip() else entry_path.stem
        key = entry_path.resolve()
        if key in seen:
            raise DuplicateEntryError(f"{path}: duplicate entry {raw_path.strip()!r}")
        seen.add(key)
        entries.append(ManifestEntry(entry_path, label))
    if not entries:
        raise EmptyManifestError(f"{path}: manifest lists no files")
    return DatasetManifest(tuple(entries), expected_d=expected_d, source=path)


def load_entries(
    manifest: DatasetManifest,
    *,
    max_rows: int = MAX_ROWS_DEFAULT,
    max_cols: int = MAX_COLS_DEFAULT,
) -> Iterator[HiddenStateMatrix]:
    """Load every matrix in a manifest, enforcing ``expected_d`` if set."""
    for entry in manifest.entries:
        m = load_matrix(entry.path, label=entry.label, max_rows=max_rows, max_cols=max_cols)
        if manifest.expected_d is not None and m.d != manifest.expected_d:
            raise ManifestMismatchError(
                f"{entry.path}: width {m.d} does not match expected {manifest.expected_d}"
            )
        yield m
