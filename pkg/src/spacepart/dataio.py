"""Dataset file formats: a compact binary layout and plain CSV.

Binary layout: magic bytes ``NDPT``, then point count and dimensionality as
little-endian u32, then count*dims little-endian IEEE-754 f64 in row-major
order. Ids are implicit row indices, so saving a dataset with custom ids drops
them by design.

CSV: one point per row of comma-separated decimal floats, LF line endings, no
header unless requested. Ids default to the row index; an id column can be
named on load.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import Dataset

MAGIC = b"NDPT"
_HEADER = struct.Struct("<II")

__all__ = ["DatasetFormatError", "save_dataset", "load_dataset", "detect_format", "MAGIC"]


class DatasetFormatError(ValueError):
    """Raised for malformed dataset files; the message carries line/offset context."""


def detect_format(path) -> str:
    """'binary' if the file starts with the magic bytes, else 'csv'."""
    with open(path, "rb") as f:
        head = f.read(len(MAGIC))
    return "binary" if head == MAGIC else "csv"


def _format_for(path, fmt: str | None) -> str:
    if fmt is not None:
        if fmt not in ("binary", "csv"):
            raise ValueError(f"unknown dataset format {fmt!r}")
        return fmt
    return "csv" if Path(path).suffix.lower() == ".csv" else "binary"


def save_dataset(ds: Dataset, path, format: str | None = None, header: bool = False) -> None:
    """Write a dataset; format defaults from the file suffix (.csv -> CSV)."""
    fmt = _format_for(path, format)
    if fmt == "binary":
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(_HEADER.pack(ds.n, ds.dims))
            f.write(np.ascontiguousarray(ds.coords, dtype="<f8").tobytes())
    else:
        with open(path, "w", encoding="utf-8", newline="") as f:
            if header:
                f.write(",".join(f"x{j}" for j in range(ds.dims)) + "\n")
            for row in ds.coords:
                f.write(",".join(repr(float(v)) for v in row) + "\n")


def load_dataset(path, format: str | None = None, header: bool = False, id_column: int | None = None) -> Dataset:
    """Read a dataset, auto-detecting binary vs CSV from the magic bytes.

    ``header`` skips the first CSV line; ``id_column`` names the CSV column
    holding integer point ids (remaining columns are coordinates).
    """
    if format is None:
        format = detect_format(path)
    if format == "binary":
        return _load_binary(path)
    if format == "csv":
        return _load_csv(path, header=header, id_column=id_column)
    raise ValueError(f"unknown dataset format {format!r}")


def _load_binary(path) -> Dataset:
    with open(path, "rb") as f:
        raw = f.read()
    hdr_len = len(MAGIC) + _HEADER.size
    if len(raw) < hdr_len:
        raise DatasetFormatError(f"{path}: truncated header, got {len(raw)} bytes, need {hdr_len}")
    if raw[: len(MAGIC)] != MAGIC:
        raise DatasetFormatError(f"{path}: bad magic bytes {raw[:len(MAGIC)]!r} at offset 0")
    n, dims = _HEADER.unpack_from(raw, len(MAGIC))
    if n == 0 or dims == 0:
        raise DatasetFormatError(f"{path}: header declares empty dataset ({n} x {dims})")
    expected = n * dims * 8
    payload = raw[hdr_len:]
    if len(payload) != expected:
        raise DatasetFormatError(
            f"{path}: coordinate payload is {len(payload)} bytes at offset {hdr_len}, expected {expected}"
        )
    coords = np.frombuffer(payload, dtype="<f8").reshape(n, dims).astype(np.float64)
    finite = np.isfinite(coords).all(axis=1)
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0])
        raise DatasetFormatError(f"{path}: non-finite value in point row {bad}")
    return Dataset(coords)


def _load_csv(path, header: bool = False, id_column: int | None = None) -> Dataset:
    rows: list[list[float]] = []
    ids: list[int] = []
    width = None
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if header and lineno == 1:
                continue
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if width is None:
                width = len(fields)
                if id_column is not None and not 0 <= id_column < width:
                    raise DatasetFormatError(f"{path}: id column {id_column} out of range for {width} fields")
            elif len(fields) != width:
                raise DatasetFormatError(f"{path}: line {lineno}: expected {width} fields, got {len(fields)}")
            try:
                values = [float(tok) for tok in fields]
            except ValueError:
                raise DatasetFormatError(f"{path}: line {lineno}: unparseable value in {line!r}") from None
            for tok, v in zip(fields, values):
                if not np.isfinite(v):
                    raise DatasetFormatError(f"{path}: line {lineno}: non-finite value {tok!r}")
            if id_column is not None:
                raw_id = values.pop(id_column)
                if raw_id != int(raw_id):
                    raise DatasetFormatError(f"{path}: line {lineno}: id {raw_id!r} is not an integer")
                ids.append(int(raw_id))
            rows.append(values)
    if not rows:
        raise DatasetFormatError(f"{path}: no data rows")
    coords = np.array(rows, dtype=np.float64)
    try:
        return Dataset(coords, ids=np.array(ids, dtype=np.int64) if ids else None)
    except ValueError as e:
        raise DatasetFormatError(f"{path}: {e}") from None
