"""UEP binary container and CSV import/export for ensemble predictions.

Layout (all little-endian):

    magic   4 bytes ASCII "UEP1"
    header  3x uint32: N, S, K
    flags   1 byte; bit 0 set means per-sample weights follow
    weights S float64 (only when flagged)
    payload N*S*K float64, row-major [input][sample][class]
    footer  uint64 check value = payload byte count (8*N*S*K)

Write-then-read round-trips bit-identically: rows already summing to one
within 1e-12 are never touched on load.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    BadMagicError,
    ChecksumError,
    RowSumError,
    TruncatedPayloadError,
)
from .estimator import EnsembleBatch, ROW_SUM_TOL

MAGIC = b"UEP1"
_HEADER = struct.Struct("<4sIIIB")
_FOOTER = struct.Struct("<Q")

FLAG_WEIGHTS = 0x01


def write_uep(batch: EnsembleBatch, path: str | Path) -> None:
    """Serialize a batch; identifiers are positional and not stored."""
    n, s, k = batch.probs.shape
    flags = FLAG_WEIGHTS if batch.weights is not None else 0
    payload = np.ascontiguousarray(batch.probs, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, n, s, k, flags))
        if batch.weights is not None:
            fh.write(np.ascontiguousarray(batch.weights, dtype="<f8").tobytes())
        fh.write(payload)
        fh.write(_FOOTER.pack(len(payload)))


def read_uep(path: str | Path) -> EnsembleBatch:
    """Load a batch, checking magic, sizes, footer and row sums."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise TruncatedPayloadError("file shorter than the fixed header")
    magic, n, s, k, flags = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    offset = _HEADER.size
    weights = None
    if flags & FLAG_WEIGHTS:
        end = offset + 8 * s
        if len(raw) < end:
            raise TruncatedPayloadError("file ends inside the weights block")
        weights = np.frombuffer(raw[offset:end], dtype="<f8").copy()
        offset = end
    payload_bytes = 8 * n * s * k
    end = offset + payload_bytes
    if len(raw) < end + _FOOTER.size:
        raise TruncatedPayloadError(
            f"payload or footer truncated: have {len(raw)} bytes, need {end + _FOOTER.size}"
        )
    (check,) = _FOOTER.unpack_from(raw, end)
    if check != payload_bytes:
        raise ChecksumError(
            f"footer check {check} does not match payload byte count {payload_bytes}"
        )
    probs = (
        np.frombuffer(raw[offset:end], dtype="<f8").copy().reshape(n, s, k)
    )
    sums = probs.reshape(-1, k).sum(axis=1)
    if np.any(np.abs(sums - 1.0) > ROW_SUM_TOL):
        worst = float(np.max(np.abs(sums - 1.0)))
        raise RowSumError(
            f"probability rows deviate from 1 by up to {worst:.3e} (> {ROW_SUM_TOL})"
        )
    return EnsembleBatch(probs, weights)


def write_csv(batch: EnsembleBatch, path: str | Path) -> None:
    """One row per (input, sample) with 17-significant-digit decimals."""
    k = batch.num_classes
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "member"] + [f"class_{j}" for j in range(k)])
        for i, identifier in enumerate(batch.ids):
            for sidx in range(batch.num_samples):
                writer.writerow(
                    [identifier, sidx]
                    + [f"{v:.17g}" for v in batch.probs[i, sidx].tolist()]
                )


def read_csv(path: str | Path) -> EnsembleBatch:
    """Inverse of write_csv; member rows per id must be complete and ordered."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["id", "member"]:
            raise BadMagicError("CSV header must start with 'id,member'")
        class_cols = header[2:]
        expected = [f"class_{j}" for j in range(len(class_cols))]
        if not class_cols or class_cols != expected:
            raise BadMagicError("CSV class columns must be class_0..class_{K-1}")
        k = len(class_cols)
        ids: list[str] = []
        rows: dict[str, list] = {}
        for line in reader:
            if len(line) != 2 + k:
                raise TruncatedPayloadError(f"CSV row has {len(line)} fields, want {2 + k}")
            identifier = line[0]
            if identifier not in rows:
                rows[identifier] = []
                ids.append(identifier)
            rows[identifier].append([float(v) for v in line[2:]])
    if not ids:
        raise TruncatedPayloadError("CSV contains no data rows")
    counts = {len(v) for v in rows.values()}
    if len(counts) != 1:
        raise TruncatedPayloadError("all inputs must have the same number of members")
    probs = np.array([rows[i] for i in ids], dtype=np.float64)
    sums = probs.reshape(-1, k).sum(axis=1)
    if np.any(np.abs(sums - 1.0) > ROW_SUM_TOL):
        raise RowSumError("CSV probability rows deviate from 1 beyond tolerance")
    return EnsembleBatch(probs, None, ids)


def read_labels_csv(path: str | Path) -> tuple[list[str], list[int]]:
    """Truth labels as (ids, labels) from a two-column `id,label` CSV."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header != ["id", "label"]:
            raise BadMagicError("labels CSV header must be 'id,label'")
        ids = []
        labels = []
        for line in reader:
            if len(line) != 2:
                raise TruncatedPayloadError("labels CSV rows must have two fields")
            ids.append(line[0])
            labels.append(int(line[1]))
    return ids, labels


def write_labels_csv(ids: Sequence[str], labels: Sequence[int], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "label"])
        for identifier, label in zip(ids, labels):
            writer.writerow([identifier, int(label)])
