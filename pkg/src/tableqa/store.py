"""Materialized column representation vectors with a binary on-disk index.

The representation column model encodes each column of each table once,
independent of any question.  At query time the question is encoded once
and combined with the cached vectors, so the per-query encoder cost does
not grow with table width.  The index records a fingerprint of the model
checkpoint; a mismatch at query time means the index is stale.
"""

from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .classifiers import (
    SequenceClassifier,
    column_model_bytes,
    combination_vector,
    encode_question_vector,
    encode_sequence_vector,
    positive_probability,
)
from .errors import CheckpointError, NotFoundError, StaleIndexError, TableValidationError
from .serialize import SerializationMode, serialize_column, serialize_row
from .tables import Table

INDEX_MAGIC = b"RCIX"
INDEX_VERSION = 1


@dataclass
class EmbeddingIndex:
    """Per-table ordered column vectors plus the producing model's fingerprint."""

    fingerprint: bytes
    mode: SerializationMode
    d_model: int
    entries: dict[str, np.ndarray]  # table_id -> (n_columns, d_model) float32


def model_fingerprint(clf: SequenceClassifier) -> bytes:
    return hashlib.sha256(column_model_bytes(clf)).digest()


def materialize(
    tables: Sequence[Table] | Iterable[Table],
    clf: SequenceClassifier,
    mode: SerializationMode = "delimited",
    *,
    axis: str = "column",
) -> EmbeddingIndex:
    """Encode every column of every table with the representation model.

    ``axis="row"`` materializes row vectors instead; rows are normally
    scored by the interaction classifier, so this path is experimental.
    """
    if clf.kind != "representation":
        raise TableValidationError("materialization requires a representation column model")
    if axis not in ("column", "row"):
        raise TableValidationError(f"unknown materialization axis {axis!r}")
    tables = list(tables)
    if not tables:
        raise TableValidationError("cannot materialize an empty table collection")
    entries: dict[str, np.ndarray] = {}
    for table in tables:
        if axis == "column":
            sequences = [serialize_column(table, j, mode) for j in range(1, table.n + 1)]
        else:
            sequences = [serialize_row(table, i, mode) for i in range(1, table.m + 1)]
        vectors = [encode_sequence_vector(clf, s) for s in sequences]
        entries[table.id] = np.stack(vectors).astype(np.float32)
    return EmbeddingIndex(
        fingerprint=model_fingerprint(clf),
        mode=mode,
        d_model=clf.encoder.config.d_model,
        entries=entries,
    )


def query_with_store(
    question: str,
    table_id: str,
    index: EmbeddingIndex,
    clf: SequenceClassifier,
) -> np.ndarray:
    """Column probabilities from cached vectors; the question is encoded once."""
    if model_fingerprint(clf) != index.fingerprint:
        raise StaleIndexError(
            "index fingerprint does not match the model checkpoint; re-materialize the index"
        )
    vectors = index.entries.get(table_id)
    if vectors is None:
        raise NotFoundError(f"table {table_id!r} is not present in the index")
    r_q = encode_question_vector(clf, question)
    return np.array(
        [float(positive_probability(clf.head, combination_vector(r_q, r_c))) for r_c in vectors]
    )


# ---------------------------------------------------------------------------
# binary format: magic "RCIX", version byte, 32-byte fingerprint, mode byte,
# d_model, table directory (id, column count, absolute offset), then vectors
# as little-endian float32


def save_index(index: EmbeddingIndex, path: str | Path) -> None:
    """Write atomically: build the new file beside the target, then swap."""
    path = Path(path)
    ids = list(index.entries)
    directory_size = 4  # table count
    for table_id in ids:
        directory_size += 4 + len(table_id.encode("utf-8")) + 4 + 8
    header_size = 4 + 1 + 32 + 1 + 4
    offset = header_size + directory_size
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(INDEX_MAGIC)
        fh.write(struct.pack("B", INDEX_VERSION))
        fh.write(index.fingerprint)
        fh.write(struct.pack("B", 0 if index.mode == "delimited" else 1))
        fh.write(struct.pack("<i", index.d_model))
        fh.write(struct.pack("<i", len(ids)))
        for table_id in ids:
            raw = table_id.encode("utf-8")
            vectors = index.entries[table_id]
            fh.write(struct.pack("<i", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<i", vectors.shape[0]))
            fh.write(struct.pack("<Q", offset))
            offset += 4 * vectors.size
        for table_id in ids:
            fh.write(np.ascontiguousarray(index.entries[table_id], dtype="<f4").tobytes())
    os.replace(tmp, path)


def load_index(path: str | Path) -> EmbeddingIndex:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != INDEX_MAGIC:
            raise CheckpointError(f"bad magic header {magic!r}, expected {INDEX_MAGIC!r}")
        raw = fh.read(1)
        if not raw or raw[0] != INDEX_VERSION:
            raise CheckpointError("unsupported or missing index version")
        fingerprint = fh.read(32)
        if len(fingerprint) != 32:
            raise CheckpointError("truncated index: incomplete fingerprint")
        mode_b = fh.read(1)
        (d_model,) = struct.unpack("<i", fh.read(4))
        (count,) = struct.unpack("<i", fh.read(4))
        directory = []
        for _ in range(count):
            (id_len,) = struct.unpack("<i", fh.read(4))
            table_id = fh.read(id_len).decode("utf-8")
            (n_cols,) = struct.unpack("<i", fh.read(4))
            (offset,) = struct.unpack("<Q", fh.read(8))
            directory.append((table_id, n_cols, offset))
        entries: dict[str, np.ndarray] = {}
        for table_id, n_cols, offset in directory:
            fh.seek(offset)
            raw = fh.read(4 * n_cols * d_model)
            if len(raw) != 4 * n_cols * d_model:
                raise CheckpointError(f"truncated index: incomplete vectors for {table_id!r}")
            entries[table_id] = np.frombuffer(raw, dtype="<f4").reshape(n_cols, d_model).copy()
    return EmbeddingIndex(
        fingerprint=fingerprint,
        mode="delimited" if mode_b == b"\x00" else "plain",
        d_model=d_model,
        entries=entries,
    )
