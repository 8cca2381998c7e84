"""Turn table rows and columns into delimited text sequences.

A row is rendered as ``header : value | header : value | ...`` and a
column as ``header : value | value | ... |``.  The colon marks header
text, the pipe closes each cell value; single spaces separate all tokens.
The ``plain`` mode drops the structure markers entirely (space-joined cell
values, headers kept only on the column side) and exists for measuring
how much the markers contribute.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

from .errors import TableValidationError
from .tables import Table

SerializationMode = Literal["delimited", "plain"]

HEADER_DELIM = ":"
VALUE_DELIM = "|"


def _mark_header(text: str) -> str:
    return f"{text} {HEADER_DELIM}" if text else HEADER_DELIM


def _mark_value(text: str) -> str:
    return f"{text} {VALUE_DELIM}" if text else VALUE_DELIM


def flatten_header(levels: list[str] | tuple[str, ...]) -> str:
    """Join hierarchical header levels into a single header text."""
    return " ".join(level for level in levels if level)


def serialize_row(table: Table, i: int, mode: SerializationMode = "delimited") -> str:
    """Render row ``i`` (1-based) as one text sequence."""
    if not 1 <= i <= table.m:
        raise TableValidationError(f"row index {i} outside table {table.id!r} bounds (m={table.m})")
    row = table.cells[i - 1]
    if mode == "plain":
        return " ".join(v for v in row if v)
    parts = []
    for header, value in zip(table.header, row):
        parts.append(_mark_header(header))
        parts.append(_mark_value(value))
    return " ".join(parts)


def serialize_column(table: Table, j: int, mode: SerializationMode = "delimited") -> str:
    """Render column ``j`` (1-based) as one text sequence, header first."""
    if not 1 <= j <= table.n:
        raise TableValidationError(
            f"column index {j} outside table {table.id!r} bounds (n={table.n})"
        )
    values = table.column(j)
    if mode == "plain":
        return " ".join(v for v in (table.header[j - 1], *values) if v)
    parts = [_mark_header(table.header[j - 1])]
    parts.extend(_mark_value(v) for v in values)
    return " ".join(parts)


def serialize_header(header: Sequence[str]) -> str:
    """Render a header row with the header delimiter after each entry."""
    return " ".join(_mark_header(h) for h in header)


@dataclass(frozen=True)
class SequencePair:
    """A question paired with one row or column text sequence."""

    question: str
    sequence: str
    axis: Literal["row", "column"]
    index: int
    mode: SerializationMode


def row_pair(table: Table, question: str, i: int, mode: SerializationMode = "delimited") -> SequencePair:
    return SequencePair(question, serialize_row(table, i, mode), "row", i, mode)


def column_pair(table: Table, question: str, j: int, mode: SerializationMode = "delimited") -> SequencePair:
    return SequencePair(question, serialize_column(table, j, mode), "column", j, mode)
