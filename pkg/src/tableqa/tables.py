"""Table and question data model, dataset ingestion, and weak supervision.

Tables are immutable rectangular grids of cell texts with a single header
row.  Questions reference a table by id and carry ground-truth answer
texts; the coordinates of the answer cells are usually not annotated and
are instead recovered by matching the answer strings against the cells
(weak supervision).  All row/column indices are 1-based.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, NamedTuple, Sequence

import numpy as np

from .errors import ParseError, TableValidationError

AGG_TYPES: tuple[str, ...] = ("lookup", "max", "min", "count", "sum", "average")


class CellCoord(NamedTuple):
    """1-based (row, col) position of a cell."""

    row: int
    col: int


@dataclass(frozen=True)
class Table:
    """A header plus an m-by-n grid of cell texts.

    Every row must have exactly ``len(header)`` cells.  Header entries and
    cells may be empty strings but never absent.
    """

    id: str
    header: tuple[str, ...]
    cells: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if len(self.header) < 1:
            raise TableValidationError(f"table {self.id!r}: header must have at least one column")
        if len(self.cells) < 1:
            raise TableValidationError(f"table {self.id!r}: table must have at least one row")
        n = len(self.header)
        for i, row in enumerate(self.cells, start=1):
            if len(row) != n:
                raise TableValidationError(
                    f"table {self.id!r}: row {i} has {len(row)} cells, expected {n}"
                )
            for text in row:
                if not isinstance(text, str):
                    raise TableValidationError(
                        f"table {self.id!r}: row {i} contains a non-text cell"
                    )

    @property
    def m(self) -> int:
        return len(self.cells)

    @property
    def n(self) -> int:
        return len(self.header)

    def cell(self, coord: CellCoord) -> str:
        return self.cells[coord.row - 1][coord.col - 1]

    def column(self, j: int) -> tuple[str, ...]:
        return tuple(row[j - 1] for row in self.cells)

    def contains(self, coord: CellCoord) -> bool:
        return 1 <= coord.row <= self.m and 1 <= coord.col <= self.n

    def to_record(self) -> dict:
        return {"id": self.id, "header": list(self.header), "rows": [list(r) for r in self.cells]}

    @classmethod
    def from_record(cls, record: dict) -> "Table":
        return cls(
            id=str(record["id"]),
            header=tuple(record["header"]),
            cells=tuple(tuple(row) for row in record["rows"]),
        )


@dataclass(frozen=True)
class QAInstance:
    """A question over one table, with ground-truth answer texts.

    ``targets`` holds annotated answer cell coordinates when available;
    ``agg_label`` is present only for fully supervised instances.
    """

    qid: str
    question: str
    table_id: str
    answers: frozenset[str]
    agg_label: str | None = None
    targets: frozenset[CellCoord] | None = None

    def __post_init__(self) -> None:
        if not self.answers:
            raise TableValidationError(f"instance {self.qid!r}: answers must be non-empty")
        if self.agg_label is not None and self.agg_label not in AGG_TYPES:
            raise TableValidationError(
                f"instance {self.qid!r}: unknown aggregation label {self.agg_label!r}"
            )

    def to_record(self) -> dict:
        record: dict = {
            "qid": self.qid,
            "table_id": self.table_id,
            "question": self.question,
            "answers": sorted(self.answers),
        }
        if self.agg_label is not None:
            record["agg"] = self.agg_label
        if self.targets is not None:
            record["targets"] = [[c.row, c.col] for c in sorted(self.targets)]
        return record

    @classmethod
    def from_record(cls, record: dict) -> "QAInstance":
        targets = None
        if "targets" in record and record["targets"] is not None:
            targets = frozenset(CellCoord(int(r), int(c)) for r, c in record["targets"])
        return cls(
            qid=str(record["qid"]),
            question=str(record["question"]),
            table_id=str(record["table_id"]),
            answers=frozenset(str(a) for a in record["answers"]),
            agg_label=record.get("agg"),
            targets=targets,
        )


@dataclass(frozen=True)
class RowColTargets:
    """Row and column projections of a gold cell set."""

    rows: frozenset[int]
    cols: frozenset[int]


def parse_table_file(path: str | Path, format: Literal["jsonl", "csv"] = "jsonl") -> list[Table]:
    """Read tables from a jsonl file (one record per line) or a csv file.

    The jsonl schema is ``{id, header: [text], rows: [[text]]}``.  A csv
    file holds a single table whose first row is the header; the table id
    is the file stem.  Malformed records raise :class:`ParseError` naming
    the offending line; ragged rows raise :class:`TableValidationError`
    naming the table id and row index.
    """
    path = Path(path)
    if format == "jsonl":
        tables = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"{path}: line {lineno}: invalid record: {exc}") from exc
                if not isinstance(record, dict) or not {"id", "header", "rows"} <= record.keys():
                    raise ParseError(
                        f"{path}: line {lineno}: record must have id, header and rows fields"
                    )
                tables.append(Table.from_record(record))
        return tables
    if format == "csv":
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            return []
        header, data = rows[0], rows[1:]
        if not data:
            raise TableValidationError(f"table {path.stem!r}: csv file has a header but no rows")
        return [Table(id=path.stem, header=tuple(header), cells=tuple(tuple(r) for r in data))]
    raise ValueError(f"unknown table file format {format!r}")


def parse_questions_file(
    path: str | Path, tables: dict[str, Table] | None = None
) -> list[QAInstance]:
    """Read question records; validate target bounds when tables are given."""
    path = Path(path)
    instances = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: line {lineno}: invalid record: {exc}") from exc
            try:
                inst = QAInstance.from_record(record)
            except KeyError as exc:
                raise ParseError(f"{path}: line {lineno}: missing field {exc}") from exc
            if tables is not None and inst.targets is not None:
                table = tables.get(inst.table_id)
                if table is None:
                    raise TableValidationError(
                        f"instance {inst.qid!r}: unknown table {inst.table_id!r}"
                    )
                for coord in inst.targets:
                    if not table.contains(coord):
                        raise TableValidationError(
                            f"instance {inst.qid!r}: target {tuple(coord)} outside "
                            f"table {table.id!r} bounds ({table.m}x{table.n})"
                        )
            instances.append(inst)
    return instances


def write_tables_jsonl(tables: Iterable[Table], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for table in tables:
            fh.write(json.dumps(table.to_record(), sort_keys=True, ensure_ascii=False) + "\n")


def write_questions_jsonl(instances: Iterable[QAInstance], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(json.dumps(inst.to_record(), sort_keys=True, ensure_ascii=False) + "\n")


def normalize_answer(text: str) -> str:
    """Trim surrounding whitespace and case-fold."""
    return text.strip().casefold()


def weak_supervise(
    answers: Iterable[str],
    table: Table,
    *,
    fold_case: bool = True,
    substring: bool = False,
) -> frozenset[CellCoord]:
    """Return every cell whose text matches one of the answer texts.

    Matching is full-cell equality after trimming and case-folding; all
    occurrences are returned, not just the first.  ``fold_case=False``
    switches to case-sensitive comparison, ``substring=True`` to substring
    containment; both are non-default variants kept for experimentation.
    An empty result means no answer string occurs anywhere in the table.
    """

    def norm(text: str) -> str:
        text = text.strip()
        return text.casefold() if fold_case else text

    wanted = {norm(a) for a in answers}
    if not wanted:
        raise TableValidationError("weak supervision requires a non-empty answer set")
    matches = set()
    for i, row in enumerate(table.cells, start=1):
        for j, value in enumerate(row, start=1):
            cell = norm(value)
            if substring:
                hit = any(w and w in cell for w in wanted)
            else:
                hit = cell in wanted
            if hit:
                matches.add(CellCoord(i, j))
    return frozenset(matches)


def derive_targets(targets: Iterable[CellCoord]) -> RowColTargets:
    """Project a gold cell set onto its row and column index sets."""
    coords = list(targets)
    if not coords:
        raise TableValidationError("cannot derive row/column targets from an empty cell set")
    return RowColTargets(
        rows=frozenset(c.row for c in coords),
        cols=frozenset(c.col for c in coords),
    )


def downsample_rows(
    table: Table, keep: Iterable[int], max_rows: int, seed: int
) -> Table:
    """Cap a table at ``max_rows`` rows while keeping every row in ``keep``.

    Non-kept survivors are a seeded uniform draw; the original relative row
    order is preserved and the header is unchanged.  Tables already at or
    under the limit are returned as-is.
    """
    return downsample_rows_with_map(table, keep, max_rows, seed)[0]


def downsample_rows_with_map(
    table: Table, keep: Iterable[int], max_rows: int, seed: int
) -> tuple[Table, dict[int, int]]:
    """Like :func:`downsample_rows` but also return the old->new row index map."""
    keep_set = set(keep)
    if max_rows < 1:
        raise TableValidationError("max_rows must be positive")
    for i in keep_set:
        if not 1 <= i <= table.m:
            raise TableValidationError(f"keep row {i} outside table {table.id!r} bounds")
    if len(keep_set) > max_rows:
        raise TableValidationError(
            f"table {table.id!r}: {len(keep_set)} rows to keep exceeds max_rows={max_rows}"
        )
    if table.m <= max_rows:
        return table, {i: i for i in range(1, table.m + 1)}
    pool = sorted(set(range(1, table.m + 1)) - keep_set)
    rng = np.random.default_rng(seed)
    extra = rng.choice(len(pool), size=max_rows - len(keep_set), replace=False)
    chosen = sorted(keep_set | {pool[int(k)] for k in extra})
    small = Table(
        id=table.id,
        header=table.header,
        cells=tuple(table.cells[i - 1] for i in chosen),
    )
    return small, {old: new for new, old in enumerate(chosen, start=1)}
