"""Seeded synthetic corpus of small tables with lookup and aggregation questions.

Each instance gets its own table: a ``name`` key column, a ``home``/``away``
pair sharing one team vocabulary (their order is shuffled per table), and a
few attribute columns with disjoint value vocabularies.  Two lookup shapes
are generated:

* attribute lookup -- "what is the <header synonym> of <name> ?"; the
  answer cell is made unique in its table so weak supervision is exact;
* reverse lookup -- "which name has <home|away> <team> ?"; the same team
  is planted in the other pair column of a distractor row, so telling the
  rows apart requires knowing which column a value sits in.  Plain
  space-joined serialization discards exactly that information, which is
  what the formatting ablation measures.

Aggregation questions use keyword-distinct templates over a numeric score
column (or the name column for count); their target set is the whole
aggregated column and their answer texts are the aggregated cell texts,
so answer matching always recovers a superset of the declared targets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import TableValidationError
from .tables import (
    CellCoord,
    QAInstance,
    Table,
    write_questions_jsonl,
    write_tables_jsonl,
)

NAMES = (
    "alice bob carol david erin frank grace henry irene jack karen liam mona nathan "
    "olga peter quinn rachel sam tina umar vera walter xenia yusuf zoe aaron bella "
    "colin daisy edgar fiona george hannah ivan julia kevin laura marco nina oscar "
    "paula ruben sofia tomas ursula victor wendy"
).split()

TEAMS = (
    "tigers lions bears wolves eagles hawks sharks whales foxes otters ravens crows "
    "bulls rams colts mustangs panthers cougars jaguars leopards falcons owls bisons moose"
).split()

PAIR_HEADERS = ("home", "away")
PAIR_SYNONYMS = {"home": ("host",), "away": ("guest", "visitor")}

ATTR_TYPES: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    # header: (question synonyms, value vocabulary)
    "color": (
        ("colour", "shade", "hue"),
        tuple("red blue green yellow purple orange black white gray pink brown teal "
              "cyan magenta olive navy".split()),
    ),
    "city": (
        ("town", "hometown"),
        tuple("paris london berlin madrid rome vienna prague lisbon dublin oslo athens "
              "warsaw budapest helsinki stockholm copenhagen".split()),
    ),
    "sport": (
        ("game", "discipline"),
        tuple("tennis soccer hockey golf rugby cricket boxing rowing skiing fencing "
              "judo karate cycling swimming archery curling".split()),
    ),
    "food": (
        ("dish", "meal"),
        tuple("pasta pizza sushi curry salad soup bread cheese rice noodles stew tacos "
              "waffles pancakes dumplings porridge".split()),
    ),
    "animal": (
        ("pet", "creature"),
        tuple("cat dog rabbit parrot hamster turtle ferret gecko pony goat duck goose "
              "hedgehog lizard snake mouse".split()),
    ),
    "drink": (
        ("beverage",),
        tuple("tea coffee juice soda milk water cocoa lemonade cider espresso latte "
              "tonic".split()),
    ),
}

SCORE_HEADER = "score"

AGG_TEMPLATES = {
    "max": ("what is the highest score ?", "what is the biggest score ?"),
    "min": ("what is the lowest score ?", "what is the smallest score ?"),
    "sum": ("what is the total score ?", "what is the combined score ?"),
    "average": ("what is the average score ?", "what is the mean score ?"),
    "count": ("how many names are listed ?", "how many entries are listed ?"),
}


@dataclass(frozen=True)
class GeneratorConfig:
    n_train: int = 2000
    n_dev: int = 500
    n_test: int = 500
    agg_fraction: float = 0.0
    distractor_fraction: float = 0.35
    min_rows: int = 4
    max_rows: int = 6
    n_attr_cols: int = 2

    def __post_init__(self) -> None:
        if min(self.n_train, self.n_dev, self.n_test) < 1:
            raise TableValidationError("split sizes must be positive")
        if not 0.0 <= self.agg_fraction <= 1.0:
            raise TableValidationError("agg_fraction must lie in [0, 1]")
        if not 0.0 <= self.distractor_fraction <= 1.0:
            raise TableValidationError("distractor_fraction must lie in [0, 1]")
        if not 2 <= self.min_rows <= self.max_rows:
            raise TableValidationError("row bounds must satisfy 2 <= min_rows <= max_rows")
        if not 1 <= self.n_attr_cols <= len(ATTR_TYPES):
            raise TableValidationError("n_attr_cols out of range")


@dataclass
class SyntheticCorpus:
    tables: list[Table]
    train: list[QAInstance]
    dev: list[QAInstance]
    test: list[QAInstance]

    def tables_by_id(self) -> dict[str, Table]:
        return {t.id: t for t in self.tables}

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        write_tables_jsonl(self.tables, directory / "tables.jsonl")
        write_questions_jsonl(self.train, directory / "train.jsonl")
        write_questions_jsonl(self.dev, directory / "dev.jsonl")
        write_questions_jsonl(self.test, directory / "test.jsonl")


def _pick(rng: np.random.Generator, items: Sequence[str]) -> str:
    return items[int(rng.integers(len(items)))]


def _build_table(
    rng: np.random.Generator, config: GeneratorConfig, table_id: str, with_score: bool
) -> tuple[Table, dict[str, int]]:
    """Random table plus a header -> 1-based column index map."""
    m = int(rng.integers(config.min_rows, config.max_rows + 1))
    name_idx = rng.choice(len(NAMES), size=m, replace=False)
    names = [NAMES[int(i)] for i in name_idx]

    pair = list(PAIR_HEADERS)
    if rng.integers(2):
        pair.reverse()

    attr_names = sorted(ATTR_TYPES)
    n_attrs = config.n_attr_cols - (1 if with_score else 0)
    n_attrs = max(0, n_attrs)
    attr_idx = rng.choice(len(attr_names), size=n_attrs, replace=False)
    attrs = [attr_names[int(i)] for i in attr_idx]
    extra = attrs + ([SCORE_HEADER] if with_score else [])
    extra = [extra[int(i)] for i in rng.permutation(len(extra))]

    header = ["name", *pair, *extra]
    columns: dict[str, list[str]] = {"name": names}
    for h in pair:
        columns[h] = [_pick(rng, TEAMS) for _ in range(m)]
    for h in extra:
        if h == SCORE_HEADER:
            columns[h] = [str(int(rng.integers(0, 100))) for _ in range(m)]
        else:
            vocab = ATTR_TYPES[h][1]
            columns[h] = [_pick(rng, vocab) for _ in range(m)]

    cells = tuple(tuple(columns[h][i] for h in header) for i in range(m))
    table = Table(id=table_id, header=tuple(header), cells=cells)
    col_of = {h: j for j, h in enumerate(header, start=1)}
    return table, col_of


def _replace_cell(table: Table, row: int, col: int, value: str) -> Table:
    cells = [list(r) for r in table.cells]
    cells[row - 1][col - 1] = value
    return Table(id=table.id, header=table.header, cells=tuple(tuple(r) for r in cells))


def _unique_value(rng: np.random.Generator, vocab: Sequence[str], used: set[str]) -> str:
    free = [v for v in vocab if v not in used]
    if not free:
        raise TableValidationError("value vocabulary exhausted; shrink the table")
    return _pick(rng, free)


def _attribute_lookup(
    rng: np.random.Generator, table: Table, col_of: dict[str, int], qid: str
) -> tuple[Table, QAInstance]:
    candidates = [h for h in table.header if h != "name"]
    target_header = _pick(rng, candidates)
    j = col_of[target_header]
    i = int(rng.integers(table.m)) + 1
    used = {text for row in table.cells for text in row}
    if target_header == SCORE_HEADER:
        vocab = [str(v) for v in range(100)]
    elif target_header in PAIR_SYNONYMS:
        vocab = list(TEAMS)
    else:
        vocab = list(ATTR_TYPES[target_header][1])
    value = _unique_value(rng, vocab, used)
    table = _replace_cell(table, i, j, value)
    synonyms = PAIR_SYNONYMS.get(target_header) or (
        ("points", "result") if target_header == SCORE_HEADER else ATTR_TYPES[target_header][0]
    )
    name = table.cell(CellCoord(i, col_of["name"]))
    question = f"what is the {_pick(rng, synonyms)} of {name} ?"
    inst = QAInstance(
        qid=qid,
        question=question,
        table_id=table.id,
        answers=frozenset({value}),
        agg_label="lookup",
        targets=frozenset({CellCoord(i, j)}),
    )
    return table, inst


def _reverse_lookup(
    rng: np.random.Generator,
    table: Table,
    col_of: dict[str, int],
    qid: str,
    distractor_fraction: float,
) -> tuple[Table, QAInstance]:
    side = _pick(rng, PAIR_HEADERS)
    other = PAIR_HEADERS[1] if side == PAIR_HEADERS[0] else PAIR_HEADERS[0]
    gold_row = int(rng.integers(table.m)) + 1
    distractor = int(rng.integers(table.m - 1)) + 1
    if distractor >= gold_row:
        distractor += 1
    used = {text for row in table.cells for text in row}
    team = _unique_value(rng, TEAMS, used)
    table = _replace_cell(table, gold_row, col_of[side], team)
    if rng.random() < distractor_fraction:
        # same team in the opposite column of another row: the rows then
        # carry identical token bags and only the header structure tells
        # them apart
        table = _replace_cell(table, distractor, col_of[other], team)
    name = table.cell(CellCoord(gold_row, col_of["name"]))
    question = f"which name has the {side} {team} ?"
    inst = QAInstance(
        qid=qid,
        question=question,
        table_id=table.id,
        answers=frozenset({name}),
        agg_label="lookup",
        targets=frozenset({CellCoord(gold_row, col_of["name"])}),
    )
    return table, inst


def _aggregation(
    rng: np.random.Generator, table: Table, col_of: dict[str, int], qid: str
) -> tuple[Table, QAInstance]:
    agg = _pick(rng, sorted(AGG_TEMPLATES))
    question = _pick(rng, AGG_TEMPLATES[agg])
    target_header = "name" if agg == "count" else SCORE_HEADER
    j = col_of[target_header]
    targets = frozenset(CellCoord(i, j) for i in range(1, table.m + 1))
    answers = frozenset(table.cell(c) for c in targets)
    inst = QAInstance(
        qid=qid,
        question=question,
        table_id=table.id,
        answers=answers,
        agg_label=agg,
        targets=targets,
    )
    return table, inst


def generate_synthetic_corpus(config: GeneratorConfig, seed: int) -> SyntheticCorpus:
    """Deterministically generate tables and questions for the three splits."""
    rng = np.random.default_rng(seed)
    total = config.n_train + config.n_dev + config.n_test
    tables: list[Table] = []
    instances: list[QAInstance] = []
    for idx in range(total):
        table_id = f"syn-{idx:05d}"
        qid = f"q-{idx:05d}"
        is_agg = config.agg_fraction > 0 and rng.random() < config.agg_fraction
        table, col_of = _build_table(rng, config, table_id, with_score=config.agg_fraction > 0)
        if is_agg:
            table, inst = _aggregation(rng, table, col_of, qid)
        elif rng.integers(2):
            table, inst = _attribute_lookup(rng, table, col_of, qid)
        else:
            table, inst = _reverse_lookup(rng, table, col_of, qid, config.distractor_fraction)
        tables.append(table)
        instances.append(inst)
    train = instances[: config.n_train]
    dev = instances[config.n_train : config.n_train + config.n_dev]
    test = instances[config.n_train + config.n_dev :]
    return SyntheticCorpus(tables=tables, train=train, dev=dev, test=test)
