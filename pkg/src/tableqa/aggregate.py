"""Six-way question-type classification and threshold-based aggregation.

A question is classified as lookup, max, min, count, sum or average from
the pair (question, serialized table header); the header matters because
the same surface question can call for different operations on different
tables.  Aggregation then runs over the cells whose intersection score
clears a confidence threshold tau.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .classifiers import (
    Head,
    QuestionClassifier,
    interaction_loss_and_grad,
    new_head,
    pad_batch,
    softmax,
)
from .encoder import EncoderConfig, new_encoder
from .errors import TableValidationError, UnanswerableError
from .intersect import CellScoreGrid, rank_cells
from .optim import Adam, AdamConfig
from .serialize import serialize_header
from .tables import AGG_TYPES, CellCoord, QAInstance, Table
from .tokenizer import TokenizerConfig, assemble_pair


@dataclass(frozen=True)
class AggAnswer:
    """Either a ranked cell list (lookup) or a single number (all others).

    ``contributing`` always records the selected cells so callers can show
    which cells produced a numeric answer.
    """

    kind: str  # "cell_list" | "number"
    cells: tuple[tuple[CellCoord, str], ...] = ()
    value: float | None = None
    contributing: tuple[CellCoord, ...] = ()


def classify_question(
    question: str, header: Sequence[str], model: QuestionClassifier
) -> dict[str, float]:
    """Probability over the six question types, in AGG_TYPES order."""
    header_text = serialize_header(header)
    tokens, segs = assemble_pair(question, header_text, model.max_tokens, model.encoder.tokenizer)
    _, cls = model.encoder.encode(tokens, segs)
    probs = softmax(cls @ model.head.w.T + model.head.b)
    return {label: float(p) for label, p in zip(AGG_TYPES, probs)}


def predicted_agg_type(distribution: dict[str, float]) -> str:
    return max(AGG_TYPES, key=lambda label: distribution[label])


_NUMBER_RE = re.compile(r"^[+-]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?$|^[+-]?\.\d+$")
_STRIP_CHARS = " \t$€£¥%"


def parse_numeric(text: str) -> float | None:
    """Parse a cell text as a number, or return None.

    Thousands separators and surrounding currency/percent symbols are
    stripped; a leading sign and a decimal point are accepted.  Anything
    else is non-parsable.
    """
    stripped = text.strip().strip(_STRIP_CHARS)
    if not stripped or not _NUMBER_RE.match(stripped):
        return None
    return float(stripped.replace(",", ""))


def select_cells(grid: CellScoreGrid, tau: float) -> list[tuple[CellCoord, float]]:
    """Cells at or above the threshold, ranked by score with row-major ties."""
    ranked = rank_cells(grid, grid.m * grid.n)
    return [(coord, score) for coord, score in ranked if score >= tau]


def execute_aggregation(
    grid: CellScoreGrid, table: Table, agg: str, tau: float = 0.5
) -> AggAnswer:
    """Aggregate the confident cells according to the predicted question type.

    An empty selection falls back to the single top-ranked cell for every
    type except count, which simply reports zero.  Numeric aggregations
    parse the selected cell texts and ignore non-parsable ones; if nothing
    parses the question is unanswerable.
    """
    if agg not in AGG_TYPES:
        raise TableValidationError(f"unknown aggregation type {agg!r}")
    if grid.cell_scores.shape != (table.m, table.n):
        raise TableValidationError(
            f"grid {grid.cell_scores.shape} does not match table "
            f"{table.id!r} ({table.m}x{table.n})"
        )
    if not 0.0 <= tau <= 1.0:
        raise TableValidationError("tau must lie in [0, 1]")
    selected = select_cells(grid, tau)
    if agg == "count":
        return AggAnswer(
            kind="number",
            value=float(len(selected)),
            contributing=tuple(c for c, _ in selected),
        )
    if not selected:
        selected = rank_cells(grid, 1)
    coords = tuple(c for c, _ in selected)
    if agg == "lookup":
        return AggAnswer(
            kind="cell_list",
            cells=tuple((c, table.cell(c)) for c, _ in selected),
            contributing=coords,
        )
    parsed = [(c, parse_numeric(table.cell(c))) for c in coords]
    values = [(c, v) for c, v in parsed if v is not None]
    if not values:
        raise UnanswerableError(
            f"aggregation {agg!r} over table {table.id!r}: no selected cell parses as a number"
        )
    nums = np.array([v for _, v in values], dtype=np.float64)
    used = tuple(c for c, _ in values)
    if agg == "sum":
        return AggAnswer(kind="number", value=float(nums.sum()), contributing=used)
    if agg == "average":
        return AggAnswer(kind="number", value=float(nums.mean()), contributing=used)
    if agg == "max":
        pick = int(np.argmax(nums))
    else:
        pick = int(np.argmin(nums))
    return AggAnswer(kind="number", value=float(nums[pick]), contributing=(used[pick],))


# ---------------------------------------------------------------------------
# question-type classifier training


@dataclass(frozen=True)
class AggTrainConfig:
    encoder: EncoderConfig = EncoderConfig(d_model=48, n_layers=1, n_heads=2, max_len=64)
    tokenizer: TokenizerConfig = TokenizerConfig()
    adam: AdamConfig = AdamConfig()
    epochs: int = 6
    batch_size: int = 64
    max_tokens: int = 64
    seed: int = 0


def train_question_classifier(
    instances: Sequence[QAInstance],
    tables: dict[str, Table],
    config: AggTrainConfig = AggTrainConfig(),
) -> QuestionClassifier:
    """Fit the six-way classifier on instances carrying aggregation labels."""
    labelled = [inst for inst in instances if inst.agg_label is not None]
    if not labelled:
        raise TableValidationError("no instances carry aggregation labels")
    enc = new_encoder(config.tokenizer, config.encoder)
    head = new_head(len(AGG_TYPES), config.encoder.d_model, seed=config.encoder.seed + 1)
    params = dict(enc.params)
    params["head.w"] = head.w
    params["head.b"] = head.b
    optimizer = Adam(params, config.adam)
    rng = np.random.default_rng(config.seed)

    assembled = []
    labels_all = []
    for inst in labelled:
        table = tables.get(inst.table_id)
        if table is None:
            continue
        header_text = serialize_header(table.header)
        assembled.append(
            assemble_pair(inst.question, header_text, config.max_tokens, config.tokenizer)
        )
        labels_all.append(AGG_TYPES.index(inst.agg_label))
    labels_arr = np.array(labels_all)
    weights = np.ones(len(labels_arr), dtype=np.float32)

    for _epoch in range(config.epochs):
        order = rng.permutation(len(assembled))
        for start in range(0, len(order), config.batch_size):
            take = order[start : start + config.batch_size]
            batch = [assembled[i] for i in take]
            ids, segs = pad_batch([a[0] for a in batch], [a[1] for a in batch])
            loss, grads = interaction_loss_and_grad(
                params, config.encoder, ids, segs, labels_arr[take], weights[take]
            )
            if not np.isfinite(loss):
                raise TableValidationError("training diverged: non-finite loss")
            optimizer.step(params, grads)
    return QuestionClassifier(encoder=enc, head=head, max_tokens=config.max_tokens)
