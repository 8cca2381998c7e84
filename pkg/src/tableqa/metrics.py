"""Ranking metrics and row/column error decomposition.

Mean reciprocal rank averages 1/rank of the first correct cell in each
question's predicted list; a question whose list contains no correct cell
contributes 0 (infinite rank).  Hit@1 is the fraction answered correctly
by the very first prediction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import TableValidationError
from .tables import CellCoord


@dataclass(frozen=True)
class RankingResult:
    """One question's ordered cell predictions and its gold cell set."""

    qid: str
    predictions: tuple[CellCoord, ...]
    gold: frozenset[CellCoord]
    scores: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if len(set(self.predictions)) != len(self.predictions):
            raise TableValidationError(f"result {self.qid!r}: duplicate predicted cells")
        if not self.gold:
            raise TableValidationError(f"result {self.qid!r}: empty gold set")


@dataclass
class EvalReport:
    mrr: float
    hit_at_1: float
    row_accuracy: float
    col_accuracy: float
    per_question: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "summary": {
                "mrr": self.mrr,
                "hit_at_1": self.hit_at_1,
                "row_accuracy": self.row_accuracy,
                "col_accuracy": self.col_accuracy,
                "n_questions": len(self.per_question),
            },
            "questions": self.per_question,
        }

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)


def reciprocal_rank(predictions: Sequence[CellCoord], gold: frozenset[CellCoord]) -> float:
    for rank, coord in enumerate(predictions, start=1):
        if coord in gold:
            return 1.0 / rank
    return 0.0


def evaluate_ranking(results: Sequence[RankingResult]) -> EvalReport:
    """Aggregate MRR, Hit@1 and top-1 row/column accuracy over questions."""
    if not results:
        raise TableValidationError("evaluate_ranking requires at least one result")
    records = []
    mrr_total = 0.0
    hits = 0
    row_ok_total = 0
    col_ok_total = 0
    for res in results:
        rr = reciprocal_rank(res.predictions, res.gold)
        mrr_total += rr
        hit = bool(res.predictions) and res.predictions[0] in res.gold
        hits += int(hit)
        gold_rows = {c.row for c in res.gold}
        gold_cols = {c.col for c in res.gold}
        row_ok = bool(res.predictions) and res.predictions[0].row in gold_rows
        col_ok = bool(res.predictions) and res.predictions[0].col in gold_cols
        row_ok_total += int(row_ok)
        col_ok_total += int(col_ok)
        record = {
            "qid": res.qid,
            "topk": [[c.row, c.col] for c in res.predictions],
            "reciprocal_rank": rr,
            "row_ok": row_ok,
            "col_ok": col_ok,
        }
        if res.scores:
            record["scores"] = list(res.scores)
        records.append(record)
    n = len(results)
    return EvalReport(
        mrr=mrr_total / n,
        hit_at_1=hits / n,
        row_accuracy=row_ok_total / n,
        col_accuracy=col_ok_total / n,
        per_question=records,
    )


def decompose_errors(results: Sequence[RankingResult]) -> tuple[float, float]:
    """Top-1 row accuracy and column accuracy over the results."""
    if not results:
        raise TableValidationError("decompose_errors requires at least one result")
    for res in results:
        if not res.predictions:
            raise TableValidationError(f"result {res.qid!r} has no predictions")
    row_ok = sum(1 for r in results if r.predictions[0].row in {c.row for c in r.gold})
    col_ok = sum(1 for r in results if r.predictions[0].col in {c.col for c in r.gold})
    return row_ok / len(results), col_ok / len(results)
