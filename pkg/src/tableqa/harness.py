"""End-to-end scoring pipeline: score a question over a table, rank cells,
evaluate a corpus, and run the formatting ablation.

Scorers expose per-row and per-column probabilities for a (question,
table) pair.  The bundle-backed scorer runs the trained classifiers; the
oracle scorer returns probabilities peaked at known gold cells and exists
so the metrics pipeline can be exercised independently of any model.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .classifiers import RciModelBundle, score_axis
from .errors import TableValidationError
from .intersect import CellScoreGrid, CombineRule, combine_scores, rank_cells
from .metrics import EvalReport, RankingResult, evaluate_ranking
from .store import EmbeddingIndex, query_with_store
from .tables import CellCoord, QAInstance, Table, derive_targets, weak_supervise


class Scorer(Protocol):
    def row_probs(self, question: str, table: Table) -> np.ndarray: ...

    def col_probs(self, question: str, table: Table) -> np.ndarray: ...


@dataclass
class BundleScorer:
    """Scores with a trained bundle, optionally reading column vectors
    from a materialized embedding index."""

    bundle: RciModelBundle
    index: EmbeddingIndex | None = None

    def row_probs(self, question: str, table: Table) -> np.ndarray:
        return score_axis(self.bundle.row, question, table, "row", self.bundle.mode)

    def col_probs(self, question: str, table: Table) -> np.ndarray:
        if (
            self.index is not None
            and self.bundle.col.kind == "representation"
            and table.id in self.index.entries
        ):
            return query_with_store(question, table.id, self.index, self.bundle.col)
        return score_axis(self.bundle.col, question, table, "column", self.bundle.mode)


@dataclass
class OracleScorer:
    """Peaks probabilities at known gold cells; ignores serialization mode.

    ``gold`` maps table id to the gold cell set.  Used to verify that the
    ranking/metrics pipeline is independent of how sequences are rendered.
    """

    gold: dict[str, frozenset[CellCoord]]
    hi: float = 0.9
    lo: float = 0.1
    mode: str = "delimited"

    def row_probs(self, question: str, table: Table) -> np.ndarray:
        rows = {c.row for c in self.gold[table.id]}
        return np.array([self.hi if i in rows else self.lo for i in range(1, table.m + 1)])

    def col_probs(self, question: str, table: Table) -> np.ndarray:
        cols = {c.col for c in self.gold[table.id]}
        return np.array([self.hi if j in cols else self.lo for j in range(1, table.n + 1)])


def score_question(
    scorer: Scorer, question: str, table: Table, rule: CombineRule = "product"
) -> CellScoreGrid:
    rows = np.clip(scorer.row_probs(question, table), 0.0, 1.0)
    cols = np.clip(scorer.col_probs(question, table), 0.0, 1.0)
    return combine_scores(rows, cols, rule, table=table)


def resolve_gold(inst: QAInstance, table: Table) -> frozenset[CellCoord]:
    return inst.targets or weak_supervise(inst.answers, table)


def predict_ranking(
    scorer: Scorer, inst: QAInstance, table: Table, k: int = 10
) -> RankingResult:
    grid = score_question(scorer, inst.question, table)
    ranked = rank_cells(grid, k)
    gold = resolve_gold(inst, table)
    if not gold:
        raise TableValidationError(f"instance {inst.qid!r} has no resolvable gold cells")
    return RankingResult(
        qid=inst.qid,
        predictions=tuple(c for c, _ in ranked),
        gold=gold,
        scores=tuple(s for _, s in ranked),
    )


def evaluate_corpus(
    scorer: Scorer,
    instances: Sequence[QAInstance],
    tables: dict[str, Table],
    k: int = 10,
) -> EvalReport:
    """Score every instance and aggregate ranking metrics.

    Per-question records are kept in the report so ablation deltas and
    row/column decompositions can be recomputed without re-scoring.
    """
    results = []
    for inst in instances:
        table = tables.get(inst.table_id)
        if table is None:
            raise TableValidationError(f"instance {inst.qid!r}: unknown table {inst.table_id!r}")
        results.append(predict_ranking(scorer, inst, table, k))
    return evaluate_ranking(results)


def format_ablation(
    train_fn,
    instances: Sequence[QAInstance],
    tables: dict[str, Table],
    modes: Sequence[str] = ("delimited", "plain"),
    k: int = 10,
) -> dict[str, EvalReport]:
    """Train and evaluate one bundle per serialization mode.

    ``train_fn(mode) -> Scorer`` owns training; only the serialization of
    rows and columns differs between runs, the metrics pipeline is shared.
    """
    reports = {}
    for mode in modes:
        scorer = train_fn(mode)
        reports[mode] = evaluate_corpus(scorer, instances, tables, k)
    return reports


def benchmark_column_scoring(
    bundle: RciModelBundle,
    index: EmbeddingIndex,
    online_bundle: RciModelBundle,
    questions: Sequence[str],
    table: Table,
) -> dict[str, float]:
    """Wall-clock of cached representation scoring vs online interaction
    scoring for the same (questions x columns) workload."""
    start = time.perf_counter()
    for q in questions:
        query_with_store(q, table.id, index, bundle.col)
    cached_seconds = time.perf_counter() - start

    start = time.perf_counter()
    for q in questions:
        score_axis(online_bundle.col, q, table, "column", online_bundle.mode)
    online_seconds = time.perf_counter() - start
    return {
        "cached_seconds": cached_seconds,
        "online_interaction_seconds": online_seconds,
        "n_questions": len(questions),
        "n_columns": table.n,
    }
