"""Intersect row and column probabilities into cell scores, rank, and render.

The row and column classifiers are trained independently, so the default
combination is the outer product of their probabilities.  A log-sum rule
(sum of floored log-probabilities) is available behind a flag; it ranks
identically for strictly positive probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import TableValidationError
from .tables import CellCoord, Table

CombineRule = Literal["product", "logsum"]

LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class CellScoreGrid:
    """Per-cell scores with the row/column probabilities they came from."""

    table_id: str
    row_probs: np.ndarray
    col_probs: np.ndarray
    cell_scores: np.ndarray
    combine_rule: CombineRule = "product"

    @property
    def m(self) -> int:
        return self.cell_scores.shape[0]

    @property
    def n(self) -> int:
        return self.cell_scores.shape[1]


@dataclass(frozen=True)
class Heatmap:
    """Normalized cell intensities in [0, 1] with the argmax coordinate."""

    table_id: str
    intensities: np.ndarray
    argmax: CellCoord


def combine_scores(
    row_probs: np.ndarray,
    col_probs: np.ndarray,
    rule: CombineRule = "product",
    *,
    table: Table | None = None,
    table_id: str = "",
) -> CellScoreGrid:
    """Combine per-row and per-column probabilities into an m-by-n grid."""
    rows = np.asarray(row_probs, dtype=np.float64)
    cols = np.asarray(col_probs, dtype=np.float64)
    if rows.ndim != 1 or cols.ndim != 1:
        raise TableValidationError("row and column probabilities must be vectors")
    if np.any((rows < 0) | (rows > 1)) or np.any((cols < 0) | (cols > 1)):
        raise TableValidationError("probabilities must lie in [0, 1]")
    if table is not None:
        if rows.shape[0] != table.m or cols.shape[0] != table.n:
            raise TableValidationError(
                f"grid {rows.shape[0]}x{cols.shape[0]} does not match "
                f"table {table.id!r} ({table.m}x{table.n})"
            )
        table_id = table.id
    if rule == "product":
        grid = np.outer(rows, cols)
    elif rule == "logsum":
        grid = np.add.outer(np.log(np.maximum(rows, LOG_FLOOR)), np.log(np.maximum(cols, LOG_FLOOR)))
    else:
        raise TableValidationError(f"unknown combination rule {rule!r}")
    return CellScoreGrid(
        table_id=table_id, row_probs=rows, col_probs=cols, cell_scores=grid, combine_rule=rule
    )


def rank_cells(grid: CellScoreGrid, k: int) -> list[tuple[CellCoord, float]]:
    """Top-k cells by descending score; ties break by (row, col) ascending."""
    if k < 1:
        raise TableValidationError("k must be at least 1")
    scores = grid.cell_scores
    cells = [
        (CellCoord(i + 1, j + 1), float(scores[i, j]))
        for i in range(scores.shape[0])
        for j in range(scores.shape[1])
    ]
    cells.sort(key=lambda item: (-item[1], item[0].row, item[0].col))
    return cells[: min(k, len(cells))]


def build_heatmap(grid: CellScoreGrid) -> Heatmap:
    """Normalize cell scores to [0, 1] intensities, preserving their order.

    Product-rule grids divide by the maximum score (an all-zero grid stays
    all zeros).  Log-sum grids are exponentiated relative to their maximum,
    which yields the same intensities the floored product would.
    """
    scores = grid.cell_scores
    if grid.combine_rule == "logsum":
        intensities = np.exp(scores - scores.max())
    else:
        top = scores.max()
        intensities = scores / top if top > 0 else np.zeros_like(scores)
    argmax, _ = rank_cells(grid, 1)[0]
    return Heatmap(table_id=grid.table_id, intensities=intensities, argmax=argmax)


def heatmap_record(grid: CellScoreGrid, k: int = 10) -> dict:
    """External heatmap record: intensities, argmax, and the top-k cells."""
    heatmap = build_heatmap(grid)
    topk = rank_cells(grid, k)
    return {
        "table_id": grid.table_id,
        "intensities": [[float(x) for x in row] for row in heatmap.intensities],
        "argmax": [heatmap.argmax.row, heatmap.argmax.col],
        "topk": [{"row": c.row, "col": c.col, "score": s} for c, s in topk],
    }
