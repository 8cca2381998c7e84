"""Independent brute-force reference implementations.

These are deliberately written as naive loops, independent of the library
code paths they check.  Tests freeze expected values computed here; the
library must agree with them, never the other way around.
"""

from __future__ import annotations


def brute_reciprocal_rank(predictions, gold) -> float:
    """Linear scan for the first predicted cell present in the gold set."""
    rank = 0
    for cell in predictions:
        rank += 1
        found = False
        for g in gold:
            if g == cell:
                found = True
                break
        if found:
            return 1.0 / rank
    return 0.0


def brute_mrr(prediction_lists, gold_sets) -> float:
    total = 0.0
    count = 0
    for predictions, gold in zip(prediction_lists, gold_sets):
        total += brute_reciprocal_rank(predictions, gold)
        count += 1
    return total / count


def brute_hit_at_1(prediction_lists, gold_sets) -> float:
    hits = 0
    count = 0
    for predictions, gold in zip(prediction_lists, gold_sets):
        count += 1
        if predictions and predictions[0] in gold:
            hits += 1
    return hits / count


def brute_top_cell(row_probs, col_probs):
    """Best product cell with (row, col) ascending tie-break, by full scan."""
    best = None
    best_score = None
    for i, r in enumerate(row_probs, start=1):
        for j, c in enumerate(col_probs, start=1):
            score = r * c
            if best_score is None or score > best_score:
                best_score = score
                best = (i, j)
    return best, best_score


def brute_rank_cells(row_probs, col_probs, k):
    """All cells sorted by (-score, row, col) using explicit insertion."""
    cells = []
    for i, r in enumerate(row_probs, start=1):
        for j, c in enumerate(col_probs, start=1):
            cells.append(((i, j), r * c))
    cells.sort(key=lambda item: (-item[1], item[0][0], item[0][1]))
    return cells[:k]
