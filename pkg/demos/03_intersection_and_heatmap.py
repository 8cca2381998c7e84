"""Combine row and column probabilities into cell scores, rank the cells,
and render the normalized heatmap as ASCII shades.

Row and column classifiers are trained independently, so the default cell
score is simply the product of the two probabilities.
"""

import numpy as np

from tableqa import build_heatmap, combine_scores, rank_cells

row_probs = [0.90, 0.15, 0.65, 0.08]
col_probs = [0.10, 0.85, 0.30]

grid = combine_scores(row_probs, col_probs, table_id="demo")
print("cell scores (rows x cols):")
print(np.array_str(grid.cell_scores, precision=3))

print("\ntop 5 cells:")
for coord, score in rank_cells(grid, 5):
    print(f"  row {coord.row}, col {coord.col}: {score:.4f}")

heatmap = build_heatmap(grid)
shades = " .:-=+*#%@"
print("\nheatmap (darker = more confident), argmax at",
      f"({heatmap.argmax.row}, {heatmap.argmax.col}):")
for row in heatmap.intensities:
    line = "".join(shades[min(int(v * (len(shades) - 1)), len(shades) - 1)] * 2 for v in row)
    print(" ", line)

# ranking is invariant to the normalization and to the log-sum variant
log_grid = combine_scores(row_probs, col_probs, "logsum", table_id="demo")
assert rank_cells(log_grid, 1)[0][0] == rank_cells(grid, 1)[0][0]
print("\nlog-sum combination ranks the same top cell:", tuple(rank_cells(grid, 1)[0][0]))
