"""Build a table, match answer strings against its cells, and project the
matches onto row and column index sets.

The answer-cell coordinates are usually not annotated in table QA data;
they are recovered by comparing normalized answer texts with normalized
cell texts, and every occurrence counts as correct.
"""

from tableqa import Table, derive_targets, downsample_rows, weak_supervise

table = Table(
    id="congress",
    header=("Name", "Took office", "Left office", "Party", "Notes / Events"),
    cells=(
        ("Benjamin Contee", "1789", "1791", "Anti-Administration", ""),
        ("William Pinkney", "1791", "1791", "Pro-Administration", "resigned"),
        ("John Francis Mercer", "1792", "1793", "Anti-Administration", ""),
        ("Uriah Forrest", "1793", "1794", "Pro-Administration", "resigned"),
        ("Benjamin Edwards", "1795", "1795", "Pro-Administration", ""),
    ),
)

print(f"table {table.id!r}: {table.m} rows x {table.n} columns")

question = "What party was William Pinkney and Uriah Forrest a part of?"
answers = {"Pro-Administration"}
targets = weak_supervise(answers, table)
print(f"\n{question}")
print("answer matches at:", sorted(targets))

# the matches feed the row and column classifiers as training labels
rc = derive_targets(targets)
print("gold rows:", sorted(rc.rows), "| gold columns:", sorted(rc.cols))

# matching is trimmed and case-folded; all occurrences count
assert weak_supervise({"  pro-administration "}, table) == targets

# oversized tables are capped while always keeping the rows that matter
tall = Table(
    id="tall",
    header=("k", "v"),
    cells=tuple((f"key{i}", f"value{i}") for i in range(1, 501)),
)
small = downsample_rows(tall, keep={7, 300}, max_rows=50, seed=0)
print(f"\ndownsampled {tall.m} -> {small.m} rows,",
      "kept rows present:", any(r[0] == "key7" for r in small.cells),
      any(r[0] == "key300" for r in small.cells))
