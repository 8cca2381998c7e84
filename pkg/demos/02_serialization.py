"""Render rows and columns as delimited text sequences.

Each header is closed with ` :` and each cell value with ` |`, so a row
reads like `header : value | header : value | ...` and a column like
`header : value | value | ... |`.  The plain mode drops all structure and
exists to measure how much the markers are worth (see demo 04).
"""

from tableqa import Table, serialize_column, serialize_row
from tableqa.tokenizer import TokenizerConfig, assemble_pair

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

print("row 1, delimited:")
print(" ", serialize_row(table, 1))
print("row 1, plain:")
print(" ", serialize_row(table, 1, "plain"))

print("\ncolumn 2, delimited:")
print(" ", serialize_column(table, 2))
print("column 2, plain:")
print(" ", serialize_column(table, 2, "plain"))

# a question and a sequence are laid out as CLS question SEP sequence SEP;
# the table side is tail-truncated when the pair exceeds the budget
config = TokenizerConfig(bucket_count=1000)
tokens, segments = assemble_pair(
    "what party", serialize_row(table, 2), max_tokens=24, config=config
)
print(f"\nassembled pair: {len(tokens)} token ids")
print("segment labels: ", "".join(str(s) for s in segments), " (0 = question side)")
