"""Classify the question type and aggregate confident cells.

A question is lookup, max, min, count, sum or average; the serialized
table header is part of the classifier input because the same wording can
call for different operations on different tables.  Aggregation runs over
the cells whose intersection score clears the threshold tau.
"""

from tableqa import (
    AggTrainConfig,
    EncoderConfig,
    GeneratorConfig,
    Table,
    classify_question,
    combine_scores,
    execute_aggregation,
    generate_synthetic_corpus,
    train_question_classifier,
)
from tableqa.aggregate import predicted_agg_type
from tableqa.optim import AdamConfig
from tableqa.tokenizer import TokenizerConfig

# train the six-way question classifier on a mixed synthetic corpus
corpus = generate_synthetic_corpus(
    GeneratorConfig(n_train=800, n_dev=150, n_test=150, agg_fraction=0.7), seed=13
)
tables = corpus.tables_by_id()
clf = train_question_classifier(
    corpus.train,
    tables,
    AggTrainConfig(
        encoder=EncoderConfig(d_model=48, n_layers=1, n_heads=4, max_len=64, seed=5),
        tokenizer=TokenizerConfig(bucket_count=4096),
        adam=AdamConfig(lr=2e-3, warmup_steps=100),
        epochs=3,
        max_tokens=48,
        seed=5,
    ),
)

header = ("name", "home", "away", "score")
for question in (
    "what is the total score ?",
    "what is the highest score ?",
    "how many names are listed ?",
    "what is the colour of alice ?",
):
    dist = classify_question(question, header, clf)
    top = predicted_agg_type(dist)
    print(f"{question:38s} -> {top:8s} (p={dist[top]:.2f})")

# execute aggregations over a score grid
table = Table(
    id="scores",
    header=("name", "score"),
    cells=(("alice", "3"), ("bob", "5"), ("carol", "9")),
)
grid = combine_scores([0.9, 0.8, 0.7], [0.1, 0.95], table=table)
for agg in ("sum", "average", "max", "min", "count", "lookup"):
    answer = execute_aggregation(grid, table, agg, tau=0.5)
    if answer.kind == "number":
        print(f"{agg:8s} over confident cells -> {answer.value}")
    else:
        cells = [(c.row, c.col, text) for c, text in answer.cells]
        print(f"{agg:8s} over confident cells -> {cells}")
