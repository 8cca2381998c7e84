"""Train the two sequence-pair classifiers on the synthetic corpus and
evaluate cell ranking, including the formatting ablation.

This reproduces the reference run the test suite freezes: 2,000 training
instances, two serialization modes.  Expect roughly four minutes on two
CPU cores; the tiny models only enter their learning phase after a few
hundred optimizer steps, so smaller corpora can miss it.
"""

import numpy as np

from tableqa import (
    BundleScorer,
    EncoderConfig,
    GeneratorConfig,
    TrainConfig,
    evaluate_corpus,
    generate_synthetic_corpus,
    train_rci,
)
from tableqa.optim import AdamConfig
from tableqa.tokenizer import TokenizerConfig

corpus = generate_synthetic_corpus(GeneratorConfig(), seed=7)
tables = corpus.tables_by_id()
print(f"corpus: {len(corpus.train)}/{len(corpus.dev)}/{len(corpus.test)} instances")
print("sample question:", corpus.train[0].question)

reports = {}
for mode in ("delimited", "plain"):
    config = TrainConfig(
        encoder=EncoderConfig(d_model=48, n_layers=2, n_heads=4, max_len=48, seed=31),
        tokenizer=TokenizerConfig(bucket_count=4096),
        adam=AdamConfig(lr=2e-3, warmup_steps=100),
        epochs=6,
        batch_size=64,
        max_tokens_row=40,
        max_tokens_col=32,
        mode=mode,
        seed=31,
    )
    result = train_rci(corpus.train, tables, config, dev_instances=corpus.dev[:150])
    report = evaluate_corpus(BundleScorer(result.best), corpus.dev, tables, k=10)
    reports[mode] = report
    print(f"\n[{mode}] trained in {result.history['train_seconds']:.0f} s")
    print(f"  row dev curve: {[round(a, 3) for a in result.history['row']['dev_accuracy']]}")
    print(f"  col dev curve: {[round(a, 3) for a in result.history['col']['dev_accuracy']]}")
    print(f"  dev MRR {report.mrr:.3f}  Hit@1 {report.hit_at_1:.3f}  "
          f"row acc {report.row_accuracy:.3f}  col acc {report.col_accuracy:.3f}")

margin = reports["delimited"].hit_at_1 - reports["plain"].hit_at_1
print(f"\nformatting margin (delimited - plain Hit@1): {margin:+.3f}")
