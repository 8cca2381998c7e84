"""Shared fixtures: the worked-example table, tiny model factories, and the
session-scoped reference training run used by the learning and acceptance
tests.

The reference run parameters are frozen: corpus seed 7, training seed 31,
48-wide 2-layer encoder, 6 epochs.  Training both serialization modes
takes a few CPU-minutes and happens once per session.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from tableqa.aggregate import AggTrainConfig, train_question_classifier
from tableqa.classifiers import (
    SequenceClassifier,
    TrainConfig,
    new_head,
    train_rci,
)
from tableqa.encoder import EncoderConfig, new_encoder
from tableqa.harness import BundleScorer, evaluate_corpus
from tableqa.optim import AdamConfig
from tableqa.synthetic import GeneratorConfig, generate_synthetic_corpus
from tableqa.tables import Table
from tableqa.tokenizer import TokenizerConfig

CORPUS_SEED = 7
TRAIN_SEED = 31
REFERENCE_TOKENIZER = TokenizerConfig(bucket_count=4096)


@pytest.fixture
def congress_table() -> Table:
    """The five-row congress-delegation table from the worked example."""
    return Table(
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


def tiny_encoder_config(seed: int = 3) -> EncoderConfig:
    return EncoderConfig(d_model=16, n_layers=2, n_heads=2, max_len=32, seed=seed)


def tiny_tokenizer() -> TokenizerConfig:
    return TokenizerConfig(bucket_count=211)


def tiny_interaction_classifier(seed: int = 3, max_tokens: int = 24) -> SequenceClassifier:
    enc = new_encoder(tiny_tokenizer(), tiny_encoder_config(seed))
    return SequenceClassifier(enc, new_head(2, 16, seed + 1), "interaction", max_tokens)


def tiny_representation_classifier(seed: int = 3, max_tokens: int = 24) -> SequenceClassifier:
    enc = new_encoder(tiny_tokenizer(), tiny_encoder_config(seed))
    return SequenceClassifier(enc, new_head(2, 64, seed + 1), "representation", max_tokens)


def reference_train_config(mode: str) -> TrainConfig:
    return TrainConfig(
        encoder=EncoderConfig(d_model=48, n_layers=2, n_heads=4, max_len=48, seed=TRAIN_SEED),
        tokenizer=REFERENCE_TOKENIZER,
        adam=AdamConfig(lr=2e-3, warmup_steps=100),
        epochs=6,
        batch_size=64,
        max_tokens_row=40,
        max_tokens_col=32,
        mode=mode,
        seed=TRAIN_SEED,
    )


@pytest.fixture(scope="session")
def reference_corpus():
    return generate_synthetic_corpus(GeneratorConfig(), seed=CORPUS_SEED)


@pytest.fixture(scope="session")
def reference_run(reference_corpus):
    """Train delimited and plain bundles once; evaluate both on dev."""
    tables = reference_corpus.tables_by_id()
    runs = {}
    for mode in ("delimited", "plain"):
        started = time.perf_counter()
        result = train_rci(
            reference_corpus.train,
            tables,
            reference_train_config(mode),
            dev_instances=reference_corpus.dev[:150],
        )
        seconds = time.perf_counter() - started
        report = evaluate_corpus(
            BundleScorer(result.best), reference_corpus.dev, tables, k=10
        )
        runs[mode] = {"result": result, "report": report, "seconds": seconds}
    return runs


@pytest.fixture(scope="session")
def agg_corpus():
    return generate_synthetic_corpus(
        GeneratorConfig(n_train=1200, n_dev=300, n_test=300, agg_fraction=0.7), seed=13
    )


@pytest.fixture(scope="session")
def trained_question_classifier(agg_corpus):
    config = AggTrainConfig(
        encoder=EncoderConfig(d_model=48, n_layers=1, n_heads=4, max_len=64, seed=5),
        tokenizer=REFERENCE_TOKENIZER,
        adam=AdamConfig(lr=2e-3, warmup_steps=100),
        epochs=4,
        batch_size=64,
        max_tokens=48,
        seed=5,
    )
    return train_question_classifier(agg_corpus.train, agg_corpus.tables_by_id(), config)


def assert_finite_params(params: dict[str, np.ndarray]) -> None:
    for name, tensor in params.items():
        assert np.all(np.isfinite(tensor)), f"non-finite values in {name}"
