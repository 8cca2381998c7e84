"""Learning behaviour of the reference training run (session-scoped)."""

import numpy as np
import pytest

from tableqa.classifiers import TrainConfig, score_axis, train_rci
from tableqa.encoder import EncoderConfig
from tableqa.errors import TableValidationError
from tableqa.harness import OracleScorer, evaluate_corpus
from tableqa.metrics import EvalReport
from tableqa.optim import AdamConfig
from tableqa.serialize import serialize_column
from tableqa.synthetic import GeneratorConfig, generate_synthetic_corpus
from tableqa.tables import QAInstance, Table, derive_targets
from tableqa.aggregate import classify_question, predicted_agg_type
from tableqa.classifiers import score_representation

from conftest import REFERENCE_TOKENIZER, assert_finite_params


def _smoothed(values, window=25):
    values = np.asarray(values, dtype=np.float64)
    kernel = np.ones(window) / window
    return np.convolve(values, kernel, mode="valid")


class TestReferenceRun:
    def test_dev_accuracy_thresholds(self, reference_run):
        history = reference_run["delimited"]["result"].history
        assert max(history["col"]["dev_accuracy"]) >= 0.95
        assert max(history["row"]["dev_accuracy"]) >= 0.90

    def test_training_time_within_budget(self, reference_run):
        assert reference_run["delimited"]["seconds"] < 600
        assert reference_run["plain"]["seconds"] < 600

    def test_loss_decreases_over_first_hundred_steps(self, reference_run):
        history = reference_run["delimited"]["result"].history
        col_loss = _smoothed(history["col"]["loss"][:100])
        assert col_loss[-1] < col_loss[0]

    def test_loss_decreases_over_full_training(self, reference_run):
        history = reference_run["delimited"]["result"].history
        for axis in ("row", "col"):
            curve = history[axis]["loss"]
            assert np.mean(curve[-25:]) < np.mean(curve[:25])

    def test_parameters_finite_after_training(self, reference_run):
        bundle = reference_run["delimited"]["result"].best
        assert_finite_params(bundle.row.encoder.params)
        assert_finite_params(bundle.col.encoder.params)

    def test_no_instances_skipped(self, reference_run):
        assert reference_run["delimited"]["result"].skipped == 0

    def test_gold_column_outscores_distractors_on_holdout(
        self, reference_run, reference_corpus
    ):
        bundle = reference_run["delimited"]["result"].best
        tables = reference_corpus.tables_by_id()
        rng = np.random.default_rng(17)
        wins = 0
        total = 0
        for inst in reference_corpus.dev[:150]:
            table = tables[inst.table_id]
            gold_cols = derive_targets(inst.targets).cols
            others = [j for j in range(1, table.n + 1) if j not in gold_cols]
            if not others:
                continue
            gold_j = sorted(gold_cols)[0]
            distractor_j = others[int(rng.integers(len(others)))]
            probs = score_axis(bundle.col, inst.question, table, "column", bundle.mode)
            wins += int(probs[gold_j - 1] > probs[distractor_j - 1])
            total += 1
        assert total >= 100
        assert wins / total >= 0.95


class TestAblation:
    def test_delimited_beats_plain(self, reference_run):
        delim = reference_run["delimited"]["report"]
        plain = reference_run["plain"]["report"]
        assert delim.hit_at_1 >= 0.85
        assert delim.hit_at_1 > plain.hit_at_1

    def test_metrics_pipeline_identical_across_modes_with_oracle(self, reference_corpus):
        tables = reference_corpus.tables_by_id()
        instances = reference_corpus.dev[:40]
        gold = {
            inst.table_id: inst.targets for inst in instances
        }
        reports = []
        for mode in ("delimited", "plain"):
            scorer = OracleScorer(gold, mode=mode)
            reports.append(evaluate_corpus(scorer, instances, tables, k=5))
        assert reports[0].to_dict() == reports[1].to_dict()


class TestQuestionClassifier:
    def test_holdout_accuracy(self, trained_question_classifier, agg_corpus):
        tables = agg_corpus.tables_by_id()
        hits = 0
        for inst in agg_corpus.dev:
            table = tables[inst.table_id]
            dist = classify_question(inst.question, table.header, trained_question_classifier)
            hits += int(predicted_agg_type(dist) == inst.agg_label)
        assert hits / len(agg_corpus.dev) >= 0.95


class TestTrainingEdgeCases:
    def test_empty_dataset_rejected(self):
        with pytest.raises(TableValidationError):
            train_rci([], {}, TrainConfig())

    def test_all_skipped_rejected(self):
        table = Table(id="t", header=("a",), cells=(("x",),))
        inst = QAInstance(qid="q", question="?", table_id="t", answers=frozenset({"zzz"}))
        with pytest.raises(TableValidationError, match="skipped"):
            train_rci([inst], {"t": table}, TrainConfig())

    def test_representation_training_reduces_loss(self):
        corpus = generate_synthetic_corpus(
            GeneratorConfig(n_train=120, n_dev=10, n_test=10), seed=19
        )
        config = TrainConfig(
            encoder=EncoderConfig(d_model=32, n_layers=1, n_heads=2, max_len=48, seed=2),
            tokenizer=REFERENCE_TOKENIZER,
            adam=AdamConfig(lr=2e-3, warmup_steps=20),
            col_kind="representation",
            epochs=3,
            batch_size=32,
            max_tokens_row=40,
            max_tokens_col=32,
            seed=2,
        )
        result = train_rci(corpus.train, corpus.tables_by_id(), config)
        curve = result.history["col"]["loss"]
        assert result.final.col.kind == "representation"
        assert np.mean(curve[-5:]) < np.mean(curve[:5])
        # trained representation scoring still behaves like a probability
        table = corpus.tables[0]
        p = score_representation(
            corpus.train[0].question, serialize_column(table, 1), result.final.col
        )
        assert 0.0 <= p <= 1.0
