"""Encoder forward/backward, gradient verification, checkpoint format."""

import struct

import numpy as np
import pytest

from tableqa.classifiers import (
    TrainingPair,
    grad_check_classifier,
    interaction_loss_and_grad,
    new_head,
    pad_batch,
)
from tableqa.encoder import (
    EncoderConfig,
    checkpoint_roundtrip,
    forward_batch,
    load_encoder,
    new_encoder,
    parameter_shapes,
    save_encoder,
)
from tableqa.errors import CheckpointError, TableValidationError
from tableqa.optim import Adam, AdamConfig
from tableqa.tokenizer import TokenizerConfig, assemble_pair

from conftest import assert_finite_params, tiny_encoder_config, tiny_interaction_classifier, tiny_tokenizer

PAIRS = [
    TrainingPair("what is the color of alice ?", "name : alice | color : red |", True, 2.0),
    TrainingPair("which name has the home tigers ?", "home : tigers | away : lions |", False, 1.0),
    TrainingPair("what is the town of bob ?", "city : paris | color : blue |", False, 1.0),
]


def _probe(model):
    tokens, segs = assemble_pair(
        "what party", "Party : x | Notes : |", model.config.max_len, model.tokenizer
    )
    return model.encode(tokens, segs)


class TestEncode:
    def test_shape_contract(self):
        model = new_encoder(tiny_tokenizer(), tiny_encoder_config())
        hidden, cls = _probe(model)
        assert hidden.shape == (hidden.shape[0], model.config.d_model)
        assert cls.shape == (model.config.d_model,)
        np.testing.assert_array_equal(cls, hidden[0])

    def test_bitwise_deterministic(self):
        model = new_encoder(tiny_tokenizer(), tiny_encoder_config())
        h1, c1 = _probe(model)
        h2, c2 = _probe(model)
        assert np.array_equal(h1, h2) and np.array_equal(c1, c2)

    def test_full_attention_not_causal(self):
        model = new_encoder(tiny_tokenizer(), tiny_encoder_config())
        tokens, segs = assemble_pair("a b", "x y z w", 32, model.tokenizer)
        h1, _ = model.encode(tokens, segs)
        changed = list(tokens)
        changed[-2] = changed[-2] + 1  # legal id range is wide
        h2, _ = model.encode(changed, segs)
        assert not np.array_equal(h1[1], h2[1])

    def test_permutation_sensitivity(self):
        model = new_encoder(tiny_tokenizer(), tiny_encoder_config())
        tokens, segs = assemble_pair("a b c", "x y z w v", 32, model.tokenizer)
        _, c1 = model.encode(tokens, segs)
        mid = tokens[1:-1]
        shuffled = [tokens[0]] + mid[::-1] + [tokens[-1]]
        _, c2 = model.encode(shuffled, segs)
        assert not np.array_equal(c1, c2)

    def test_overlong_input_rejected(self):
        model = new_encoder(tiny_tokenizer(), tiny_encoder_config())
        with pytest.raises(TableValidationError, match="max_len"):
            model.encode(list(range(3, 40)), [0] * 37)

    def test_misaligned_segments_rejected(self):
        model = new_encoder(tiny_tokenizer(), tiny_encoder_config())
        with pytest.raises(TableValidationError):
            model.encode([1, 5, 2], [0, 0])

    def test_config_validation(self):
        with pytest.raises(TableValidationError):
            EncoderConfig(d_model=30, n_heads=4)
        with pytest.raises(TableValidationError):
            EncoderConfig(d_model=0)


class TestGradients:
    def test_interaction_gradients_match_central_differences(self):
        clf = tiny_interaction_classifier(seed=3)
        err = grad_check_classifier(clf, PAIRS, epsilon=1e-4, min_samples=200, seed=1)
        assert err < 1e-3

    def test_zero_head_loss_is_ln2(self):
        clf = tiny_interaction_classifier(seed=5)
        clf.head.w[:] = 0.0
        clf.head.b[:] = 0.0
        params = dict(clf.encoder.params)
        params["head.w"] = clf.head.w
        params["head.b"] = clf.head.b
        assembled = [
            assemble_pair(p.question, p.sequence, clf.max_tokens, clf.encoder.tokenizer)
            for p in PAIRS
        ]
        ids, segs = pad_batch([a[0] for a in assembled], [a[1] for a in assembled])
        labels = np.array([0, 1, 1])
        weights = np.array([2.0, 1.0, 1.0], dtype=np.float32)
        loss, _ = interaction_loss_and_grad(params, clf.encoder.config, ids, segs, labels, weights)
        assert abs(loss - np.log(2.0)) < 1e-6

    def test_central_difference_second_order_convergence(self):
        clf = tiny_interaction_classifier(seed=7)
        params = {k: v.astype(np.float64) for k, v in clf.encoder.params.items()}
        params["head.w"] = clf.head.w.astype(np.float64)
        params["head.b"] = clf.head.b.astype(np.float64)
        assembled = [
            assemble_pair(p.question, p.sequence, clf.max_tokens, clf.encoder.tokenizer)
            for p in PAIRS
        ]
        ids, segs = pad_batch([a[0] for a in assembled], [a[1] for a in assembled])
        labels = np.array([0, 1, 1])
        weights = np.ones(3)

        def loss_at(eps, name, idx):
            flat = params[name].reshape(-1)
            orig = flat[idx]
            flat[idx] = orig + eps
            hi, _ = interaction_loss_and_grad(params, clf.encoder.config, ids, segs, labels, weights)
            flat[idx] = orig - eps
            lo, _ = interaction_loss_and_grad(params, clf.encoder.config, ids, segs, labels, weights)
            flat[idx] = orig
            return (hi - lo) / (2 * eps)

        # central differences have O(eps^2) error, so the Richardson ratio
        # (n(e) - n(e/4)) / (n(e/2) - n(e/4)) must approach 5
        name, idx = "head.w", 3
        n1 = loss_at(1e-2, name, idx)
        n2 = loss_at(5e-3, name, idx)
        n3 = loss_at(2.5e-3, name, idx)
        assert abs(n1 - n3) > 0
        ratio = (n1 - n3) / (n2 - n3)
        assert 3.5 < ratio < 7.0

    def test_finite_through_training_steps(self):
        config = EncoderConfig(d_model=16, n_layers=1, n_heads=2, max_len=24, seed=9)
        tok = tiny_tokenizer()
        enc = new_encoder(tok, config)
        head = new_head(2, 16, 10)
        params = dict(enc.params)
        params["head.w"] = head.w
        params["head.b"] = head.b
        optimizer = Adam(params, AdamConfig(lr=1e-3, warmup_steps=100))
        rng = np.random.default_rng(0)
        ids = rng.integers(3, 200, size=(8, 16))
        segs = np.zeros_like(ids)
        labels = rng.integers(0, 2, size=8)
        weights = np.ones(8, dtype=np.float32)
        for _ in range(1000):
            loss, grads = interaction_loss_and_grad(params, config, ids, segs, labels, weights)
            assert np.isfinite(loss)
            optimizer.step(params, grads)
        assert_finite_params(params)


class TestCheckpoint:
    def test_roundtrip_bitwise_identical(self, tmp_path):
        model = new_encoder(tiny_tokenizer(), tiny_encoder_config())
        h1, c1 = _probe(model)
        loaded = checkpoint_roundtrip(model, tmp_path / "m.rci")
        h2, c2 = _probe(loaded)
        assert np.array_equal(h1, h2)
        assert np.array_equal(c1, c2)
        assert loaded.version == model.version

    def test_corrupted_magic_rejected(self, tmp_path):
        path = tmp_path / "m.rci"
        model = new_encoder(tiny_tokenizer(), tiny_encoder_config())
        save_encoder(model, path)
        data = bytearray(path.read_bytes())
        data[:4] = b"XXXX"
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointError, match="magic"):
            load_encoder(path)

    def test_version_mismatch_names_versions(self, tmp_path):
        path = tmp_path / "m.rci"
        model = new_encoder(tiny_tokenizer(), tiny_encoder_config())
        save_encoder(model, path)
        data = bytearray(path.read_bytes())
        data[4] = 9
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointError, match="expected 1.*found 9"):
            load_encoder(path)

    def test_truncated_file_rejected(self, tmp_path):
        path = tmp_path / "m.rci"
        model = new_encoder(tiny_tokenizer(), tiny_encoder_config())
        save_encoder(model, path)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(CheckpointError, match="truncated"):
            load_encoder(path)

    def test_shape_mismatch_rejected(self, tmp_path):
        path = tmp_path / "m.rci"
        model = new_encoder(tiny_tokenizer(), tiny_encoder_config())
        save_encoder(model, path)
        data = bytearray(path.read_bytes())
        # d_model lives in the third int32 of the config block after magic+version
        offset = 5 + 8
        (d_model,) = struct.unpack_from("<i", data, offset)
        struct.pack_into("<i", data, offset, d_model * 2)
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointError, match="shape mismatch|truncated"):
            load_encoder(path)

    def test_declaration_order_is_stable(self):
        tok = tiny_tokenizer()
        cfg = tiny_encoder_config()
        names = list(parameter_shapes(tok, cfg))
        assert names[0] == "tok_emb"
        assert names[1] == "pos_emb"
        assert names[2] == "seg_emb"
        assert "layer0.wq" in names and "layer1.w2" in names


class TestBatching:
    def test_padding_does_not_change_real_positions(self):
        model = new_encoder(tiny_tokenizer(), tiny_encoder_config())
        tokens, segs = assemble_pair("a b", "x y z", 32, model.tokenizer)
        hidden_single, cls_single = model.encode(tokens, segs)

        ids = np.full((2, len(tokens) + 4), 0, dtype=np.int64)
        segs_b = np.zeros_like(ids)
        ids[0, : len(tokens)] = tokens
        segs_b[0, : len(segs)] = segs
        ids[1, : len(tokens)] = tokens
        segs_b[1, : len(segs)] = segs
        mask = (ids != 0).astype(np.float32)
        hidden, cls, _ = forward_batch(
            model.params, model.config, ids, segs_b, mask, need_cache=False
        )
        np.testing.assert_allclose(hidden[0, : len(tokens)], hidden_single, atol=1e-6)
        np.testing.assert_allclose(cls[0], cls_single, atol=1e-6)
