"""Row and column answer-containment classifiers and their training loop.

Two classifier families share the encoder:

* interaction -- the question and the row/column text are concatenated
  into one sequence and classified from the joint CLS state;
* representation -- question and column are encoded independently and a
  head classifies the combination vector ``[r_q, r_c, r_q*r_c,
  (r_q-r_c)^2]``, which lets column vectors be precomputed per table.

The row model is always interaction-based; the column model is either.
Softmax index 0 is the positive ("contains the answer") class.
"""

from __future__ import annotations

import io
import struct
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import BinaryIO, Iterable, Literal, Sequence

import numpy as np

from .encoder import (
    EncoderConfig,
    EncoderModel,
    backward_batch,
    cls_gradient,
    forward_batch,
    grad_check,
    load_encoder,
    new_encoder,
    save_encoder,
)
from .errors import CheckpointError, TableValidationError
from .optim import Adam, AdamConfig
from .serialize import SerializationMode, serialize_column, serialize_row
from .tables import (
    QAInstance,
    Table,
    derive_targets,
    downsample_rows_with_map,
    weak_supervise,
)
from .tokenizer import PAD_ID, TokenizerConfig, assemble_pair, assemble_single

BUNDLE_MAGIC = b"RCIB"
BUNDLE_VERSION = 1

ClassifierKind = Literal["interaction", "representation"]


@dataclass
class Head:
    """Linear classification head: logits = w @ x + b."""

    w: np.ndarray
    b: np.ndarray

    @property
    def d_in(self) -> int:
        return self.w.shape[1]

    @property
    def n_out(self) -> int:
        return self.w.shape[0]


def new_head(n_out: int, d_in: int, seed: int, dtype=np.float32) -> Head:
    rng = np.random.default_rng(seed)
    return Head(
        w=(rng.standard_normal((n_out, d_in)) * 0.02).astype(dtype),
        b=np.zeros(n_out, dtype=dtype),
    )


@dataclass
class SequenceClassifier:
    """An encoder plus head scoring question/sequence pairs."""

    encoder: EncoderModel
    head: Head
    kind: ClassifierKind
    max_tokens: int

    def expected_head_width(self) -> int:
        d = self.encoder.config.d_model
        return d if self.kind == "interaction" else 4 * d


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(-1, keepdims=True)


def softmax_cross_entropy(
    logits: np.ndarray, labels: np.ndarray, weights: np.ndarray
) -> tuple[float, np.ndarray]:
    """Weighted-mean cross entropy and its gradient w.r.t. the logits."""
    probs = softmax(logits)
    picked = probs[np.arange(len(labels)), labels]
    total = weights.sum()
    loss = float((-np.log(np.maximum(picked, 1e-30)) * weights).sum() / total)
    d_logits = probs.copy()
    d_logits[np.arange(len(labels)), labels] -= 1.0
    d_logits *= (weights / total)[:, None]
    return loss, d_logits


def pad_batch(token_lists: Sequence[Sequence[int]], seg_lists: Sequence[Sequence[int]]):
    """Stack ragged token/segment lists into padded int arrays."""
    length = max(len(t) for t in token_lists)
    ids = np.full((len(token_lists), length), PAD_ID, dtype=np.int64)
    segs = np.zeros((len(token_lists), length), dtype=np.int64)
    for r, (toks, sg) in enumerate(zip(token_lists, seg_lists)):
        ids[r, : len(toks)] = toks
        segs[r, : len(sg)] = sg
    return ids, segs


def _forward_cls(params: dict, config: EncoderConfig, ids: np.ndarray, segs: np.ndarray, need_cache: bool):
    mask = (ids != PAD_ID).astype(params["tok_emb"].dtype)
    hidden, cls, cache = forward_batch(params, config, ids, segs, mask, need_cache=need_cache)
    return hidden, cls, cache


# ---------------------------------------------------------------------------
# scoring


def positive_probability(head: Head, x: np.ndarray) -> np.ndarray:
    """Index-0 softmax component of the head logits, for one vector or a batch."""
    logits = x @ head.w.T + head.b
    return softmax(logits)[..., 0]


def score_interaction(question: str, sequence: str, clf: SequenceClassifier) -> float:
    """Probability that the row/column text contains the question's answer."""
    if clf.kind != "interaction":
        raise TableValidationError("score_interaction requires an interaction classifier")
    tokens, segs = assemble_pair(question, sequence, clf.max_tokens, clf.encoder.tokenizer)
    _, cls = clf.encoder.encode(tokens, segs)
    return float(positive_probability(clf.head, cls))


def score_interaction_many(question: str, sequences: Sequence[str], clf: SequenceClassifier) -> np.ndarray:
    """Score one question against several sequences in a single padded batch."""
    assembled = [
        assemble_pair(question, s, clf.max_tokens, clf.encoder.tokenizer) for s in sequences
    ]
    ids, segs = pad_batch([a[0] for a in assembled], [a[1] for a in assembled])
    _, cls, _ = _forward_cls(clf.encoder.params, clf.encoder.config, ids, segs, need_cache=False)
    return positive_probability(clf.head, cls)


def encode_question_vector(clf: SequenceClassifier, question: str) -> np.ndarray:
    tokens, segs = assemble_single(question, clf.max_tokens, clf.encoder.tokenizer, segment=0)
    _, cls = clf.encoder.encode(tokens, segs)
    return cls


def encode_sequence_vector(clf: SequenceClassifier, sequence: str) -> np.ndarray:
    """Query-independent CLS vector for a serialized row/column text."""
    tokens, segs = assemble_single(sequence, clf.max_tokens, clf.encoder.tokenizer, segment=1)
    _, cls = clf.encoder.encode(tokens, segs)
    return cls


def combination_vector(r_q: np.ndarray, r_c: np.ndarray) -> np.ndarray:
    """Concatenate the two vectors, their product, and squared difference."""
    delta = r_q - r_c
    return np.concatenate([r_q, r_c, r_q * r_c, delta * delta])


def score_representation(
    question: str,
    sequence: str,
    clf: SequenceClassifier,
    cached_sequence_vector: np.ndarray | None = None,
) -> float:
    """Score a pair from independently encoded vectors.

    When ``cached_sequence_vector`` is supplied it stands in for the
    sequence encoding; the arithmetic is identical either way, so cached
    and online scoring agree exactly.
    """
    if clf.kind != "representation":
        raise TableValidationError("score_representation requires a representation classifier")
    d = clf.encoder.config.d_model
    if cached_sequence_vector is not None:
        r_c = np.asarray(cached_sequence_vector)
        if r_c.shape != (d,):
            raise TableValidationError(
                f"cached vector has shape {r_c.shape}, expected ({d},)"
            )
    else:
        r_c = encode_sequence_vector(clf, sequence)
    r_q = encode_question_vector(clf, question)
    return float(positive_probability(clf.head, combination_vector(r_q, r_c)))


def score_axis(
    clf: SequenceClassifier,
    question: str,
    table: Table,
    axis: Literal["row", "column"],
    mode: SerializationMode,
) -> np.ndarray:
    """Answer-containment probability for every row or column of a table."""
    if axis == "row":
        sequences = [serialize_row(table, i, mode) for i in range(1, table.m + 1)]
    else:
        sequences = [serialize_column(table, j, mode) for j in range(1, table.n + 1)]
    if clf.kind == "interaction":
        return score_interaction_many(question, sequences, clf)
    return np.array([score_representation(question, s, clf) for s in sequences])


# ---------------------------------------------------------------------------
# model bundle


@dataclass
class RciModelBundle:
    """Row model, column model and the serialization mode they were trained on.

    The row model is always interaction-based.  ``agg`` optionally holds
    the six-way question-type classifier used for aggregation questions.
    """

    row: SequenceClassifier
    col: SequenceClassifier
    mode: SerializationMode = "delimited"
    agg: "QuestionClassifier | None" = None

    def __post_init__(self) -> None:
        if self.row.kind != "interaction":
            raise TableValidationError("the row model must be an interaction classifier")


@dataclass
class QuestionClassifier:
    """Encoder plus six-way head over (question, serialized header) pairs."""

    encoder: EncoderModel
    head: Head
    max_tokens: int


# ---------------------------------------------------------------------------
# training-pair construction


@dataclass(frozen=True)
class TrainingPair:
    question: str
    sequence: str
    label: bool
    weight: float


@dataclass
class PairSets:
    rows: list[TrainingPair]
    cols: list[TrainingPair]
    skipped: int


def build_training_pairs(
    instances: Iterable[QAInstance],
    tables: dict[str, Table],
    mode: SerializationMode = "delimited",
    *,
    max_rows: int = 50,
    seed: int = 0,
) -> PairSets:
    """Emit one pair per row and per column of each instance's gold table.

    Targets come from the instance annotation when present, otherwise from
    matching the answer strings against the cells.  Instances whose targets
    cannot be resolved are skipped and counted.  Oversized tables are capped
    at ``max_rows`` rows, always keeping the target rows.
    """
    rows: list[TrainingPair] = []
    cols: list[TrainingPair] = []
    skipped = 0
    for inst in instances:
        table = tables.get(inst.table_id)
        if table is None:
            skipped += 1
            continue
        targets = inst.targets or weak_supervise(inst.answers, table)
        if not targets:
            skipped += 1
            continue
        rc = derive_targets(targets)
        if len(rc.rows) > max_rows:
            skipped += 1
            continue
        if table.m > max_rows:
            table, row_map = downsample_rows_with_map(table, rc.rows, max_rows, seed)
            target_rows = {row_map[i] for i in rc.rows}
        else:
            target_rows = set(rc.rows)
        target_cols = set(rc.cols)

        n_pos_r = len(target_rows)
        w_pos_r = max(1.0, (table.m - n_pos_r) / n_pos_r)
        for i in range(1, table.m + 1):
            positive = i in target_rows
            rows.append(
                TrainingPair(
                    inst.question,
                    serialize_row(table, i, mode),
                    positive,
                    w_pos_r if positive else 1.0,
                )
            )
        n_pos_c = len(target_cols)
        w_pos_c = max(1.0, (table.n - n_pos_c) / n_pos_c)
        for j in range(1, table.n + 1):
            positive = j in target_cols
            cols.append(
                TrainingPair(
                    inst.question,
                    serialize_column(table, j, mode),
                    positive,
                    w_pos_c if positive else 1.0,
                )
            )
    return PairSets(rows=rows, cols=cols, skipped=skipped)


# ---------------------------------------------------------------------------
# loss closures (shared by training and gradient checking)


def interaction_loss_and_grad(
    params: dict[str, np.ndarray],
    config: EncoderConfig,
    ids: np.ndarray,
    segs: np.ndarray,
    labels: np.ndarray,
    weights: np.ndarray,
) -> tuple[float, dict[str, np.ndarray]]:
    """Cross-entropy over a padded batch; params include head.w / head.b."""
    _, cls, cache = _forward_cls(params, config, ids, segs, need_cache=True)
    logits = cls @ params["head.w"].T + params["head.b"]
    loss, d_logits = softmax_cross_entropy(logits, labels, weights)
    d_cls = d_logits @ params["head.w"]
    grads = backward_batch(params, config, cache, cls_gradient(d_cls, ids.shape, config.d_model))
    grads["head.w"] = d_logits.T @ cls
    grads["head.b"] = d_logits.sum(0)
    return loss, grads


def representation_loss_and_grad(
    params: dict[str, np.ndarray],
    config: EncoderConfig,
    q_ids: np.ndarray,
    q_segs: np.ndarray,
    s_ids: np.ndarray,
    s_segs: np.ndarray,
    labels: np.ndarray,
    weights: np.ndarray,
) -> tuple[float, dict[str, np.ndarray]]:
    """Cross-entropy through the combination vector of two encodings."""
    _, r_q, cache_q = _forward_cls(params, config, q_ids, q_segs, need_cache=True)
    _, r_c, cache_c = _forward_cls(params, config, s_ids, s_segs, need_cache=True)
    delta = r_q - r_c
    v = np.concatenate([r_q, r_c, r_q * r_c, delta * delta], axis=1)
    logits = v @ params["head.w"].T + params["head.b"]
    loss, d_logits = softmax_cross_entropy(logits, labels, weights)
    dv = d_logits @ params["head.w"]
    d = config.d_model
    dv_q, dv_c, dv_p, dv_d = dv[:, :d], dv[:, d : 2 * d], dv[:, 2 * d : 3 * d], dv[:, 3 * d :]
    d_rq = dv_q + dv_p * r_c + 2.0 * delta * dv_d
    d_rc = dv_c + dv_p * r_q - 2.0 * delta * dv_d
    grads = backward_batch(
        params, config, cache_q, cls_gradient(d_rq, q_ids.shape, config.d_model)
    )
    grads_c = backward_batch(
        params, config, cache_c, cls_gradient(d_rc, s_ids.shape, config.d_model)
    )
    for name, g in grads_c.items():
        grads[name] += g
    grads["head.w"] = d_logits.T @ v
    grads["head.b"] = d_logits.sum(0)
    return loss, grads


def grad_check_classifier(
    clf: SequenceClassifier,
    pairs: Sequence[TrainingPair],
    *,
    epsilon: float = 1e-4,
    min_samples: int = 200,
    seed: int = 0,
) -> float:
    """Verify the classifier's analytic gradients on a fixed micro-batch."""
    params = dict(clf.encoder.params)
    params["head.w"] = clf.head.w
    params["head.b"] = clf.head.b
    config = clf.encoder.config
    tok = clf.encoder.tokenizer
    labels = np.array([0 if p.label else 1 for p in pairs])
    weights = np.array([p.weight for p in pairs], dtype=np.float64)
    if clf.kind == "interaction":
        assembled = [assemble_pair(p.question, p.sequence, clf.max_tokens, tok) for p in pairs]
        ids, segs = pad_batch([a[0] for a in assembled], [a[1] for a in assembled])

        def closure(ps):
            return interaction_loss_and_grad(ps, config, ids, segs, labels, weights)

        used = np.unique(ids)
    else:
        q_asm = [assemble_single(p.question, clf.max_tokens, tok, segment=0) for p in pairs]
        s_asm = [assemble_single(p.sequence, clf.max_tokens, tok, segment=1) for p in pairs]
        q_ids, q_segs = pad_batch([a[0] for a in q_asm], [a[1] for a in q_asm])
        s_ids, s_segs = pad_batch([a[0] for a in s_asm], [a[1] for a in s_asm])

        def closure(ps):
            return representation_loss_and_grad(
                ps, config, q_ids, q_segs, s_ids, s_segs, labels, weights
            )

        used = np.unique(np.concatenate([q_ids.ravel(), s_ids.ravel()]))
    max_len = max(
        len(a[0]) for a in (assembled if clf.kind == "interaction" else q_asm + s_asm)
    )
    hints = {
        "tok_emb": used,
        "pos_emb": np.arange(max_len),
    }
    return grad_check(
        params, closure, epsilon=epsilon, min_samples=min_samples, seed=seed, row_hints=hints
    )


# ---------------------------------------------------------------------------
# training loop


@dataclass(frozen=True)
class TrainConfig:
    encoder: EncoderConfig = EncoderConfig()
    tokenizer: TokenizerConfig = TokenizerConfig()
    adam: AdamConfig = AdamConfig()
    col_kind: ClassifierKind = "interaction"
    mode: SerializationMode = "delimited"
    epochs: int = 4
    batch_size: int = 64
    max_tokens_row: int = 64
    max_tokens_col: int = 64
    max_rows: int = 50
    seed: int = 0


@dataclass
class TrainResult:
    final: RciModelBundle
    best: RciModelBundle
    history: dict
    skipped: int


def _axis_accuracy(
    clf: SequenceClassifier,
    instances: Sequence[QAInstance],
    tables: dict[str, Table],
    axis: Literal["row", "column"],
    mode: SerializationMode,
) -> float:
    """Fraction of instances whose top-scored row/column is a gold one."""
    hit = 0
    total = 0
    for inst in instances:
        table = tables.get(inst.table_id)
        if table is None:
            continue
        targets = inst.targets or weak_supervise(inst.answers, table)
        if not targets:
            continue
        rc = derive_targets(targets)
        gold = rc.rows if axis == "row" else rc.cols
        probs = score_axis(clf, inst.question, table, axis, mode)
        if int(np.argmax(probs)) + 1 in gold:
            hit += 1
        total += 1
    return hit / total if total else 0.0


def _train_single_model(
    pairs: list[TrainingPair],
    kind: ClassifierKind,
    max_tokens: int,
    config: TrainConfig,
    seed_offset: int,
    dev_eval,
) -> tuple[SequenceClassifier, SequenceClassifier, dict]:
    enc_config = replace(config.encoder, seed=config.encoder.seed + seed_offset)
    encoder = new_encoder(config.tokenizer, enc_config)
    d_in = enc_config.d_model if kind == "interaction" else 4 * enc_config.d_model
    head = new_head(2, d_in, seed=enc_config.seed + 1)
    params = dict(encoder.params)
    params["head.w"] = head.w
    params["head.b"] = head.b
    optimizer = Adam(params, config.adam)
    rng = np.random.default_rng(config.seed + seed_offset)
    tok = config.tokenizer

    if kind == "interaction":
        assembled = [assemble_pair(p.question, p.sequence, max_tokens, tok) for p in pairs]
    else:
        assembled = [
            (
                assemble_single(p.question, max_tokens, tok, segment=0),
                assemble_single(p.sequence, max_tokens, tok, segment=1),
            )
            for p in pairs
        ]
    labels_all = np.array([0 if p.label else 1 for p in pairs])
    weights_all = np.array([p.weight for p in pairs], dtype=np.float32)

    losses: list[float] = []
    dev_curve: list[float] = []
    best_acc = -1.0
    best_params = {k: v.copy() for k, v in params.items()}
    clf = SequenceClassifier(encoder=encoder, head=head, kind=kind, max_tokens=max_tokens)

    for _epoch in range(config.epochs):
        order = rng.permutation(len(pairs))
        for start in range(0, len(order), config.batch_size):
            take = order[start : start + config.batch_size]
            labels = labels_all[take]
            weights = weights_all[take]
            if kind == "interaction":
                batch = [assembled[i] for i in take]
                ids, segs = pad_batch([a[0] for a in batch], [a[1] for a in batch])
                loss, grads = interaction_loss_and_grad(
                    params, enc_config, ids, segs, labels, weights
                )
            else:
                batch = [assembled[i] for i in take]
                q_ids, q_segs = pad_batch([a[0][0] for a in batch], [a[0][1] for a in batch])
                s_ids, s_segs = pad_batch([a[1][0] for a in batch], [a[1][1] for a in batch])
                loss, grads = representation_loss_and_grad(
                    params, enc_config, q_ids, q_segs, s_ids, s_segs, labels, weights
                )
            if not np.isfinite(loss):
                raise TableValidationError("training diverged: non-finite loss")
            optimizer.step(params, grads)
            losses.append(loss)
        if dev_eval is not None:
            acc = dev_eval(clf)
            dev_curve.append(acc)
            if acc > best_acc:
                best_acc = acc
                best_params = {k: v.copy() for k, v in params.items()}

    if dev_eval is None:
        best_params = {k: v.copy() for k, v in params.items()}

    best_encoder = EncoderModel(
        tok, enc_config, {k: v for k, v in best_params.items() if not k.startswith("head.")}
    )
    best_head = Head(w=best_params["head.w"], b=best_params["head.b"])
    best_clf = SequenceClassifier(best_encoder, best_head, kind, max_tokens)
    history = {"loss": losses, "dev_accuracy": dev_curve, "best_dev_accuracy": best_acc}
    return clf, best_clf, history


def train_rci(
    instances: Sequence[QAInstance],
    tables: dict[str, Table],
    config: TrainConfig = TrainConfig(),
    dev_instances: Sequence[QAInstance] | None = None,
) -> TrainResult:
    """Train the row model and the column model on weakly supervised pairs.

    Every instance contributes one labelled pair per row and per column of
    its gold table.  Returns both the final and the best-on-dev bundles
    together with the training curves.
    """
    if not instances:
        raise TableValidationError("training requires a non-empty dataset")
    pair_sets = build_training_pairs(
        instances, tables, config.mode, max_rows=config.max_rows, seed=config.seed
    )
    if not pair_sets.rows:
        raise TableValidationError("all training instances were skipped (unresolvable targets)")

    started = time.perf_counter()
    row_dev = None
    col_dev = None
    if dev_instances:
        row_dev = lambda clf: _axis_accuracy(clf, dev_instances, tables, "row", config.mode)
        col_dev = lambda clf: _axis_accuracy(clf, dev_instances, tables, "column", config.mode)

    row_final, row_best, row_hist = _train_single_model(
        pair_sets.rows, "interaction", config.max_tokens_row, config, 0, row_dev
    )
    col_final, col_best, col_hist = _train_single_model(
        pair_sets.cols, config.col_kind, config.max_tokens_col, config, 1000, col_dev
    )
    history = {
        "row": row_hist,
        "col": col_hist,
        "skipped": pair_sets.skipped,
        "train_seconds": time.perf_counter() - started,
    }
    return TrainResult(
        final=RciModelBundle(row=row_final, col=col_final, mode=config.mode),
        best=RciModelBundle(row=row_best, col=col_best, mode=config.mode),
        history=history,
        skipped=pair_sets.skipped,
    )


# ---------------------------------------------------------------------------
# bundle checkpoints: container with the two encoder checkpoints and heads


def _write_block(fh: BinaryIO, payload: bytes) -> None:
    fh.write(struct.pack("<Q", len(payload)))
    fh.write(payload)


def _read_block(fh: BinaryIO, what: str) -> bytes:
    raw = fh.read(8)
    if len(raw) != 8:
        raise CheckpointError(f"truncated bundle: missing length of {what}")
    (size,) = struct.unpack("<Q", raw)
    payload = fh.read(size)
    if len(payload) != size:
        raise CheckpointError(f"truncated bundle: incomplete {what}")
    return payload


def _encoder_bytes(model: EncoderModel) -> bytes:
    buf = io.BytesIO()
    save_encoder(model, buf)
    return buf.getvalue()


def _head_bytes(head: Head) -> bytes:
    buf = io.BytesIO()
    buf.write(struct.pack("<2i", head.n_out, head.d_in))
    buf.write(np.ascontiguousarray(head.w, dtype="<f4").tobytes())
    buf.write(np.ascontiguousarray(head.b, dtype="<f4").tobytes())
    return buf.getvalue()


def _head_from_bytes(payload: bytes) -> Head:
    n_out, d_in = struct.unpack("<2i", payload[:8])
    need = 8 + 4 * n_out * d_in + 4 * n_out
    if len(payload) != need:
        raise CheckpointError("truncated bundle: head block has wrong size")
    w = np.frombuffer(payload, dtype="<f4", count=n_out * d_in, offset=8).reshape(n_out, d_in)
    b = np.frombuffer(payload, dtype="<f4", count=n_out, offset=8 + 4 * n_out * d_in)
    return Head(w=w.copy(), b=b.copy())


def column_model_bytes(clf: SequenceClassifier) -> bytes:
    """Canonical bytes of one classifier, used for index fingerprints."""
    return _encoder_bytes(clf.encoder) + _head_bytes(clf.head)


def save_bundle(bundle: RciModelBundle, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(BUNDLE_MAGIC)
        fh.write(struct.pack("B", BUNDLE_VERSION))
        col_kind = 0 if bundle.col.kind == "interaction" else 1
        mode = 0 if bundle.mode == "delimited" else 1
        fh.write(struct.pack("<4B", col_kind, mode, int(bundle.agg is not None), 0))
        fh.write(struct.pack("<2i", bundle.row.max_tokens, bundle.col.max_tokens))
        _write_block(fh, _encoder_bytes(bundle.row.encoder))
        _write_block(fh, _head_bytes(bundle.row.head))
        _write_block(fh, _encoder_bytes(bundle.col.encoder))
        _write_block(fh, _head_bytes(bundle.col.head))
        if bundle.agg is not None:
            fh.write(struct.pack("<i", bundle.agg.max_tokens))
            _write_block(fh, _encoder_bytes(bundle.agg.encoder))
            _write_block(fh, _head_bytes(bundle.agg.head))


def load_bundle(path: str | Path) -> RciModelBundle:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != BUNDLE_MAGIC:
            raise CheckpointError(f"bad magic header {magic!r}, expected {BUNDLE_MAGIC!r}")
        raw = fh.read(1)
        if not raw:
            raise CheckpointError("truncated bundle: missing version tag")
        if raw[0] != BUNDLE_VERSION:
            raise CheckpointError(
                f"version tag mismatch: expected {BUNDLE_VERSION}, found {raw[0]}"
            )
        col_kind_b, mode_b, has_agg, _ = struct.unpack("<4B", fh.read(4))
        row_max, col_max = struct.unpack("<2i", fh.read(8))
        row_enc = load_encoder(io.BytesIO(_read_block(fh, "row encoder")))
        row_head = _head_from_bytes(_read_block(fh, "row head"))
        col_enc = load_encoder(io.BytesIO(_read_block(fh, "column encoder")))
        col_head = _head_from_bytes(_read_block(fh, "column head"))
        kind: ClassifierKind = "interaction" if col_kind_b == 0 else "representation"
        bundle = RciModelBundle(
            row=SequenceClassifier(row_enc, row_head, "interaction", row_max),
            col=SequenceClassifier(col_enc, col_head, kind, col_max),
            mode="delimited" if mode_b == 0 else "plain",
        )
        if has_agg:
            (agg_max,) = struct.unpack("<i", fh.read(4))
            agg_enc = load_encoder(io.BytesIO(_read_block(fh, "aggregation encoder")))
            agg_head = _head_from_bytes(_read_block(fh, "aggregation head"))
            bundle.agg = QuestionClassifier(agg_enc, agg_head, agg_max)
        return bundle
