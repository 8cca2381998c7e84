"""Compact trainable text encoder with hand-written backpropagation.

The encoder is a small pre-activation-free transformer stack: hashed token
embeddings plus learned position and segment embeddings, followed by
``n_layers`` blocks of multi-head self-attention and a GELU feed-forward,
each with residual connection and layer norm.  The hidden state at the
CLS position summarizes the sequence for classification heads.

Everything is plain numpy.  The forward pass keeps a cache so the
backward pass can produce analytic gradients for every parameter tensor;
:func:`grad_check` verifies those against central finite differences.
Parameters are float32; gradient checking upcasts to float64 because
central differences at 32-bit precision drown in rounding noise.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Callable

import numpy as np
from scipy.special import erf  # noqa: F401  (kept for dtype probes in tests)

from .errors import CheckpointError, TableValidationError
from .tokenizer import TokenizerConfig

FORMAT_VERSION = 1
MAGIC = b"RCI1"

# python-float constants: numpy scalar constants would silently upcast
# float32 activations to float64
LN_EPS = 1e-5
MASK_BIAS = -1e9
_GELU_C = float(np.sqrt(2.0 / np.pi))
_GELU_A = 0.044715


@dataclass(frozen=True)
class EncoderConfig:
    d_model: int = 128
    n_layers: int = 2
    n_heads: int = 4
    max_len: int = 256
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.d_model, self.n_layers, self.n_heads, self.max_len) < 1:
            raise TableValidationError("encoder dimensions must be positive")
        if self.d_model % self.n_heads != 0:
            raise TableValidationError(
                f"d_model={self.d_model} is not divisible by n_heads={self.n_heads}"
            )

    @property
    def d_head(self) -> int:
        return self.d_model // self.n_heads

    @property
    def d_ffn(self) -> int:
        return 4 * self.d_model


INIT_STD = 0.02
TOKEN_INIT_STD = 0.1
MARKER_INIT_STD = 0.03


def parameter_shapes(tokenizer: TokenizerConfig, config: EncoderConfig) -> dict[str, tuple[int, ...]]:
    """Parameter tensors in declaration order (also the checkpoint order)."""
    d, f = config.d_model, config.d_ffn
    shapes: dict[str, tuple[int, ...]] = {
        "tok_emb": (tokenizer.vocab_size, d),
        "pos_emb": (config.max_len, d),
        "seg_emb": (2, d),
        "final_ln_g": (d,),
        "final_ln_b": (d,),
    }
    for l in range(config.n_layers):
        p = f"layer{l}."
        shapes[p + "ln1_g"] = (d,)
        shapes[p + "ln1_b"] = (d,)
        shapes[p + "wq"] = (d, d)
        shapes[p + "bq"] = (d,)
        shapes[p + "wk"] = (d, d)
        shapes[p + "bk"] = (d,)
        shapes[p + "wv"] = (d, d)
        shapes[p + "bv"] = (d,)
        shapes[p + "wo"] = (d, d)
        shapes[p + "bo"] = (d,)
        shapes[p + "ln2_g"] = (d,)
        shapes[p + "ln2_b"] = (d,)
        shapes[p + "w1"] = (d, f)
        shapes[p + "b1"] = (f,)
        shapes[p + "w2"] = (f, d)
        shapes[p + "b2"] = (d,)
    return shapes


def marker_dims(d_model: int) -> int:
    """Width of the position slice and of the segment slice."""
    return max(4, d_model // 8)


def init_params(
    tokenizer: TokenizerConfig, config: EncoderConfig, dtype=np.float32
) -> dict[str, np.ndarray]:
    """Seeded Gaussian init, zero biases, unit layer-norm gains.

    Three deliberate structural choices make the tiny stack trainable
    from scratch in minutes instead of hours, without leaving the
    standard transformer parameterization:

    * token, position and segment embeddings occupy disjoint dimension
      slices, so positional and side markers never drown token identity;
    * query and key projections start as the identity, making initial
      attention a cosine-similarity match: equal tokens attend to each
      other from the very first step;
    * value and output projections start as the identity, so attended
      content is copied into the residual stream verbatim rather than
      through a near-zero random map.

    All parameters decouple freely during training.
    """
    rng = np.random.default_rng(config.seed)
    d = config.d_model
    s = marker_dims(d)
    tok_end, pos_end = d - 2 * s, d - s
    params: dict[str, np.ndarray] = {}
    for name, shape in parameter_shapes(tokenizer, config).items():
        leaf = name.rsplit(".", 1)[-1]
        if leaf.endswith("_g"):
            params[name] = np.ones(shape, dtype=dtype)
        elif leaf.startswith("b") or leaf.endswith("_b"):
            params[name] = np.zeros(shape, dtype=dtype)
        elif leaf in ("wq", "wk", "wv", "wo"):
            params[name] = np.eye(shape[0], dtype=dtype)
        elif name == "tok_emb":
            full = rng.standard_normal(shape) * TOKEN_INIT_STD
            full[:, tok_end:] = 0.0
            params[name] = full.astype(dtype)
        elif name == "pos_emb":
            full = np.zeros(shape)
            full[:, tok_end:pos_end] = rng.standard_normal((shape[0], s)) * MARKER_INIT_STD
            params[name] = full.astype(dtype)
        elif name == "seg_emb":
            full = np.zeros(shape)
            full[:, pos_end:] = rng.standard_normal((shape[0], s)) * MARKER_INIT_STD
            params[name] = full.astype(dtype)
        else:
            params[name] = (rng.standard_normal(shape) * INIT_STD).astype(dtype)
    return params


@dataclass
class EncoderModel:
    """Tokenizer configuration plus all learned parameter tensors.

    Treated as immutable after training; ``encode`` is pure.
    """

    tokenizer: TokenizerConfig
    config: EncoderConfig
    params: dict[str, np.ndarray]
    version: int = FORMAT_VERSION

    def encode(self, tokens: list[int], segments: list[int]) -> tuple[np.ndarray, np.ndarray]:
        """Hidden states (length x d_model) and the CLS summary vector."""
        if len(tokens) != len(segments):
            raise TableValidationError("segments must align one-to-one with tokens")
        if len(tokens) > self.config.max_len:
            raise TableValidationError(
                f"input of {len(tokens)} tokens exceeds max_len={self.config.max_len}"
            )
        ids = np.asarray([tokens], dtype=np.int64)
        segs = np.asarray([segments], dtype=np.int64)
        mask = np.ones_like(ids, dtype=self.params["tok_emb"].dtype)
        hidden, cls, _ = forward_batch(self.params, self.config, ids, segs, mask, need_cache=False)
        if not np.all(np.isfinite(hidden)):
            raise TableValidationError("encoder produced non-finite activations")
        return hidden[0], cls[0]

    def fingerprint_bytes(self) -> bytes:
        buf = io.BytesIO()
        save_encoder(self, buf)
        return buf.getvalue()


def new_encoder(tokenizer: TokenizerConfig, config: EncoderConfig) -> EncoderModel:
    return EncoderModel(tokenizer, config, init_params(tokenizer, config))


# ---------------------------------------------------------------------------
# forward / backward


def _layer_norm(x, g, b):
    mu = x.mean(-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = xc * inv
    return g * xhat + b, (xhat, inv)


def _layer_norm_backward(dy, g, cache):
    xhat, inv = cache
    dg = (dy * xhat).sum(axis=tuple(range(dy.ndim - 1)))
    db = dy.sum(axis=tuple(range(dy.ndim - 1)))
    dxhat = dy * g
    dx = inv * (
        dxhat
        - dxhat.mean(-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(-1, keepdims=True)
    )
    return dx, dg, db


def _gelu_gate(u):
    # tanh-form gelu: 0.5*(1 + tanh(c*(u + a*u^3))); smooth everywhere, so
    # central differences converge cleanly in the gradient check
    return 0.5 * (1.0 + np.tanh(_GELU_C * (u + _GELU_A * u * u * u)))


def _gelu_grad(u, gate):
    t = 2.0 * gate - 1.0
    return gate + 0.5 * u * (1.0 - t * t) * _GELU_C * (1.0 + 3.0 * _GELU_A * u * u)


def _split_heads(x, n_heads):
    b, l, d = x.shape
    return x.reshape(b, l, n_heads, d // n_heads).transpose(0, 2, 1, 3)


def _merge_heads(x):
    b, h, l, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, l, h * dh)


def _softmax(x):
    shifted = x - x.max(-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(-1, keepdims=True)


def forward_batch(
    params: dict[str, np.ndarray],
    config: EncoderConfig,
    ids: np.ndarray,
    segs: np.ndarray,
    mask: np.ndarray,
    need_cache: bool = True,
):
    """Run the stack over a padded batch.

    ``ids``/``segs`` are (batch, length) int arrays, ``mask`` is 1.0 on real
    positions and 0.0 on padding.  Returns hidden states, CLS vectors and
    the cache consumed by :func:`backward_batch`.
    """
    B, L = ids.shape
    if L > config.max_len:
        raise TableValidationError(f"batch length {L} exceeds max_len={config.max_len}")
    scale = float(1.0 / np.sqrt(config.d_head))
    x = params["tok_emb"][ids] + params["pos_emb"][:L] + params["seg_emb"][segs]
    attn_bias = ((1.0 - mask) * MASK_BIAS)[:, None, None, :]

    # pre-norm blocks: x += Attn(LN1(x)); x += FFN(LN2(x)); final LN on top
    layer_caches = []
    for l in range(config.n_layers):
        p = f"layer{l}."
        a_in, ln1_cache = _layer_norm(x, params[p + "ln1_g"], params[p + "ln1_b"])
        q = a_in @ params[p + "wq"] + params[p + "bq"]
        k = a_in @ params[p + "wk"] + params[p + "bk"]
        v = a_in @ params[p + "wv"] + params[p + "bv"]
        qh = _split_heads(q, config.n_heads)
        kh = _split_heads(k, config.n_heads)
        vh = _split_heads(v, config.n_heads)
        scores = qh @ kh.swapaxes(-1, -2) * scale + attn_bias
        probs = _softmax(scores)
        ctx = probs @ vh
        merged = _merge_heads(ctx)
        x1 = x + (merged @ params[p + "wo"] + params[p + "bo"])
        f_in, ln2_cache = _layer_norm(x1, params[p + "ln2_g"], params[p + "ln2_b"])
        u = f_in @ params[p + "w1"] + params[p + "b1"]
        gate = _gelu_gate(u)
        gu = u * gate
        x_next = x1 + (gu @ params[p + "w2"] + params[p + "b2"])
        if need_cache:
            layer_caches.append(
                (a_in, qh, kh, vh, probs, merged, ln1_cache, f_in, u, gate, gu, ln2_cache)
            )
        x = x_next

    hidden, final_cache = _layer_norm(x, params["final_ln_g"], params["final_ln_b"])
    cache = None
    if need_cache:
        cache = {
            "ids": ids,
            "segs": segs,
            "final_ln": final_cache,
            "layers": layer_caches,
            "L": L,
        }
    return hidden, hidden[:, 0], cache


def backward_batch(
    params: dict[str, np.ndarray],
    config: EncoderConfig,
    cache: dict,
    d_hidden: np.ndarray,
) -> dict[str, np.ndarray]:
    """Analytic gradients for every parameter given d(loss)/d(hidden states)."""
    scale = float(1.0 / np.sqrt(config.d_head))
    grads = {name: np.zeros_like(tensor) for name, tensor in params.items()}
    dx, dg_f, db_f = _layer_norm_backward(d_hidden, params["final_ln_g"], cache["final_ln"])
    grads["final_ln_g"] += dg_f
    grads["final_ln_b"] += db_f
    for l in reversed(range(config.n_layers)):
        p = f"layer{l}."
        a_in, qh, kh, vh, probs, merged, ln1_cache, f_in, u, gate, gu, ln2_cache = cache["layers"][l]

        # x_next = x1 + FFN(LN2(x1))
        d_x1 = dx.copy()
        d_ffn = dx
        grads[p + "w2"] += gu.reshape(-1, gu.shape[-1]).T @ d_ffn.reshape(-1, d_ffn.shape[-1])
        grads[p + "b2"] += d_ffn.sum((0, 1))
        dgu = d_ffn @ params[p + "w2"].T
        du = dgu * _gelu_grad(u, gate)
        grads[p + "w1"] += f_in.reshape(-1, f_in.shape[-1]).T @ du.reshape(-1, du.shape[-1])
        grads[p + "b1"] += du.sum((0, 1))
        df_in = du @ params[p + "w1"].T
        dln2_x, dg2, db2 = _layer_norm_backward(df_in, params[p + "ln2_g"], ln2_cache)
        grads[p + "ln2_g"] += dg2
        grads[p + "ln2_b"] += db2
        d_x1 += dln2_x

        # x1 = x + Attn(LN1(x))
        dx = d_x1.copy()
        d_attn = d_x1
        grads[p + "wo"] += merged.reshape(-1, merged.shape[-1]).T @ d_attn.reshape(-1, d_attn.shape[-1])
        grads[p + "bo"] += d_attn.sum((0, 1))
        d_merged = d_attn @ params[p + "wo"].T
        d_ctx = _split_heads(d_merged, config.n_heads)
        d_probs = d_ctx @ vh.swapaxes(-1, -2)
        dvh = probs.swapaxes(-1, -2) @ d_ctx
        d_scores = probs * (d_probs - (d_probs * probs).sum(-1, keepdims=True))
        dqh = d_scores @ kh * scale
        dkh = d_scores.swapaxes(-1, -2) @ qh * scale
        dq = _merge_heads(dqh)
        dk = _merge_heads(dkh)
        dv = _merge_heads(dvh)
        flat_a = a_in.reshape(-1, a_in.shape[-1])
        grads[p + "wq"] += flat_a.T @ dq.reshape(-1, dq.shape[-1])
        grads[p + "bq"] += dq.sum((0, 1))
        grads[p + "wk"] += flat_a.T @ dk.reshape(-1, dk.shape[-1])
        grads[p + "bk"] += dk.sum((0, 1))
        grads[p + "wv"] += flat_a.T @ dv.reshape(-1, dv.shape[-1])
        grads[p + "bv"] += dv.sum((0, 1))
        da_in = dq @ params[p + "wq"].T
        da_in += dk @ params[p + "wk"].T
        da_in += dv @ params[p + "wv"].T
        dln1_x, dg1, db1 = _layer_norm_backward(da_in, params[p + "ln1_g"], ln1_cache)
        grads[p + "ln1_g"] += dg1
        grads[p + "ln1_b"] += db1
        dx += dln1_x

    dx0 = dx
    ids, segs, L = cache["ids"], cache["segs"], cache["L"]
    _scatter_rows(grads["tok_emb"], ids, dx0)
    grads["pos_emb"][:L] += dx0.sum(0)
    _scatter_rows(grads["seg_emb"], segs, dx0)
    return grads


def _scatter_rows(target: np.ndarray, indices: np.ndarray, updates: np.ndarray) -> None:
    """Accumulate update rows into target rows; duplicates sum.

    Goes through a compact per-unique-row buffer, which is much faster
    than an unbuffered scatter-add into a large embedding table.
    """
    uniq, inverse = np.unique(indices.ravel(), return_inverse=True)
    partial = np.zeros((uniq.size, target.shape[1]), dtype=target.dtype)
    np.add.at(partial, inverse, updates.reshape(-1, updates.shape[-1]))
    target[uniq] += partial


def cls_gradient(d_cls: np.ndarray, batch_shape: tuple[int, int], d_model: int) -> np.ndarray:
    """Lift a gradient on CLS vectors to a gradient on all hidden states."""
    d_hidden = np.zeros((*batch_shape, d_model), dtype=d_cls.dtype)
    d_hidden[:, 0, :] = d_cls
    return d_hidden


# ---------------------------------------------------------------------------
# gradient verification


def grad_check(
    params: dict[str, np.ndarray],
    loss_and_grad: Callable[[dict[str, np.ndarray]], tuple[float, dict[str, np.ndarray]]],
    *,
    epsilon: float = 1e-4,
    min_samples: int = 200,
    seed: int = 0,
    row_hints: dict[str, np.ndarray] | None = None,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Coordinates are sampled from every parameter tensor (at least two per
    tensor, at least ``min_samples`` overall).  ``row_hints`` restricts
    sampling of a tensor's first axis to the listed rows, which keeps
    embedding-table samples on rows the micro-batch actually touches.
    The check runs in float64 regardless of the parameters' dtype.
    """
    work = {name: np.array(tensor, dtype=np.float64) for name, tensor in params.items()}
    loss, grads = loss_and_grad(work)
    if not np.isfinite(loss):
        raise TableValidationError("gradient check aborted: loss is not finite")
    rng = np.random.default_rng(seed)
    names = sorted(work)
    per_tensor = max(2, int(np.ceil(min_samples / len(names))))
    worst = 0.0
    for name in names:
        tensor = work[name]
        if name in (row_hints or {}):
            rows = np.unique(np.asarray(row_hints[name]))
            flat_pool = (rows[:, None] * tensor.shape[1] + np.arange(tensor.shape[1])).ravel()
        else:
            flat_pool = np.arange(tensor.size)
        take = min(per_tensor, flat_pool.size)
        picks = rng.choice(flat_pool, size=take, replace=False)
        flat = tensor.reshape(-1)
        for idx in picks:
            original = flat[idx]
            flat[idx] = original + epsilon
            hi, _ = loss_and_grad(work)
            flat[idx] = original - epsilon
            lo, _ = loss_and_grad(work)
            flat[idx] = original
            numeric = (hi - lo) / (2.0 * epsilon)
            analytic = grads[name].reshape(-1)[idx]
            err = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)
            worst = max(worst, float(err))
    return worst


# ---------------------------------------------------------------------------
# checkpoint format: magic "RCI1", version byte, int32 config block,
# then tensors in declaration order as shape-prefixed little-endian float32


def save_encoder(model: EncoderModel, dest: str | Path | BinaryIO) -> None:
    own = isinstance(dest, (str, Path))
    fh: BinaryIO = open(dest, "wb") if own else dest  # type: ignore[arg-type]
    try:
        fh.write(MAGIC)
        fh.write(struct.pack("B", model.version))
        cfg = model.config
        tok = model.tokenizer
        fh.write(
            struct.pack(
                "<7i",
                tok.bucket_count,
                int(tok.lowercase),
                cfg.d_model,
                cfg.n_layers,
                cfg.n_heads,
                cfg.max_len,
                cfg.seed,
            )
        )
        shapes = parameter_shapes(tok, cfg)
        fh.write(struct.pack("<i", len(shapes)))
        for name, shape in shapes.items():
            tensor = np.ascontiguousarray(model.params[name], dtype="<f4")
            if tensor.shape != shape:
                raise CheckpointError(f"parameter {name!r} has shape {tensor.shape}, expected {shape}")
            fh.write(struct.pack("<i", tensor.ndim))
            fh.write(struct.pack(f"<{tensor.ndim}i", *tensor.shape))
            fh.write(tensor.tobytes())
    finally:
        if own:
            fh.close()


def _read_exact(fh: BinaryIO, size: int, what: str) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise CheckpointError(f"truncated checkpoint: expected {size} bytes for {what}")
    return data


def load_encoder(source: str | Path | BinaryIO) -> EncoderModel:
    own = isinstance(source, (str, Path))
    fh: BinaryIO = open(source, "rb") if own else source  # type: ignore[arg-type]
    try:
        magic = _read_exact(fh, 4, "magic header")
        if magic != MAGIC:
            raise CheckpointError(f"bad magic header {magic!r}, expected {MAGIC!r}")
        (version,) = struct.unpack("B", _read_exact(fh, 1, "version tag"))
        if version != FORMAT_VERSION:
            raise CheckpointError(
                f"version tag mismatch: expected {FORMAT_VERSION}, found {version}"
            )
        bucket_count, lowercase, d_model, n_layers, n_heads, max_len, seed = struct.unpack(
            "<7i", _read_exact(fh, 28, "config block")
        )
        tok = TokenizerConfig(bucket_count=bucket_count, lowercase=bool(lowercase))
        cfg = EncoderConfig(
            d_model=d_model, n_layers=n_layers, n_heads=n_heads, max_len=max_len, seed=seed
        )
        shapes = parameter_shapes(tok, cfg)
        (n_tensors,) = struct.unpack("<i", _read_exact(fh, 4, "tensor count"))
        if n_tensors != len(shapes):
            raise CheckpointError(f"expected {len(shapes)} tensors, found {n_tensors}")
        params: dict[str, np.ndarray] = {}
        for name, shape in shapes.items():
            (ndim,) = struct.unpack("<i", _read_exact(fh, 4, f"rank of {name}"))
            dims = struct.unpack(f"<{ndim}i", _read_exact(fh, 4 * ndim, f"shape of {name}"))
            if tuple(dims) != shape:
                raise CheckpointError(
                    f"shape mismatch for {name!r}: checkpoint has {tuple(dims)}, "
                    f"config implies {shape}"
                )
            count = int(np.prod(dims, dtype=np.int64))
            raw = _read_exact(fh, 4 * count, f"data of {name}")
            params[name] = np.frombuffer(raw, dtype="<f4").reshape(shape).copy()
        return EncoderModel(tok, cfg, params, version=version)
    finally:
        if own:
            fh.close()


def checkpoint_roundtrip(model: EncoderModel, path: str | Path) -> EncoderModel:
    """Save then load; the result encodes bitwise-identically to the input."""
    save_encoder(model, path)
    return load_encoder(path)
