"""Hashed whitespace/punctuation tokenizer and sequence-pair assembly.

Surface forms are hashed into a fixed number of buckets with FNV-1a, so
there is no corpus-dependent vocabulary to fit and token ids are stable
across runs and platforms.  Ids 0..2 are reserved for the padding, CLS
and SEP markers; hash buckets start above them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import TableValidationError

PAD_ID = 0
CLS_ID = 1
SEP_ID = 2
N_RESERVED = 3

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_FNV_MASK = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class TokenizerConfig:
    bucket_count: int = 30_000
    lowercase: bool = True

    def __post_init__(self) -> None:
        if self.bucket_count < 2:
            raise TableValidationError("bucket_count must be at least 2")

    @property
    def vocab_size(self) -> int:
        return N_RESERVED + self.bucket_count


def _fnv1a(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _FNV_MASK
    return h


def split_text(text: str, config: TokenizerConfig) -> list[str]:
    """Split on whitespace and punctuation boundaries, keeping punctuation."""
    if config.lowercase:
        text = text.casefold()
    return _TOKEN_RE.findall(text)


def hash_token(surface: str, config: TokenizerConfig) -> int:
    return N_RESERVED + _fnv1a(surface.encode("utf-8")) % config.bucket_count


def tokenize(text: str, config: TokenizerConfig) -> list[int]:
    """Map text to hashed token ids; empty text gives an empty sequence."""
    return [hash_token(tok, config) for tok in split_text(text, config)]


def assemble_pair(
    question: str,
    sequence: str,
    max_tokens: int,
    config: TokenizerConfig,
) -> tuple[list[int], list[int]]:
    """Lay out ``[CLS] question [SEP] sequence [SEP]`` with segment labels.

    Segment label 0 covers the CLS marker and the question side, 1 the
    table side including its closing SEP.  When the pair is too long the
    table side is truncated from its tail; the question is never cut, and
    a question that does not fit on its own is an error.
    """
    if not question or not sequence:
        raise TableValidationError("assemble_pair requires non-empty question and sequence texts")
    q_ids = tokenize(question, config)
    s_ids = tokenize(sequence, config)
    if len(q_ids) + 3 > max_tokens:
        raise TableValidationError(
            f"question occupies {len(q_ids) + 3} of {max_tokens} token positions; nothing "
            "remains for the table side"
        )
    budget = max_tokens - 3 - len(q_ids)
    s_ids = s_ids[:budget]
    tokens = [CLS_ID, *q_ids, SEP_ID, *s_ids, SEP_ID]
    segments = [0] * (len(q_ids) + 2) + [1] * (len(s_ids) + 1)
    return tokens, segments


def assemble_single(text: str, max_tokens: int, config: TokenizerConfig, segment: int = 0) -> tuple[list[int], list[int]]:
    """Lay out ``[CLS] text [SEP]`` for one-sided encoding.

    The CLS position always carries segment 0; the text side carries the
    given segment label so question and table encodings stay distinguishable.
    """
    ids = tokenize(text, config)
    ids = ids[: max_tokens - 2]
    tokens = [CLS_ID, *ids, SEP_ID]
    segments = [0] + [segment] * (len(ids) + 1)
    return tokens, segments
