"""Byte-level byte-pair-encoding tokenizer: training, encoding, decoding.

The alphabet is the 256 byte values, so any Unicode text encodes without an
unknown token and ``decode(encode(x)) == x`` for every string.  Text is first
split into pretokens with the familiar GPT-2-style pattern (contractions,
letter runs, digit runs, other-symbol runs, whitespace, with a leading space
attaching to the following run); merges are learned and applied strictly
within pretoken boundaries.

Training is deterministic: each merge is the most frequent adjacent pair at
the time it is learned, ties broken by lowest ``(left_id, right_id)``, and
learning stops early when no pair occurs twice.  No special tokens are
reserved beyond the byte alphabet.

The model file is portable JSON: ``vocab`` (base64 token bytes, index = id),
``merges`` (ordered ``[left_id, right_id]`` pairs), and ``version``.
"""

from __future__ import annotations

import base64
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import regex

from chemtext.errors import ValidationError

#: Number of byte tokens; also the id of the first learned merge token.
BYTE_VOCAB_SIZE = 256

#: Smallest accepted vocabulary: the byte alphabet plus room for one merge.
MIN_VOCAB_SIZE = 257

#: Current model-file format version.
MODEL_FILE_VERSION = 1

# GPT-2-style pretokenization: contractions, optionally space-prefixed letter
# / digit / other-symbol runs, then whitespace (splitting off trailing
# whitespace so a final space attaches to the next pretoken).
_PRETOKEN_PATTERN = regex.compile(
    r"""'s|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+"""
)


def pretokenize(text: str) -> list[str]:
    """Split text into pretokens; their concatenation is exactly ``text``."""
    return _PRETOKEN_PATTERN.findall(text)


@dataclass
class BpeModel:
    """A trained tokenizer: byte alphabet plus an ordered merge list.

    ``vocab[i]`` is the byte content of token ``i``; ids 0..255 are the raw
    bytes and id ``256 + k`` is the token created by ``merges[k]``.  Models
    are immutable after construction (the encode cache only memoizes) and
    safe to share across threads.
    """

    vocab: list[bytes]
    merges: list[tuple[int, int]]
    _rank: dict[tuple[int, int], int] = field(init=False, repr=False)
    _cache: dict[bytes, tuple[int, ...]] = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.vocab) < BYTE_VOCAB_SIZE:
            raise ValidationError(
                f"vocabulary holds {len(self.vocab)} tokens; "
                f"the {BYTE_VOCAB_SIZE} byte tokens are mandatory"
            )
        if len(self.vocab) != BYTE_VOCAB_SIZE + len(self.merges):
            raise ValidationError(
                f"vocabulary size {len(self.vocab)} does not equal "
                f"{BYTE_VOCAB_SIZE} byte tokens + {len(self.merges)} merges"
            )
        for i in range(BYTE_VOCAB_SIZE):
            if self.vocab[i] != bytes([i]):
                raise ValidationError(f"token {i} must be the raw byte 0x{i:02x}")
        for k, (left, right) in enumerate(self.merges):
            new_id = BYTE_VOCAB_SIZE + k
            if not (0 <= left < new_id and 0 <= right < new_id):
                raise ValidationError(
                    f"merge {k} references ids ({left}, {right}) not yet defined"
                )
            if self.vocab[new_id] != self.vocab[left] + self.vocab[right]:
                raise ValidationError(
                    f"token {new_id} bytes do not equal the concatenation of its merge pair"
                )
        self._rank = {pair: k for k, pair in enumerate(self.merges)}

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    # -- encoding ------------------------------------------------------------

    def _merge_word(self, word: bytes) -> tuple[int, ...]:
        ids: list[int] = list(word)
        rank = self._rank
        while len(ids) > 1:
            # lowest-rank adjacent pair present in the merge table
            best_rank: int | None = None
            for i in range(len(ids) - 1):
                r = rank.get((ids[i], ids[i + 1]))
                if r is not None and (best_rank is None or r < best_rank):
                    best_rank = r
            if best_rank is None:
                break
            left, right = self.merges[best_rank]
            new_id = BYTE_VOCAB_SIZE + best_rank
            out: list[int] = []
            i = 0
            while i < len(ids):
                if i < len(ids) - 1 and ids[i] == left and ids[i + 1] == right:
                    out.append(new_id)
                    i += 2
                else:
                    out.append(ids[i])
                    i += 1
            ids = out
        return tuple(ids)

    def encode(self, text: str) -> list[int]:
        """Encode text to token ids: pretokenize, then greedily apply merges
        in rank order within each pretoken.  Total and deterministic."""
        out: list[int] = []
        cache = self._cache
        for pretoken in pretokenize(text):
            word = pretoken.encode("utf-8")
            ids = cache.get(word)
            if ids is None:
                ids = self._merge_word(word)
                cache[word] = ids
            out.extend(ids)
        return out

    def decode(self, ids: Sequence[int]) -> str:
        """Decode token ids back to text.

        Exact inverse of :meth:`encode` on its image; adversarial id
        sequences that assemble invalid UTF-8 decode with U+FFFD
        replacement.  Ids outside the vocabulary raise
        :class:`ValidationError` naming the id.
        """
        vocab = self.vocab
        n = len(vocab)
        parts: list[bytes] = []
        for token_id in ids:
            if not 0 <= token_id < n:
                raise ValidationError(
                    f"token id {token_id} out of range for vocabulary of size {n}"
                )
            parts.append(vocab[token_id])
        return b"".join(parts).decode("utf-8", errors="replace")


def train_bpe(texts: Iterable[str], vocab_size: int) -> BpeModel:
    """Learn a byte-level BPE vocabulary of up to ``vocab_size`` tokens.

    Each round counts adjacent token pairs across all pretokens (weighted by
    pretoken frequency), merges the most frequent pair — ties broken by
    lowest ``(left_id, right_id)`` so training is independent of text order —
    and stops when the vocabulary is full or no pair occurs at least twice.

    Raises :class:`ValidationError` for ``vocab_size < 257`` or a corpus
    with no pretokens at all.
    """
    if vocab_size < MIN_VOCAB_SIZE:
        raise ValidationError(
            f"vocab_size must be >= {MIN_VOCAB_SIZE} "
            f"({BYTE_VOCAB_SIZE} byte tokens plus at least one merge slot), got {vocab_size}"
        )

    word_freq: Counter[bytes] = Counter()
    for text in texts:
        for pretoken in pretokenize(text):
            word_freq[pretoken.encode("utf-8")] += 1
    if not word_freq:
        raise ValidationError("empty corpus: no pretokens to train on")

    words: list[list[int]] = [list(word) for word in word_freq]
    freqs: list[int] = list(word_freq.values())

    vocab: list[bytes] = [bytes([i]) for i in range(BYTE_VOCAB_SIZE)]
    merges: list[tuple[int, int]] = []

    while len(vocab) < vocab_size:
        counts: Counter[tuple[int, int]] = Counter()
        for word, freq in zip(words, freqs):
            for i in range(len(word) - 1):
                counts[(word[i], word[i + 1])] += freq
        if not counts:
            break
        best_count = max(counts.values())
        if best_count < 2:
            break  # merging a pair that never repeats gains nothing
        pair = min(pair for pair, count in counts.items() if count == best_count)

        new_id = len(vocab)
        vocab.append(vocab[pair[0]] + vocab[pair[1]])
        merges.append(pair)
        left, right = pair
        for wi, word in enumerate(words):
            if len(word) < 2:
                continue
            out: list[int] = []
            i = 0
            while i < len(word):
                if i < len(word) - 1 and word[i] == left and word[i + 1] == right:
                    out.append(new_id)
                    i += 2
                else:
                    out.append(word[i])
                    i += 1
            words[wi] = out

    return BpeModel(vocab=vocab, merges=merges)


# =============================================================================
# Model files
# =============================================================================


def save_model(model: BpeModel, path: str | Path, config: dict | None = None) -> None:
    """Write the model as deterministic JSON (byte-identical across runs
    for identical models and config)."""
    payload: dict = {
        "version": MODEL_FILE_VERSION,
        "vocab": [base64.b64encode(token).decode("ascii") for token in model.vocab],
        "merges": [[left, right] for left, right in model.merges],
    }
    if config is not None:
        payload["config"] = config
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        json.dump(payload, handle, sort_keys=True, separators=(",", ":"))
        handle.write("\n")


def load_model(path: str | Path) -> BpeModel:
    """Load a model file written by :func:`save_model`, validating the
    format version and internal consistency."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ValidationError(f"{path}: model file must be a JSON object")
    version = payload.get("version")
    if version != MODEL_FILE_VERSION:
        raise ValidationError(
            f"{path}: unsupported model file version {version!r} "
            f"(expected {MODEL_FILE_VERSION})"
        )
    try:
        vocab = [base64.b64decode(entry, validate=True) for entry in payload["vocab"]]
        merges = [(int(left), int(right)) for left, right in payload["merges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed model file: {exc}") from exc
    return BpeModel(vocab=vocab, merges=merges)
