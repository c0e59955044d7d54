"""Abstract-corpus cleaning and token batch packing.

The corpus unit is a :class:`Document` — a title plus abstract with a stable
id.  Cleaning removes exact duplicate records by normalized title (Unicode
casefold, punctuation replaced by spaces, whitespace collapsed), keeping the
first occurrence so corpus order stays meaningful.  Packing concatenates
already-tokenized documents into fixed-length batches with no padding and no
separator tokens; only the final batch may run short.

File formats:

- documents: JSON lines with ``id``, ``title``, ``abstract`` (strings) and
  optional ``source`` / ``year``;
- token batches: a binary stream of ``(length: u32, ids: u32 * length)``
  little-endian frames, with a JSON sidecar (``<path>.meta.json``) recording
  ``max_seq_len``, ``total_tokens``, and ``num_batches``.
"""

from __future__ import annotations

import hashlib
import struct
import sys
import unicodedata
from array import array
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from chemtext._jsonio import dump_json, load_json, read_jsonl, write_jsonl
from chemtext.errors import ValidationError

#: Default packing length for pretraining batches.
DEFAULT_MAX_SEQ_LEN = 1024

# ASCII characters stripped from titles in addition to Unicode category P*.
# (Several of these — $ + < = > ^ ` | ~ — are category S, not P, so the
# explicit list matters.)
_ASCII_STRIP = set("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~")


@dataclass(frozen=True)
class Document:
    """One corpus record: a titled abstract with provenance."""

    id: str
    title: str
    abstract: str
    source: str | None = None
    year: int | None = None


@dataclass
class DedupReport:
    """What deduplication kept and dropped.

    ``pairs`` holds one ``(survivor_id, dropped_id)`` tuple per dropped
    document, so ``dropped == len(pairs)``.
    """

    kept: int = 0
    dropped: int = 0
    pairs: list[tuple[str, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kept": self.kept,
            "dropped": self.dropped,
            "pairs": [list(pair) for pair in self.pairs],
        }


@lru_cache(maxsize=65536)
def _strips(ch: str) -> bool:
    return ch in _ASCII_STRIP or unicodedata.category(ch).startswith("P")


def normalize_title(title: str) -> str:
    """Normalize a title for exact-duplicate comparison.

    Unicode casefold, then each punctuation character (Unicode categories
    Pc/Pd/Pe/Pf/Pi/Po/Ps plus the ASCII symbol set) becomes a single space,
    then whitespace runs collapse to single spaces with the ends trimmed.
    Idempotent; an all-punctuation title normalizes to the empty string.
    """
    folded = title.casefold()
    cleaned = "".join(" " if _strips(ch) else ch for ch in folded)
    return " ".join(cleaned.split())


def _title_digest(normalized: str) -> bytes:
    return hashlib.blake2b(normalized.encode("utf-8"), digest_size=16).digest()


def deduplicate(docs: Iterable[Document]) -> tuple[list[Document], DedupReport]:
    """Drop documents whose normalized title was already seen; keep the first.

    Order-preserving and idempotent.  Documents whose normalized title is
    empty never merge with anything (an empty title is no evidence two
    records are the same publication).  Index memory is bounded by unique
    titles:
    the key is a 128-bit title digest, and the normalized title is kept
    alongside it so a digest hit is confirmed against the full string rather
    than trusted blindly.

    Raises :class:`ValidationError` if a document id appears twice.
    """
    survivors: list[Document] = []
    report = DedupReport()
    seen_ids: set[str] = set()
    # digest -> [(survivor_id, normalized_title), ...]; the list has one entry
    # unless distinct titles genuinely collide at 128 bits.
    index: dict[bytes, list[tuple[str, str]]] = {}

    for doc in docs:
        if doc.id in seen_ids:
            raise ValidationError(f"duplicate document id in input: {doc.id!r}")
        seen_ids.add(doc.id)

        normalized = normalize_title(doc.title)
        if not normalized:
            survivors.append(doc)
            report.kept += 1
            continue

        digest = _title_digest(normalized)
        bucket = index.get(digest)
        if bucket is not None:
            survivor_id = next(
                (sid for sid, title in bucket if title == normalized), None
            )
            if survivor_id is not None:
                report.dropped += 1
                report.pairs.append((survivor_id, doc.id))
                continue
            bucket.append((doc.id, normalized))
        else:
            index[digest] = [(doc.id, normalized)]
        survivors.append(doc)
        report.kept += 1

    return survivors, report


# =============================================================================
# Token batch packing
# =============================================================================


def segment(
    token_streams: Iterable[Sequence[int]],
    max_seq_len: int = DEFAULT_MAX_SEQ_LEN,
) -> Iterator[list[int]]:
    """Concatenate token streams and yield batches of exactly ``max_seq_len``.

    No padding and no separator tokens are inserted; document boundaries
    simply disappear.  Every batch has length ``max_seq_len`` except possibly
    the last, which holds the remainder (nothing is yielded for an empty
    concatenation).  Token conservation holds: the concatenation of all
    batches equals the concatenation of all inputs.
    """
    if max_seq_len < 1:
        raise ValidationError(f"max_seq_len must be >= 1, got {max_seq_len}")
    buffer: list[int] = []
    for stream in token_streams:
        buffer.extend(stream)
        while len(buffer) >= max_seq_len:
            yield buffer[:max_seq_len]
            del buffer[:max_seq_len]
    if buffer:
        yield buffer


# =============================================================================
# File I/O
# =============================================================================


def document_text(doc: Document) -> str:
    """The text a document contributes to tokenizer training and packing."""
    if doc.title:
        return f"{doc.title}\n{doc.abstract}\n"
    return f"{doc.abstract}\n"


def read_documents(path: str | Path) -> Iterator[Document]:
    """Read documents from a JSONL file, validating required keys."""
    for lineno, obj in read_jsonl(path):
        for key in ("id", "title", "abstract"):
            if key not in obj:
                raise ValidationError(f"{path}:{lineno}: missing key {key!r}")
            if not isinstance(obj[key], str):
                raise ValidationError(f"{path}:{lineno}: key {key!r} must be a string")
        year = obj.get("year")
        if year is not None and not isinstance(year, int):
            raise ValidationError(f"{path}:{lineno}: key 'year' must be an integer")
        source = obj.get("source")
        if source is not None and not isinstance(source, str):
            raise ValidationError(f"{path}:{lineno}: key 'source' must be a string")
        yield Document(
            id=obj["id"],
            title=obj["title"],
            abstract=obj["abstract"],
            source=source,
            year=year,
        )


def write_documents(path: str | Path, docs: Iterable[Document]) -> int:
    """Write documents as JSONL; returns the number written."""

    def rows() -> Iterator[dict]:
        for doc in docs:
            row: dict = {"id": doc.id, "title": doc.title, "abstract": doc.abstract}
            if doc.source is not None:
                row["source"] = doc.source
            if doc.year is not None:
                row["year"] = doc.year
            yield row

    return write_jsonl(path, rows())


def _meta_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def write_token_batches(
    path: str | Path,
    batches: Iterable[Sequence[int]],
    max_seq_len: int,
    config: dict | None = None,
) -> dict:
    """Write token batches as little-endian u32 frames plus a JSON sidecar.

    Each frame is ``(length: u32, ids: u32 * length)``.  The sidecar at
    ``<path>.meta.json`` records ``max_seq_len``, ``total_tokens``, and
    ``num_batches`` (plus the run config when given) and is returned.
    """
    path = Path(path)
    total_tokens = 0
    num_batches = 0
    with path.open("wb") as handle:
        for batch in batches:
            ids = array("I", batch)
            if sys.byteorder == "big":
                ids.byteswap()
            handle.write(struct.pack("<I", len(batch)))
            handle.write(ids.tobytes())
            total_tokens += len(batch)
            num_batches += 1
    meta = {
        "max_seq_len": max_seq_len,
        "total_tokens": total_tokens,
        "num_batches": num_batches,
    }
    if config is not None:
        meta["config"] = config
    dump_json(_meta_path(path), meta)
    return meta


def read_token_batches(path: str | Path) -> tuple[list[list[int]], dict]:
    """Read back batches written by :func:`write_token_batches`.

    Returns ``(batches, sidecar_metadata)`` and validates framing and the
    sidecar's token/batch counts.
    """
    path = Path(path)
    batches: list[list[int]] = []
    with path.open("rb") as handle:
        while True:
            header = handle.read(4)
            if not header:
                break
            if len(header) != 4:
                raise ValidationError(f"{path}: truncated batch header")
            (length,) = struct.unpack("<I", header)
            payload = handle.read(4 * length)
            if len(payload) != 4 * length:
                raise ValidationError(f"{path}: truncated batch payload")
            ids = array("I")
            ids.frombytes(payload)
            if sys.byteorder == "big":
                ids.byteswap()
            batches.append(ids.tolist())
    meta = load_json(_meta_path(path))
    expected = {"total_tokens": sum(len(b) for b in batches), "num_batches": len(batches)}
    for key, value in expected.items():
        if meta.get(key) != value:
            raise ValidationError(
                f"{path}: sidecar {key}={meta.get(key)!r} disagrees with file ({value})"
            )
    return batches, meta
