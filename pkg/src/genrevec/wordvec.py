"""Pre-trained word vector files: loading, rank lookup, and rank-based frequency estimates."""

from __future__ import annotations

import logging
import os
import unicodedata
from typing import IO, Iterable, Iterator, Mapping

import numpy as np

from ._lines import iter_lines

logger = logging.getLogger(__name__)

# Shift constant of the Zipf-Mandelbrot rank/frequency law.
MANDELBROT_SHIFT = 2.7


class VectorFormatError(ValueError):
    """A vector file does not follow the '<count> <dim>' header + row text format."""


def normalize_word(word: str) -> str:
    """Canonical vocabulary key: NFC-normalized and lowercased."""
    return unicodedata.normalize("NFC", word).lower()


class WordVectorStore:
    """Word vectors ordered by decreasing corpus frequency.

    Ranks are 1-based positions in the source file: the most frequent word
    has rank 1, and ranks are contiguous over the stored entries. The store
    is immutable after construction; concurrent reads are safe.
    """

    def __init__(self, dim: int, words: list[str], matrix: np.ndarray):
        if matrix.shape != (len(words), dim):
            raise ValueError(f"matrix shape {matrix.shape} does not match {len(words)} words of dim {dim}")
        self.dim = dim
        self.words = list(words)
        self.matrix = matrix
        self.matrix.flags.writeable = False
        self._rank = {word: position + 1 for position, word in enumerate(self.words)}
        if len(self._rank) != len(self.words):
            raise ValueError("duplicate words in store")

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return normalize_word(word) in self._rank

    def lookup(self, word: str) -> tuple[np.ndarray, int] | None:
        """Return (vector, rank) for `word`, or None when out of vocabulary."""
        rank = self._rank.get(normalize_word(word))
        if rank is None:
            return None
        return self.matrix[rank - 1], rank

    def entries(self) -> Iterator[tuple[str, np.ndarray]]:
        for position, word in enumerate(self.words):
            yield word, self.matrix[position]


def load_vectors(
    source: str | os.PathLike | IO | Iterable[str],
    limit: int | None = None,
) -> WordVectorStore:
    """Parse the text vector format into a :class:`WordVectorStore`.

    The first line must be "<count> <dim>"; each following line is a word and
    `dim` decimal components separated by single spaces. At most
    min(count, limit) entries are kept, in file order. Words are stored
    NFC-normalized and lowercased; rows whose words collide with an earlier
    entry after that normalization are dropped with a warning, while a
    byte-identical duplicate word is rejected as a malformed file.
    """
    if limit is not None and limit < 1:
        raise ValueError(f"limit must be a positive integer, got {limit}")
    lines = iter_lines(source)
    header = next(lines, None)
    if header is None:
        raise VectorFormatError("empty vector stream: missing '<count> <dim>' header")
    fields = header.split()
    if len(fields) != 2:
        raise VectorFormatError(f"line 1: malformed header {header!r}, expected '<count> <dim>'")
    try:
        count, dim = int(fields[0]), int(fields[1])
    except ValueError:
        raise VectorFormatError(f"line 1: malformed header {header!r}, expected two integers") from None
    if count < 0 or dim < 1:
        raise VectorFormatError(f"line 1: invalid header values count={count} dim={dim}")

    cap = count if limit is None else min(count, limit)
    words: list[str] = []
    rows: list[np.ndarray] = []
    seen_raw: set[str] = set()
    seen_keys: set[str] = set()
    collisions = 0
    for lineno, line in enumerate(lines, start=2):
        if len(words) >= cap:
            break
        if not line:
            continue
        raw_word, vector = _parse_row(line, lineno, dim)
        if raw_word in seen_raw:
            raise VectorFormatError(f"line {lineno}: duplicate word {raw_word!r}")
        seen_raw.add(raw_word)
        key = normalize_word(raw_word)
        if key in seen_keys:
            collisions += 1
            continue
        seen_keys.add(key)
        words.append(key)
        rows.append(vector)
    if collisions:
        logger.warning("dropped %d rows whose words collide after NFC/lowercase normalization", collisions)

    matrix = np.vstack(rows) if rows else np.zeros((0, dim))
    return WordVectorStore(dim=dim, words=words, matrix=matrix)


def _parse_row(line: str, lineno: int, dim: int) -> tuple[str, np.ndarray]:
    """Split one vector row; raises VectorFormatError naming the line."""
    fields = line.rstrip(" ").split(" ")
    word = fields[0]
    if not word:
        raise VectorFormatError(f"line {lineno}: empty word field")
    if len(fields) - 1 != dim:
        raise VectorFormatError(f"line {lineno}: expected {dim} components, found {len(fields) - 1}")
    try:
        vector = np.array([float(x) for x in fields[1:]], dtype=np.float64)
    except ValueError:
        raise VectorFormatError(f"line {lineno}: non-numeric vector component") from None
    return word, vector


def estimate_frequency(rank: int) -> float:
    """Estimated corpus frequency of the word at 1-based vocabulary `rank`.

    Vocabularies sorted by decreasing corpus frequency let the frequency be
    approximated from the rank alone; the estimate is strictly positive and
    strictly decreasing in rank.
    """
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    return 1.0 / (rank + MANDELBROT_SHIFT)


class VectorSpace:
    """Per-language word vector stores projected into one aligned space.

    Lookups are keyed by (word, language); all stores must agree on the
    embedding dimensionality. A missing language behaves like an
    out-of-vocabulary word.
    """

    def __init__(self, stores: Mapping[str, WordVectorStore]):
        if not stores:
            raise ValueError("at least one language store is required")
        dims = {store.dim for store in stores.values()}
        if len(dims) != 1:
            raise ValueError(f"stores disagree on dimensionality: {sorted(dims)}")
        self.stores = dict(stores)
        self.dim = dims.pop()

    def languages(self) -> list[str]:
        return sorted(self.stores)

    def lookup(self, word: str, language: str) -> tuple[np.ndarray, int] | None:
        store = self.stores.get(language)
        if store is None:
            return None
        return store.lookup(word)
