"""Line iteration over paths, byte streams, text streams, and string iterables."""

from __future__ import annotations

import io
import os
from typing import IO, Iterable, Iterator


def iter_lines(source: str | os.PathLike | IO | Iterable[str]) -> Iterator[str]:
    """Yield lines from `source` with trailing newlines removed.

    Strings and path-likes are treated as file paths and read as UTF-8.
    Byte streams are wrapped in a UTF-8 decoder; text streams and plain
    iterables of strings are consumed as-is.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8", newline="") as handle:
            for line in handle:
                yield line.rstrip("\r\n")
        return
    if hasattr(source, "read") and isinstance(getattr(source, "read")(0), bytes):
        source = io.TextIOWrapper(source, encoding="utf-8")
    for line in source:
        yield line.rstrip("\r\n")
