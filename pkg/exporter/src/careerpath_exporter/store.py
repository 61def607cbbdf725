"""Embedding-store file contract shared with the careerpath core.

A store file is a header line ``{"dimension": ..., "provider_name": ...}``
followed by one ``{"key": <sha256 of the document text>, "vector": [...]}``
object per line. Vectors are written at full float precision so the core's
strict parser accepts them unchanged.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np


def doc_key(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def read_docs(path: str | Path) -> list[tuple[str, str]]:
    """Read a {key, text} document list, enforcing the key convention."""
    entries: list[tuple[str, str]] = []
    seen: set[str] = set()
    with Path(path).open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            key, text = obj["key"], obj["text"]
            if key != doc_key(text):
                raise ValueError(
                    f"docs line {line_no}: key does not equal the SHA-256 of the text"
                )
            if key in seen:
                continue
            seen.add(key)
            entries.append((key, text))
    if not entries:
        raise ValueError(f"document list {path} is empty")
    return entries


def read_store_header(path: str | Path) -> dict:
    with Path(path).open(encoding="utf-8") as fh:
        header = json.loads(fh.readline())
    if "dimension" not in header or "provider_name" not in header:
        raise ValueError(f"{path} is not an embedding store (bad header)")
    return header


def write_store(
    path: str | Path,
    records: Iterable[tuple[str, np.ndarray]],
    dimension: int,
    provider_name: str,
) -> int:
    count = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dimension": dimension, "provider_name": provider_name}) + "\n")
        for key, vector in records:
            if vector.shape != (dimension,):
                raise ValueError(f"vector for {key[:12]}... has shape {vector.shape}, "
                                 f"expected ({dimension},)")
            fh.write(json.dumps({"key": key, "vector": vector.tolist()}) + "\n")
            count += 1
    return count


def read_store(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    """Load a full store (used by the probe command)."""
    header = read_store_header(path)
    dimension = int(header["dimension"])
    vectors: dict[str, np.ndarray] = {}
    with Path(path).open(encoding="utf-8") as fh:
        fh.readline()
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            vec = np.asarray(obj["vector"], dtype=np.float64)
            if vec.shape != (dimension,):
                raise ValueError(f"store record {obj['key'][:12]}... has wrong dimension")
            vectors[obj["key"]] = vec
    return vectors, header


def iter_batches(items: list, size: int) -> Iterator[list]:
    for start in range(0, len(items), size):
        yield items[start:start + size]
