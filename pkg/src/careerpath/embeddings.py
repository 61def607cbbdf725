"""Embedding providers and the on-disk embedding store.

Two providers ship with the core: a deterministic feature-hashing embedder
(no ML runtime needed) and a read-only provider backed by a store file
produced externally. Store records are keyed by the SHA-256 of the exact
document text so that stores are portable across implementations.

Store file format: a header line ``{"dimension": ..., "provider_name": ...}``
followed by one ``{"key": ..., "vector": [...]}`` JSON object per line.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Protocol

import numpy as np

from .documents import DEFAULT_SEPARATOR


class MissingEmbeddingError(KeyError):
    """A document key absent from a store-backed provider."""


class StoreFormatError(Exception):
    """A store file violating the header/record contract."""


def doc_key(text: str) -> str:
    """Stable join key for a document: SHA-256 hex of its exact text."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class EmbeddingProvider(Protocol):
    dimension: int
    name: str
    separator: str

    def embed(self, text: str) -> np.ndarray: ...


class HashEmbedder:
    """Feature hashing of lowercase word unigrams and bigrams.

    Pure function of the input text and configured dimension; every output
    vector has unit L2 norm.
    """

    def __init__(self, dimension: int = 256, separator: str = DEFAULT_SEPARATOR):
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        self.dimension = dimension
        self.separator = separator

    @property
    def name(self) -> str:
        return f"hash-{self.dimension}"

    def embed(self, text: str) -> np.ndarray:
        tokens = text.lower().split()
        features = tokens + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]
        if not features:
            features = [""]
        vec = np.zeros(self.dimension, dtype=np.float64)
        for feature in features:
            digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8).digest()
            h = int.from_bytes(digest, "big")
            vec[(h >> 1) % self.dimension] += 1.0 if h & 1 else -1.0
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            # All features cancelled into one bucket; fall back to a deterministic unit vector.
            vec[0] = 1.0
            norm = 1.0
        return vec / norm


class EmbeddingStore:
    """Immutable key -> vector map with a fixed dimension."""

    def __init__(self, vectors: Mapping[str, np.ndarray], dimension: int, provider_name: str):
        self.dimension = dimension
        self.provider_name = provider_name
        self._vectors = dict(vectors)
        for key, vec in self._vectors.items():
            if vec.shape != (dimension,):
                raise StoreFormatError(
                    f"vector for key {key[:12]}... has length {vec.shape}, expected {dimension}"
                )

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, key: str) -> bool:
        return key in self._vectors

    def keys(self):
        return self._vectors.keys()

    def vector_for(self, key: str) -> np.ndarray:
        try:
            return self._vectors[key]
        except KeyError:
            raise MissingEmbeddingError(
                f"no embedding stored for key {key[:16]}...; the store "
                f"({self.provider_name!r}) does not cover this document"
            ) from None

    def save(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            fh.write(json.dumps({"dimension": self.dimension,
                                 "provider_name": self.provider_name}) + "\n")
            for key, vec in self._vectors.items():
                fh.write(json.dumps({"key": key, "vector": vec.tolist()}) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingStore":
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"embedding store not found: {path}")
        with path.open(encoding="utf-8") as fh:
            header_line = fh.readline()
            try:
                header = json.loads(header_line)
                dimension = int(header["dimension"])
                provider_name = str(header["provider_name"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise StoreFormatError(f"bad store header in {path}: {exc}") from exc
            vectors: dict[str, np.ndarray] = {}
            for line_no, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    key = record["key"]
                    vec = np.asarray(record["vector"], dtype=np.float64)
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise StoreFormatError(f"bad store record on line {line_no}: {exc}") from exc
                if vec.shape != (dimension,):
                    raise StoreFormatError(
                        f"line {line_no}: vector length {vec.shape[0] if vec.ndim == 1 else vec.shape} "
                        f"does not match header dimension {dimension}"
                    )
                if not np.isfinite(vec).all():
                    raise StoreFormatError(f"line {line_no}: non-finite vector entries")
                if key in vectors:
                    raise StoreFormatError(f"line {line_no}: duplicate key {key[:16]}...")
                vectors[key] = vec
        return cls(vectors, dimension, provider_name)


class StoreProvider:
    """Provider that looks documents up in a store; misses raise, never zero-fill."""

    def __init__(self, store: EmbeddingStore, separator: str = DEFAULT_SEPARATOR):
        self.store = store
        self.dimension = store.dimension
        self.name = store.provider_name
        self.separator = separator

    def embed(self, text: str) -> np.ndarray:
        return self.store.vector_for(doc_key(text))


def build_store(provider: EmbeddingProvider, texts: Iterable[str]) -> EmbeddingStore:
    """Embed every distinct document and collect the results into a store."""
    vectors: dict[str, np.ndarray] = {}
    for text in texts:
        key = doc_key(text)
        if key not in vectors:
            vec = provider.embed(text)
            if not math.isfinite(float(np.sum(vec))):
                raise ValueError("provider produced non-finite embedding")
            vectors[key] = np.asarray(vec, dtype=np.float64)
    return EmbeddingStore(vectors, provider.dimension, provider.name)
