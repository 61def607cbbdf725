"""Batch-embed document lists into the core's store format."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from .store import read_docs, read_store_header, write_store

logger = logging.getLogger(__name__)


def _load_encoder(model_ref):
    from sentence_transformers import SentenceTransformer

    if not isinstance(model_ref, (str, Path)):
        return model_ref
    try:
        return SentenceTransformer(str(model_ref))
    except Exception as exc:
        raise RuntimeError(
            f"could not load encoder {model_ref!r}: {exc}. Pass a local model "
            "directory or a model id reachable from this machine."
        ) from exc


def encoder_dimension(model) -> int:
    getter = getattr(model, "get_embedding_dimension", None)
    if getter is None:
        getter = model.get_sentence_embedding_dimension
    return int(getter())


def export_embeddings(
    model_ref,
    docs_file: str | Path,
    out_store_file: str | Path,
    *,
    batch_size: int = 32,
    provider_name: str | None = None,
) -> Path:
    """Embed every document and write a store the core parses as-is.

    Pooling follows the encoder's own sentence-embedding head (mean pooling
    is attached automatically for plain transformer checkpoints). Refuses to
    replace an existing store of a different dimension.
    """
    entries = read_docs(docs_file)
    model = _load_encoder(model_ref)
    dimension = encoder_dimension(model)

    out_path = Path(out_store_file)
    if out_path.is_file():
        existing = read_store_header(out_path)
        if int(existing["dimension"]) != dimension:
            raise ValueError(
                f"existing store {out_path} has dimension {existing['dimension']}, "
                f"encoder produces {dimension}"
            )

    if provider_name is None:
        provider_name = Path(str(model_ref)).name if isinstance(model_ref, (str, Path)) \
            else "encoder"

    texts = [text for _, text in entries]
    vectors = model.encode(texts, batch_size=batch_size, convert_to_numpy=True,
                           show_progress_bar=False)
    vectors = np.asarray(vectors, dtype=np.float64)
    count = write_store(
        out_path,
        zip((key for key, _ in entries), vectors),
        dimension,
        provider_name,
    )
    logger.info("exported %d embeddings (dimension %d) to %s", count, dimension, out_path)
    return out_path
