"""Transformer bridge for the careerpath core.

Produces embedding stores in the core's file format, fine-tunes the
sentence encoder on emitted contrastive pairs, and runs the frozen-encoder
industry classification probe. Communicates with the core exclusively
through files (pairs and docs JSON lines in, store files out).
"""

from .export import export_embeddings
from .finetune import DEFAULT_BASE_MODEL, FineTuneConfig, finetune
from .probe import ProbeResult, industry_probe
from .store import doc_key, read_docs, read_store, read_store_header, write_store

__version__ = "0.1.0"
