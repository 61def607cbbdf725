"""Document formatting and contrastive pair generation.

Every experience and every occupation is rendered with the same two-line
template (occupations carry an "esco" prefix on the role line):

    (esco) role: <title>
    description: <description>

Multi-experience documents join the per-experience documents oldest to
newest with a separator token on its own line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .dataset import CareerHistory, Experience
from .dataset import expand_spans as _all_spans
from .ontology import Occupation, Ontology

DEFAULT_SEPARATOR = "[SEP]"
STRATEGIES = ("full", "last", "all")

_OCC_PREFIX = "esco "


def format_experience_doc(ex: Experience) -> str:
    return f"role: {ex.title}\ndescription: {ex.description}"


def format_occupation_doc(occ: Occupation) -> str:
    return f"esco role: {occ.title}\ndescription: {occ.description}"


def parse_document(text: str) -> tuple[str, str]:
    """Recover (title, description) from a single-experience document."""
    role_line, _, description = text.partition("\n")
    if role_line.startswith(_OCC_PREFIX):
        role_line = role_line[len(_OCC_PREFIX):]
    if not role_line.startswith("role: ") or not description.startswith("description: "):
        raise ValueError(f"not a formatted document: {text[:60]!r}")
    return role_line[len("role: "):], description[len("description: "):]


def concat_docs(docs: Sequence[str], separator: str = DEFAULT_SEPARATOR) -> str:
    """Join documents (oldest first) with the separator on its own line."""
    if not docs:
        raise ValueError("cannot concatenate an empty document sequence")
    return f"\n{separator}\n".join(docs)


@dataclass(frozen=True)
class TrainingPair:
    """Positive pair: resume-side document and its ontology-side counterpart."""

    doc1: str
    doc2: str
    history_id: str
    span: tuple[int, int]  # inclusive 0-based bounds within the history
    strategy: str


def generate_pairs(
    histories: Iterable[CareerHistory],
    strategy: str,
    ontology: Ontology,
    *,
    expand_spans: bool = True,
    separator: str = DEFAULT_SEPARATOR,
) -> list[TrainingPair]:
    """Contrastive training pairs for one pairing strategy.

    With span expansion, every contiguous subspan of a history counts as a
    trajectory. Per span: "full" pairs the resume-side concatenation with
    the concatenation of the span's occupation documents, "last" with the
    final experience's occupation document only, and "all" emits one pair
    per position in the span.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}, expected one of {STRATEGIES}")
    pairs: list[TrainingPair] = []
    for history in histories:
        if expand_spans:
            spans = [(i, i + len(span) - 1, span)
                     for i, span in _spans_with_starts(history)]
        else:
            spans = [(0, len(history.experiences) - 1, history.experiences)]
        for start, end, span in spans:
            doc1 = concat_docs([format_experience_doc(ex) for ex in span], separator)
            occ_docs = [format_occupation_doc(ontology.occupation(ex.esco_label)) for ex in span]
            if strategy == "full":
                pairs.append(TrainingPair(doc1, concat_docs(occ_docs, separator),
                                          history.id, (start, end), strategy))
            elif strategy == "last":
                pairs.append(TrainingPair(doc1, occ_docs[-1],
                                          history.id, (start, end), strategy))
            else:
                for occ_doc in occ_docs:
                    pairs.append(TrainingPair(doc1, occ_doc,
                                              history.id, (start, end), strategy))
    return pairs


def _spans_with_starts(history: CareerHistory):
    n = len(history.experiences)
    spans = _all_spans(history)
    starts = [i for i in range(n) for _ in range(i, n)]
    return zip(starts, spans)


def write_pairs(pairs: Iterable[TrainingPair], path: str | Path) -> int:
    """Write pairs as newline-delimited JSON; returns the number written."""
    count = 0
    with Path(path).open("w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps({
                "doc1": pair.doc1,
                "doc2": pair.doc2,
                "history_id": pair.history_id,
                "span": list(pair.span),
                "strategy": pair.strategy,
            }, ensure_ascii=False) + "\n")
            count += 1
    return count


def read_pairs(path: str | Path) -> list[TrainingPair]:
    pairs = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            pairs.append(TrainingPair(
                doc1=obj["doc1"],
                doc2=obj["doc2"],
                history_id=obj.get("history_id", ""),
                span=tuple(obj.get("span", (0, 0))),
                strategy=obj["strategy"],
            ))
    return pairs
