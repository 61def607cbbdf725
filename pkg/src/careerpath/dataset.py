"""Career history corpus: parsing, splits, and problem expansion.

Canonical record format is one JSON object per line:

    {"id": ..., "industry": ..., "experiences": [
        {"title": ..., "description": ..., "start": ..., "end": ..., "esco_label": ...}, ...]}

An optional field map adapts upstream key names onto this shape at
ingestion time.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable, Sequence

from .ontology import Ontology

INDUSTRIES = frozenset({
    "ACCOUNTANT", "ADVOCATE", "AGRICULTURE", "APPAREL", "ARTS", "AUTOMOBILE",
    "AVIATION", "BANKING", "BPO", "BUSINESS-DEVELOPMENT", "CHEF",
    "CONSTRUCTION", "CONSULTANT", "DESIGNER", "DIGITAL-MEDIA", "ENGINEERING",
    "FINANCE", "FITNESS", "HEALTHCARE", "HR", "IT", "PUBLIC-RELATIONS",
    "SALES", "TEACHER",
})

_DATE_FORMATS = ("%Y-%m-%d", "%Y-%m", "%Y", "%m/%Y", "%m/%d/%Y", "%B %Y", "%b %Y")

_CANONICAL_FIELDS = ("id", "industry", "experiences")
_EXPERIENCE_FIELDS = ("title", "description", "start", "end", "esco_label")


class DatasetError(Exception):
    """Malformed or inconsistent career-history data."""


@dataclass(frozen=True)
class Experience:
    title: str
    description: str
    esco_label: str
    start: str | None = None
    end: str | None = None

    def __post_init__(self) -> None:
        if not self.title and not self.description:
            raise DatasetError("experience needs a title or a description")
        if not self.esco_label:
            raise DatasetError("experience is missing its occupation label")


@dataclass(frozen=True)
class CareerHistory:
    """Chronological work history (oldest experience first).

    The published corpus only retains histories with two or more
    experiences; that filter is applied at ingestion, shorter histories may
    still be constructed directly (a single experience is a valid span).
    """

    id: str
    industry: str
    experiences: tuple[Experience, ...]

    def __post_init__(self) -> None:
        if not self.experiences:
            raise DatasetError(f"history {self.id!r} has no experiences")
        if self.industry not in INDUSTRIES:
            raise DatasetError(f"history {self.id!r} has unknown industry {self.industry!r}")

    def __len__(self) -> int:
        return len(self.experiences)


@dataclass(frozen=True)
class PredictionProblem:
    """A history prefix plus the held-out next occupation to predict."""

    prefix: tuple[Experience, ...]
    true_label: str
    history_id: str = ""

    def __post_init__(self) -> None:
        if not self.prefix:
            raise DatasetError("prediction problem needs a non-empty prefix")


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 42

    def __post_init__(self) -> None:
        if len(self.ratios) != 3 or any(not 0 < r < 1 for r in self.ratios):
            raise DatasetError(f"split ratios must each lie in (0,1), got {self.ratios}")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise DatasetError(f"split ratios must sum to 1, got {self.ratios}")


@dataclass
class DatasetLoad:
    """Ingestion result: retained histories plus a skip report."""

    histories: list[CareerHistory]
    skipped_short: list[str] = field(default_factory=list)
    n_records: int = 0

    @property
    def n_experiences(self) -> int:
        return sum(len(h) for h in self.histories)


def _parse_date(raw: str | None) -> datetime | None:
    if not raw:
        return None
    text = raw.strip()
    for fmt in _DATE_FORMATS:
        candidate = text.title() if "%b" in fmt.lower() else text
        try:
            return datetime.strptime(candidate, fmt)
        except ValueError:
            continue
    return None


def _order_experiences(experiences: list[Experience]) -> tuple[Experience, ...]:
    # Sort by start date only when every start parses; otherwise trust file order.
    starts = [_parse_date(ex.start) for ex in experiences]
    if all(s is not None for s in starts):
        paired = sorted(zip(starts, range(len(experiences))), key=lambda p: (p[0], p[1]))
        return tuple(experiences[i] for _, i in paired)
    return tuple(experiences)


def read_dataset(
    path: str | Path,
    ontology: Ontology | None = None,
    *,
    field_map: dict[str, str] | None = None,
) -> DatasetLoad:
    """Parse newline-delimited JSON career histories.

    Histories with fewer than two experiences are excluded and listed in the
    skip report. When an ontology is supplied, every occupation label must
    resolve against it; a miss aborts ingestion with a diagnostic that names
    the record and the loaded snapshot.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    fm = field_map or {}

    def pick(obj: dict, key: str, record_id: str, line_no: int, required: bool = True):
        value = obj.get(fm.get(key, key))
        if value is None and required:
            raise DatasetError(
                f"record {record_id or '?'} (line {line_no}) is missing field {key!r}"
            )
        return value

    load = DatasetLoad(histories=[])
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"malformed JSON on line {line_no}: {exc}") from exc
            load.n_records += 1
            record_id = str(pick(obj, "id", "", line_no, required=False) or f"line-{line_no}")
            industry = str(pick(obj, "industry", record_id, line_no))
            raw_experiences = pick(obj, "experiences", record_id, line_no)
            if not isinstance(raw_experiences, list):
                raise DatasetError(f"record {record_id}: 'experiences' must be a list")

            experiences = []
            for raw in raw_experiences:
                label = str(pick(raw, "esco_label", record_id, line_no))
                if ontology is not None and label not in ontology.occupations:
                    raise DatasetError(
                        f"record {record_id}: occupation label {label!r} does not resolve "
                        f"against the loaded ontology snapshot "
                        f"(version={ontology.version_label!r}, "
                        f"fingerprint={ontology.fingerprint}, "
                        f"{ontology.n_occupations} occupations)"
                    )
                try:
                    experiences.append(
                        Experience(
                            title=str(raw.get(fm.get("title", "title")) or ""),
                            description=str(raw.get(fm.get("description", "description")) or ""),
                            start=raw.get(fm.get("start", "start")),
                            end=raw.get(fm.get("end", "end")),
                            esco_label=label,
                        )
                    )
                except DatasetError as exc:
                    raise DatasetError(f"record {record_id}: {exc}") from exc

            if len(experiences) < 2:
                load.skipped_short.append(record_id)
                continue
            try:
                history = CareerHistory(
                    id=record_id, industry=industry, experiences=_order_experiences(experiences)
                )
            except DatasetError as exc:
                raise DatasetError(f"record {record_id}: {exc}") from exc
            load.histories.append(history)
    return load


def parse_dataset(
    path: str | Path,
    ontology: Ontology | None = None,
    *,
    field_map: dict[str, str] | None = None,
) -> list[CareerHistory]:
    """Convenience wrapper around :func:`read_dataset` returning histories only."""
    return read_dataset(path, ontology, field_map=field_map).histories


def write_histories(histories: Iterable[CareerHistory], path: str | Path) -> None:
    """Serialize histories in the canonical newline-delimited JSON format."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for h in histories:
            record = {
                "id": h.id,
                "industry": h.industry,
                "experiences": [
                    {
                        "title": ex.title,
                        "description": ex.description,
                        "start": ex.start,
                        "end": ex.end,
                        "esco_label": ex.esco_label,
                    }
                    for ex in h.experiences
                ],
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def _largest_remainder(n: int, ratios: Sequence[float]) -> list[int]:
    quotas = [n * r for r in ratios]
    base = [int(q) for q in quotas]
    remainder = n - sum(base)
    # Ties on the fractional part go to the earlier subset.
    order = sorted(range(len(ratios)), key=lambda j: (-(quotas[j] - base[j]), j))
    for j in order[:remainder]:
        base[j] += 1
    return base


def stratified_split(
    histories: Sequence[CareerHistory], spec: SplitSpec
) -> tuple[list[CareerHistory], list[CareerHistory], list[CareerHistory]]:
    """Partition histories into train/validation/test, stratified by industry.

    Within each industry the allocation follows the largest-remainder rule,
    so every stratum matches the requested ratios to within one history.
    Deterministic for a given seed.
    """
    rng = random.Random(spec.seed)
    by_industry: dict[str, list[CareerHistory]] = {}
    for h in histories:
        by_industry.setdefault(h.industry, []).append(h)

    subsets: tuple[list[CareerHistory], ...] = ([], [], [])
    for industry in sorted(by_industry):
        group = list(by_industry[industry])
        rng.shuffle(group)
        counts = _largest_remainder(len(group), spec.ratios)
        start = 0
        for subset, count in zip(subsets, counts):
            subset.extend(group[start:start + count])
            start += count
    return subsets


def split_manifest(
    subsets: tuple[list[CareerHistory], list[CareerHistory], list[CareerHistory]],
    spec: SplitSpec,
) -> dict:
    train, validation, test = subsets
    return {
        "seed": spec.seed,
        "ratios": list(spec.ratios),
        "subsets": {
            "train": [h.id for h in train],
            "validation": [h.id for h in validation],
            "test": [h.id for h in test],
        },
    }


def expand_prediction_problems(histories: Iterable[CareerHistory]) -> list[PredictionProblem]:
    """Turn each history of length N into its N-1 next-step prediction problems."""
    problems = []
    for h in histories:
        for i in range(1, len(h.experiences)):
            problems.append(
                PredictionProblem(
                    prefix=h.experiences[:i],
                    true_label=h.experiences[i].esco_label,
                    history_id=h.id,
                )
            )
    return problems


def expand_spans(history: CareerHistory) -> list[tuple[Experience, ...]]:
    """All contiguous experience spans of a history, N(N+1)/2 in total."""
    exps = history.experiences
    n = len(exps)
    return [exps[i:j + 1] for i in range(n) for j in range(i, n)]


@dataclass
class Stats:
    n_histories: int
    n_experiences: int
    industry_table: list[dict]
    history_length_histogram: dict[int, int]
    occupation_frequencies: list[tuple[str, int]]

    def top_occupation_coverage(self, top_n: int) -> float:
        """Fraction of all experiences covered by the top_n most frequent occupations."""
        if self.n_experiences == 0:
            return 0.0
        covered = sum(count for _, count in self.occupation_frequencies[:top_n])
        return covered / self.n_experiences

    def to_json(self) -> dict:
        return {
            "n_histories": self.n_histories,
            "n_experiences": self.n_experiences,
            "industry_table": self.industry_table,
            "history_length_histogram": {str(k): v for k, v in sorted(self.history_length_histogram.items())},
            "n_distinct_occupations": len(self.occupation_frequencies),
            "top300_coverage": self.top_occupation_coverage(300),
            "occupation_frequencies": [list(t) for t in self.occupation_frequencies],
        }


def dataset_stats(histories: Sequence[CareerHistory]) -> Stats:
    """Per-industry counts and mean roles, length histogram, occupation frequencies."""
    industry_counts: Counter[str] = Counter()
    industry_roles: Counter[str] = Counter()
    lengths: Counter[int] = Counter()
    occupations: Counter[str] = Counter()
    for h in histories:
        industry_counts[h.industry] += 1
        industry_roles[h.industry] += len(h)
        lengths[len(h)] += 1
        for ex in h.experiences:
            occupations[ex.esco_label] += 1

    table = [
        {
            "industry": industry,
            "count": count,
            "mean_roles": industry_roles[industry] / count,
        }
        for industry, count in sorted(industry_counts.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    frequencies = sorted(occupations.items(), key=lambda kv: (-kv[1], kv[0]))
    return Stats(
        n_histories=len(histories),
        n_experiences=sum(lengths_key * c for lengths_key, c in lengths.items()),
        industry_table=table,
        history_length_histogram=dict(lengths),
        occupation_frequencies=frequencies,
    )
