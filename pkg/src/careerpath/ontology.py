"""Occupation-skill graph: loading, validation, and set queries.

The graph is read from the official ESCO CSV export (occupations, skills,
occupation-skill relations). Once loaded it is immutable and safe for
concurrent reads.
"""

from __future__ import annotations

import csv
import hashlib
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

logger = logging.getLogger(__name__)

KNOWN_RELATION_TYPES = frozenset({"essential", "optional"})

DEFAULT_OCCUPATION_COLUMNS = {
    "id": "conceptUri",
    "title": "preferredLabel",
    "description": "description",
}
DEFAULT_SKILL_COLUMNS = {"id": "conceptUri", "label": "preferredLabel"}
DEFAULT_RELATION_COLUMNS = {
    "occupation": "occupationUri",
    "type": "relationType",
    "skill": "skillUri",
}


class OntologyError(Exception):
    """Structural problem in the occupation-skill graph or its source files."""


class UnknownOccupationError(OntologyError, KeyError):
    """An occupation id that is not part of the loaded graph."""


@dataclass(frozen=True)
class Skill:
    id: str
    label: str = ""

    def __post_init__(self) -> None:
        if not self.id:
            raise OntologyError("skill id must be non-empty")


@dataclass(frozen=True)
class Occupation:
    id: str
    title: str
    description: str = ""
    essential_skills: frozenset[str] = field(default_factory=frozenset)
    optional_skills: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if not self.id:
            raise OntologyError("occupation id must be non-empty")
        if not self.title:
            raise OntologyError(f"occupation {self.id!r} has an empty title")
        overlap = self.essential_skills & self.optional_skills
        if overlap:
            raise OntologyError(
                f"occupation {self.id!r} lists skills as both essential and "
                f"optional: {sorted(overlap)[:3]}"
            )


@dataclass(frozen=True, eq=False)
class Ontology:
    """Immutable occupation-skill graph, closed under skill references."""

    occupations: dict[str, Occupation]
    skills: dict[str, Skill]
    version_label: str | None = None
    skipped_relations: int = 0

    def __post_init__(self) -> None:
        for occ in self.occupations.values():
            for sid in occ.essential_skills | occ.optional_skills:
                if sid not in self.skills:
                    raise OntologyError(
                        f"occupation {occ.id!r} references unknown skill {sid!r}"
                    )

    @property
    def n_occupations(self) -> int:
        return len(self.occupations)

    @property
    def n_skills(self) -> int:
        return len(self.skills)

    def occupation(self, occ_id: str) -> Occupation:
        try:
            return self.occupations[occ_id]
        except KeyError:
            raise UnknownOccupationError(occ_id) from None

    @cached_property
    def fingerprint(self) -> str:
        """Content hash of the graph, used to pin the snapshot in reports."""
        h = hashlib.sha256()
        for occ_id in sorted(self.occupations):
            occ = self.occupations[occ_id]
            h.update(occ_id.encode())
            for sid in sorted(occ.essential_skills):
                h.update(b"e")
                h.update(sid.encode())
            for sid in sorted(occ.optional_skills):
                h.update(b"o")
                h.update(sid.encode())
        for sid in sorted(self.skills):
            h.update(sid.encode())
        return h.hexdigest()[:16]

    def snapshot_info(self) -> dict:
        """Provenance block embedded in every report."""
        return {
            "version_label": self.version_label,
            "fingerprint": self.fingerprint,
            "n_occupations": self.n_occupations,
            "n_skills": self.n_skills,
        }


def _read_table(path: str | Path, columns: dict[str, str], what: str) -> list[dict[str, str]]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"{what} file not found: {path}")
    with path.open(encoding="utf-8-sig", newline="") as fh:
        sample = fh.readline()
        if not sample:
            raise OntologyError(f"{what} file is empty: {path}")
        try:
            dialect = csv.Sniffer().sniff(sample, delimiters=",;\t")
        except csv.Error:
            dialect = csv.excel
        fh.seek(0)
        reader = csv.DictReader(fh, dialect=dialect)
        header = reader.fieldnames or []
        missing = [col for col in columns.values() if col not in header]
        if missing:
            raise OntologyError(
                f"{what} file {path} is missing columns {missing}; found {header}"
            )
        rows = []
        for row in reader:
            rows.append({key: (row.get(col) or "").strip() for key, col in columns.items()})
        return rows


def load_ontology(
    occupations_source: str | Path,
    skills_source: str | Path,
    relations_source: str | Path,
    *,
    occupation_columns: dict[str, str] | None = None,
    skill_columns: dict[str, str] | None = None,
    relation_columns: dict[str, str] | None = None,
    version_label: str | None = None,
) -> Ontology:
    """Load and validate the occupation-skill graph from three tabular files.

    Rows whose relation type is neither "essential" nor "optional" are
    rejected with a logged diagnostic and counted on the returned ontology.
    Dangling references and duplicate ids raise :class:`OntologyError`.
    """
    occ_rows = _read_table(
        occupations_source, occupation_columns or DEFAULT_OCCUPATION_COLUMNS, "occupations"
    )
    skill_rows = _read_table(skills_source, skill_columns or DEFAULT_SKILL_COLUMNS, "skills")
    rel_rows = _read_table(
        relations_source, relation_columns or DEFAULT_RELATION_COLUMNS, "relations"
    )

    skills: dict[str, Skill] = {}
    for row in skill_rows:
        if row["id"] in skills:
            raise OntologyError(f"duplicate skill id {row['id']!r}")
        skills[row["id"]] = Skill(id=row["id"], label=row["label"])

    essential: dict[str, set[str]] = {}
    optional: dict[str, set[str]] = {}
    occ_meta: dict[str, dict[str, str]] = {}
    for row in occ_rows:
        if row["id"] in occ_meta:
            raise OntologyError(f"duplicate occupation id {row['id']!r}")
        occ_meta[row["id"]] = row
        essential[row["id"]] = set()
        optional[row["id"]] = set()

    skipped = 0
    for i, row in enumerate(rel_rows, start=2):
        rel_type = row["type"].lower()
        if rel_type not in KNOWN_RELATION_TYPES:
            skipped += 1
            if skipped <= 5:
                logger.warning(
                    "relations row %d: unknown relation type %r, row rejected", i, row["type"]
                )
            continue
        occ_id, skill_id = row["occupation"], row["skill"]
        if occ_id not in occ_meta:
            raise OntologyError(
                f"relations row {i}: dangling reference to unknown occupation {occ_id!r}"
            )
        if skill_id not in skills:
            raise OntologyError(
                f"relations row {i}: dangling reference to unknown skill {skill_id!r}"
            )
        target = essential if rel_type == "essential" else optional
        target[occ_id].add(skill_id)

    if skipped > 5:
        logger.warning("%d relations rows with unknown relation types rejected in total", skipped)

    occupations = {
        occ_id: Occupation(
            id=occ_id,
            title=meta["title"],
            description=meta["description"],
            essential_skills=frozenset(essential[occ_id]),
            optional_skills=frozenset(optional[occ_id]),
        )
        for occ_id, meta in occ_meta.items()
    }
    ontology = Ontology(
        occupations=occupations,
        skills=skills,
        version_label=version_label,
        skipped_relations=skipped,
    )
    logger.info(
        "loaded ontology: %d occupations, %d skills (%d relation rows rejected)",
        ontology.n_occupations,
        ontology.n_skills,
        skipped,
    )
    return ontology


def skill_set(ontology: Ontology, occ: str) -> frozenset[str]:
    """Unified skill set of one occupation: essential and optional merged."""
    o = ontology.occupation(occ)
    return o.essential_skills | o.optional_skills


def history_skill_union(ontology: Ontology, occs) -> frozenset[str]:
    """Union of the skill sets of every occupation in a history.

    Duplicates and ordering of ``occs`` have no effect on the result.
    """
    out: frozenset[str] = frozenset()
    for occ in occs:
        out = out | skill_set(ontology, occ)
    return out
