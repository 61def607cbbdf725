"""Skill-overlap scoring of candidate occupations.

The match score of a candidate against a history is the fraction of the
candidate's skills already covered by the union of the history's
occupation skills:

    score(history, cand) = |union(history skills) ∩ skills(cand)| / |skills(cand)|

A candidate with no linked skills scores 0 by convention, which keeps the
ranked list a full permutation of the occupation set.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

from .ontology import Ontology, UnknownOccupationError, history_skill_union, skill_set


def skill_match_score(ontology: Ontology, history_occs: Sequence[str], candidate: str) -> float:
    """Fraction of the candidate's skills present in the history's skill union."""
    candidate_skills = skill_set(ontology, candidate)
    if not candidate_skills:
        return 0.0
    union = history_skill_union(ontology, history_occs)
    # Exact integer cardinalities, divided once.
    return len(union & candidate_skills) / len(candidate_skills)


class SkillRanker:
    """Vectorized scorer over the full occupation set of one ontology.

    Candidate order is ascending occupation id, which doubles as the
    deterministic tie-break of the produced rankings.
    """

    def __init__(self, ontology: Ontology):
        self.ontology = ontology
        self.occupation_ids: list[str] = sorted(ontology.occupations)
        skill_index = {sid: i for i, sid in enumerate(sorted(ontology.skills))}
        self._n_skills = len(skill_index)

        edge_occ: list[int] = []
        edge_skill: list[int] = []
        sizes = np.zeros(len(self.occupation_ids), dtype=np.int64)
        self._occ_skill_rows: dict[str, np.ndarray] = {}
        for row, occ_id in enumerate(self.occupation_ids):
            occ = ontology.occupations[occ_id]
            merged = occ.essential_skills | occ.optional_skills
            indices = np.fromiter(
                (skill_index[s] for s in merged), dtype=np.intp, count=len(merged)
            )
            self._occ_skill_rows[occ_id] = indices
            sizes[row] = len(merged)
            edge_occ.extend([row] * len(merged))
            edge_skill.extend(indices.tolist())
        self._edge_occ = np.asarray(edge_occ, dtype=np.intp)
        self._edge_skill = np.asarray(edge_skill, dtype=np.intp)
        self._sizes = sizes
        self._safe_sizes = np.maximum(sizes, 1).astype(np.float64)

    def score_vector(self, history_occs: Sequence[str]) -> np.ndarray:
        """Match scores for every candidate, aligned with ``occupation_ids``."""
        union = np.zeros(self._n_skills, dtype=np.float64)
        for occ_id in set(history_occs):
            try:
                union[self._occ_skill_rows[occ_id]] = 1.0
            except KeyError:
                raise UnknownOccupationError(occ_id) from None
        counts = np.bincount(
            self._edge_occ,
            weights=union[self._edge_skill],
            minlength=len(self.occupation_ids),
        )
        return counts / self._safe_sizes

    def score_map(self, history_occs: Sequence[str]) -> dict[str, float]:
        scores = self.score_vector(history_occs)
        return {occ_id: float(s) for occ_id, s in zip(self.occupation_ids, scores)}

    def rank(self, history_occs: Sequence[str]) -> list[str]:
        scores = self.score_vector(history_occs)
        order = np.argsort(-scores, kind="stable")
        return [self.occupation_ids[i] for i in order]


@lru_cache(maxsize=4)
def _ranker_for(ontology: Ontology) -> SkillRanker:
    return SkillRanker(ontology)


def rank_by_skill(ontology: Ontology, history_occs: Sequence[str]) -> list[str]:
    """All occupations ordered by descending match score, ties by ascending id."""
    return _ranker_for(ontology).rank(history_occs)
