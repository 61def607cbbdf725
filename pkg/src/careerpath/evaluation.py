"""Offline ranking evaluation: rank metrics, baseline, hybrid combiner, grid search.

Every ranking produced here is a full permutation of the ontology's
occupation ids, ordered by descending score with ties broken by ascending
occupation id. Metrics are mean reciprocal rank and recall@k.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .dataset import Experience, PredictionProblem
from .ontology import Ontology
from .projection import ProjectionMatrix, TextRanker
from .skills import SkillRanker

Scorer = Callable[[Sequence[Experience]], Sequence[str]]
ScoreFn = Callable[[Sequence[Experience]], Mapping[str, float]]


def rank_of(true_label: str, ranking: Sequence[str]) -> int:
    """1-based position of the true label in a ranking."""
    try:
        return list(ranking).index(true_label) + 1
    except ValueError:
        raise ValueError(
            f"label {true_label!r} is absent from the ranking; "
            "the ontology snapshot and the dataset labels do not match"
        ) from None


@dataclass
class EvalReport:
    mrr: float
    recall_at: dict[int, float]
    n_problems: int
    config: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 < self.mrr <= 1.0:
            raise ValueError(f"MRR must lie in (0,1], got {self.mrr}")
        previous = 0.0
        for k in sorted(self.recall_at):
            value = self.recall_at[k]
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"recall@{k} out of [0,1]: {value}")
            if value < previous:
                raise ValueError("recall@k must be non-decreasing in k")
            previous = value

    def to_json(self) -> dict:
        return {
            "mrr": self.mrr,
            "recall_at": {str(k): v for k, v in sorted(self.recall_at.items())},
            "n_problems": self.n_problems,
            "config": self.config,
        }


def _metrics_from_ranks(ranks: Sequence[int], ks: Sequence[int]) -> tuple[float, dict[int, float]]:
    n = len(ranks)
    mrr = sum(1.0 / r for r in ranks) / n
    recall = {k: sum(1 for r in ranks if r <= k) / n for k in ks}
    return mrr, recall


def evaluate(
    problems: Sequence[PredictionProblem],
    scorer: Scorer,
    ks: Sequence[int] = (5, 10),
    *,
    config: dict | None = None,
    threads: int = 1,
) -> EvalReport:
    """Score every problem with the ranking function and aggregate rank metrics."""
    if not problems:
        raise ValueError("cannot evaluate an empty problem set")

    def solve(problem: PredictionProblem) -> int:
        return rank_of(problem.true_label, scorer(problem.prefix))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            ranks = list(pool.map(solve, problems))
    else:
        ranks = [solve(p) for p in problems]
    mrr, recall = _metrics_from_ranks(ranks, ks)
    return EvalReport(mrr=mrr, recall_at=recall, n_problems=len(problems),
                      config=dict(config or {}))


def reverse_history_rank(ontology: Ontology, history_occs: Sequence[str]) -> list[str]:
    """Baseline: the history's own occupations most recent first, then the rest by id."""
    head: list[str] = []
    seen: set[str] = set()
    for occ in reversed(list(history_occs)):
        ontology.occupation(occ)
        if occ not in seen:
            head.append(occ)
            seen.add(occ)
    tail = [occ_id for occ_id in sorted(ontology.occupations) if occ_id not in seen]
    return head + tail


def _min_max(scores: Mapping[str, float]) -> dict[str, float]:
    low = min(scores.values())
    high = max(scores.values())
    if high == low:
        return {occ: 0.0 for occ in scores}
    spread = high - low
    return {occ: (value - low) / spread for occ, value in scores.items()}


def hybrid_rank(
    alpha: float,
    skill_scores: Mapping[str, float],
    text_scores: Mapping[str, float],
    *,
    normalize: bool = False,
) -> list[str]:
    """Rank by the weighted sum alpha * text + (1 - alpha) * skill.

    Scores are combined on their raw scales by default; ``normalize``
    min-max rescales each side over the candidate set first.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0,1], got {alpha}")
    if skill_scores.keys() != text_scores.keys():
        only_skill = len(skill_scores.keys() - text_scores.keys())
        only_text = len(text_scores.keys() - skill_scores.keys())
        raise ValueError(
            f"candidate sets differ between score maps "
            f"({only_skill} only in skill, {only_text} only in text)"
        )
    if normalize:
        skill_scores = _min_max(skill_scores)
        text_scores = _min_max(text_scores)
    combined = {
        occ: alpha * text_scores[occ] + (1.0 - alpha) * skill_scores[occ]
        for occ in skill_scores
    }
    return sorted(combined, key=lambda occ: (-combined[occ], occ))


# ---------------------------------------------------------------------------
# Scorer factories wiring the methods to the evaluation harness.

def make_baseline_scorer(ontology: Ontology) -> Scorer:
    def score(prefix: Sequence[Experience]) -> list[str]:
        return reverse_history_rank(ontology, [ex.esco_label for ex in prefix])
    return score


def make_skill_scorer(ontology: Ontology) -> Scorer:
    ranker = SkillRanker(ontology)
    def score(prefix: Sequence[Experience]) -> list[str]:
        return ranker.rank([ex.esco_label for ex in prefix])
    return score


def make_skill_score_fn(ontology: Ontology) -> ScoreFn:
    ranker = SkillRanker(ontology)
    def score(prefix: Sequence[Experience]) -> dict[str, float]:
        return ranker.score_map([ex.esco_label for ex in prefix])
    return score


def make_text_scorer(ontology: Ontology, provider, projection: ProjectionMatrix | None) -> Scorer:
    ranker = TextRanker(ontology, provider, projection)
    return ranker.rank


def make_text_score_fn(ontology: Ontology, provider, projection: ProjectionMatrix | None) -> ScoreFn:
    ranker = TextRanker(ontology, provider, projection)
    return ranker.score_map


def make_hybrid_scorer(
    alpha: float,
    ontology: Ontology,
    provider,
    projection: ProjectionMatrix | None,
    *,
    normalize: bool = False,
) -> Scorer:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0,1], got {alpha}")
    skill_ranker = SkillRanker(ontology)
    text_ranker = TextRanker(ontology, provider, projection)
    ids = skill_ranker.occupation_ids

    def rescale(vec: np.ndarray) -> np.ndarray:
        low, high = float(vec.min()), float(vec.max())
        if high == low:
            return np.zeros_like(vec)
        return (vec - low) / (high - low)

    def score(prefix: Sequence[Experience]) -> list[str]:
        skill_vec = skill_ranker.score_vector([ex.esco_label for ex in prefix])
        text_vec = text_ranker.score_vector(prefix)
        if normalize:
            skill_vec = rescale(skill_vec)
            text_vec = rescale(text_vec)
        combined = alpha * text_vec + (1.0 - alpha) * skill_vec
        order = np.argsort(-combined, kind="stable")
        return [ids[i] for i in order]

    return score


def _grid_alphas(step: float) -> list[float]:
    if not 0.0 < step <= 1.0:
        raise ValueError(f"grid step must lie in (0,1], got {step}")
    alphas = []
    i = 0
    while True:
        alpha = round(i * step, 12)
        if alpha > 1.0:
            break
        alphas.append(alpha)
        i += 1
    if alphas[-1] != 1.0:
        alphas.append(1.0)
    return alphas


def grid_search_alpha(
    validation_problems: Sequence[PredictionProblem],
    skill_scorer: ScoreFn,
    text_scorer: ScoreFn,
    step: float = 0.1,
    *,
    ks: Sequence[int] = (5, 10),
    config: dict | None = None,
) -> tuple[float, list[tuple[float, EvalReport]]]:
    """Sweep the hybrid weight over {0, step, ..., 1} on the validation problems.

    Both score functions are evaluated once per problem; each grid point then
    recombines the cached score vectors. Selection is by MRR, ties broken by
    higher recall@10 and then by the smaller alpha. Returns the winner and
    the full curve.
    """
    if not validation_problems:
        raise ValueError("cannot grid search on an empty problem set")
    alphas = _grid_alphas(step)

    ids: list[str] | None = None
    key_set: frozenset[str] | None = None
    position: dict[str, int] = {}
    ranks_per_alpha: list[list[int]] = [[] for _ in alphas]

    for problem in validation_problems:
        skill_map = skill_scorer(problem.prefix)
        text_map = text_scorer(problem.prefix)
        if ids is None:
            ids = sorted(skill_map)
            key_set = frozenset(ids)
            position = {occ: i for i, occ in enumerate(ids)}
        if skill_map.keys() != key_set or text_map.keys() != key_set:
            raise ValueError("score maps do not cover the same candidate set")
        skill_vec = np.fromiter((skill_map[occ] for occ in ids), dtype=np.float64, count=len(ids))
        text_vec = np.fromiter((text_map[occ] for occ in ids), dtype=np.float64, count=len(ids))
        try:
            true_idx = position[problem.true_label]
        except KeyError:
            raise ValueError(
                f"label {problem.true_label!r} is absent from the candidate set"
            ) from None
        before_true = np.arange(len(ids)) < true_idx
        for j, alpha in enumerate(alphas):
            combined = alpha * text_vec + (1.0 - alpha) * skill_vec
            true_score = combined[true_idx]
            # Stable-sort rank: higher scores first, earlier ids win ties.
            rank = 1 + int(np.sum(combined > true_score))
            rank += int(np.sum((combined == true_score) & before_true))
            ranks_per_alpha[j].append(rank)

    curve: list[tuple[float, EvalReport]] = []
    for alpha, ranks in zip(alphas, ranks_per_alpha):
        mrr, recall = _metrics_from_ranks(ranks, ks)
        report_config = dict(config or {})
        report_config["alpha"] = alpha
        curve.append((alpha, EvalReport(mrr=mrr, recall_at=recall,
                                        n_problems=len(validation_problems),
                                        config=report_config)))

    tie_k = 10 if 10 in curve[0][1].recall_at else max(curve[0][1].recall_at)
    best_alpha, _ = min(curve, key=lambda item: (-item[1].mrr, -item[1].recall_at[tie_k], item[0]))
    return best_alpha, curve
