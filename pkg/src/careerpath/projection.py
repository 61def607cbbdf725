"""Linear projection from history embeddings to next-occupation embeddings.

The map is fit by least squares, optionally ridge-regularized:

    minimize  sum_i ||target_i - (W^T input_i + b)||^2  +  ridge * ||W||_F^2

and the text score of a candidate occupation is the cosine similarity
between the projected history embedding and the candidate's document
embedding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import Experience, PredictionProblem
from .documents import concat_docs, format_experience_doc, format_occupation_doc
from .embeddings import EmbeddingProvider
from .ontology import Ontology

DEFAULT_RIDGE = 1e-8


class RankDeficiencyError(np.linalg.LinAlgError):
    """The normal system is numerically singular; refit with ridge > 0."""


@dataclass(frozen=True)
class ProjectionMatrix:
    weights: np.ndarray  # (d_in, d_out)
    intercept: np.ndarray | None
    d_in: int
    d_out: int
    provider_name: str | None = None
    trained_on: str | None = None

    def __post_init__(self) -> None:
        if self.weights.shape != (self.d_in, self.d_out):
            raise ValueError(
                f"weights shape {self.weights.shape} does not match ({self.d_in}, {self.d_out})"
            )
        if not np.isfinite(self.weights).all():
            raise ValueError("projection weights contain non-finite entries")
        if self.intercept is not None:
            if self.intercept.shape != (self.d_out,):
                raise ValueError("intercept dimension mismatch")
            if not np.isfinite(self.intercept).all():
                raise ValueError("projection intercept contains non-finite entries")


@dataclass(frozen=True)
class RegressionSet:
    inputs: np.ndarray  # (n, d_in)
    targets: np.ndarray  # (n, d_out)

    def __post_init__(self) -> None:
        if self.inputs.ndim != 2 or self.targets.ndim != 2:
            raise ValueError("inputs and targets must be 2-D")
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise ValueError(
                f"row count mismatch: {self.inputs.shape[0]} inputs vs "
                f"{self.targets.shape[0]} targets"
            )
        if self.inputs.shape[0] < 1:
            raise ValueError("regression set is empty")

    @property
    def n(self) -> int:
        return self.inputs.shape[0]


def build_regression_set(
    ontology: Ontology,
    problems: Sequence[PredictionProblem],
    provider: EmbeddingProvider,
    *,
    normalize: bool = False,
) -> RegressionSet:
    """One row per prediction problem: prefix embedding -> next-occupation embedding."""
    inputs = np.empty((len(problems), provider.dimension), dtype=np.float64)
    targets = np.empty((len(problems), provider.dimension), dtype=np.float64)
    for i, problem in enumerate(problems):
        prefix_doc = concat_docs(
            [format_experience_doc(ex) for ex in problem.prefix], provider.separator
        )
        occ_doc = format_occupation_doc(ontology.occupation(problem.true_label))
        inputs[i] = provider.embed(prefix_doc)
        targets[i] = provider.embed(occ_doc)
    if normalize:
        for name, matrix in (("input", inputs), ("target", targets)):
            norms = np.linalg.norm(matrix, axis=1, keepdims=True)
            if np.any(norms == 0.0):
                raise ValueError(f"cannot normalize zero-norm {name} embedding")
            matrix /= norms
    return RegressionSet(inputs=inputs, targets=targets)


def fit_projection(
    data: RegressionSet,
    with_intercept: bool = True,
    ridge: float = DEFAULT_RIDGE,
    *,
    provider_name: str | None = None,
    trained_on: str | None = None,
) -> ProjectionMatrix:
    """Least-squares fit of the projection; the intercept is never penalized."""
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    x = np.asarray(data.inputs, dtype=np.float64)
    y = np.asarray(data.targets, dtype=np.float64)
    if with_intercept:
        x_mean = x.mean(axis=0)
        y_mean = y.mean(axis=0)
        xc = x - x_mean
        yc = y - y_mean
    else:
        xc, yc = x, y

    d_in = xc.shape[1]
    if ridge == 0.0:
        weights, _, rank, _ = np.linalg.lstsq(xc, yc, rcond=None)
        if rank < d_in:
            raise RankDeficiencyError(
                f"inputs are rank deficient (rank {rank} < {d_in}); "
                "the least-squares system has no unique solution, refit with ridge > 0"
            )
    else:
        gram = xc.T @ xc + ridge * np.eye(d_in)
        try:
            weights = np.linalg.solve(gram, xc.T @ yc)
        except np.linalg.LinAlgError as exc:
            raise RankDeficiencyError(
                f"normal system is singular even with ridge={ridge}; increase ridge"
            ) from exc

    intercept = (y_mean - x_mean @ weights) if with_intercept else None
    return ProjectionMatrix(
        weights=weights,
        intercept=intercept,
        d_in=d_in,
        d_out=yc.shape[1],
        provider_name=provider_name,
        trained_on=trained_on,
    )


def apply_projection(projection: ProjectionMatrix, vector: np.ndarray) -> np.ndarray:
    vector = np.asarray(vector, dtype=np.float64)
    if vector.shape != (projection.d_in,):
        raise ValueError(
            f"vector has dimension {vector.shape}, projection expects ({projection.d_in},)"
        )
    out = vector @ projection.weights
    if projection.intercept is not None:
        out = out + projection.intercept
    return out


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError("cosine similarity is undefined for zero-norm vectors")
    return float(np.dot(a, b) / (norm_a * norm_b))


def text_score(
    provider: EmbeddingProvider,
    projection: ProjectionMatrix | None,
    experiences: Sequence[Experience],
    occupation,
) -> float:
    """Cosine between the (projected) history embedding and an occupation's embedding."""
    query = provider.embed(
        concat_docs([format_experience_doc(ex) for ex in experiences], provider.separator)
    )
    if projection is not None:
        query = apply_projection(projection, query)
    return cosine_similarity(query, provider.embed(format_occupation_doc(occupation)))


class TextRanker:
    """Scores every occupation against a history via the provider and projection.

    ``projection=None`` compares raw embeddings, mirroring the no-projection
    variant of the text method. Candidate order is ascending occupation id.
    """

    def __init__(
        self,
        ontology: Ontology,
        provider: EmbeddingProvider,
        projection: ProjectionMatrix | None = None,
    ):
        if projection is not None and (projection.d_in != provider.dimension
                                       or projection.d_out != provider.dimension):
            raise ValueError(
                f"projection dimensions {projection.d_in}x{projection.d_out} do not "
                f"match provider dimension {provider.dimension}"
            )
        self.ontology = ontology
        self.provider = provider
        self.projection = projection
        self.occupation_ids: list[str] = sorted(ontology.occupations)
        matrix = np.stack([
            provider.embed(format_occupation_doc(ontology.occupations[occ_id]))
            for occ_id in self.occupation_ids
        ])
        norms = np.linalg.norm(matrix, axis=1)
        if np.any(norms == 0.0):
            bad = self.occupation_ids[int(np.argmin(norms))]
            raise ValueError(f"occupation {bad!r} has a zero-norm embedding")
        self._unit_matrix = matrix / norms[:, None]

    def score_vector(self, experiences: Sequence[Experience]) -> np.ndarray:
        query = self.provider.embed(
            concat_docs(
                [format_experience_doc(ex) for ex in experiences], self.provider.separator
            )
        )
        if self.projection is not None:
            query = apply_projection(self.projection, query)
        norm = float(np.linalg.norm(query))
        if norm == 0.0:
            raise ValueError("history embedding has zero norm")
        return self._unit_matrix @ (query / norm)

    def score_map(self, experiences: Sequence[Experience]) -> dict[str, float]:
        scores = self.score_vector(experiences)
        return {occ_id: float(s) for occ_id, s in zip(self.occupation_ids, scores)}

    def rank(self, experiences: Sequence[Experience]) -> list[str]:
        scores = self.score_vector(experiences)
        order = np.argsort(-scores, kind="stable")
        return [self.occupation_ids[i] for i in order]


def rank_by_text(
    ontology: Ontology,
    provider: EmbeddingProvider,
    projection: ProjectionMatrix | None,
    experiences: Sequence[Experience],
) -> list[str]:
    """All occupations by descending text score, ties by ascending id.

    Builds a fresh ranker per call; hold a :class:`TextRanker` when scoring
    many histories against the same ontology.
    """
    return TextRanker(ontology, provider, projection).rank(experiences)


def save_projection(projection: ProjectionMatrix, path: str | Path) -> None:
    payload = {
        "d_in": projection.d_in,
        "d_out": projection.d_out,
        "weights": projection.weights.reshape(-1).tolist(),  # row-major
        "provider_name": projection.provider_name,
        "trained_on": projection.trained_on,
    }
    if projection.intercept is not None:
        payload["intercept"] = projection.intercept.tolist()
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_projection(path: str | Path) -> ProjectionMatrix:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"projection file not found: {path}")
    payload = json.loads(path.read_text(encoding="utf-8"))
    d_in, d_out = int(payload["d_in"]), int(payload["d_out"])
    weights = np.asarray(payload["weights"], dtype=np.float64).reshape(d_in, d_out)
    intercept = payload.get("intercept")
    return ProjectionMatrix(
        weights=weights,
        intercept=None if intercept is None else np.asarray(intercept, dtype=np.float64),
        d_in=d_in,
        d_out=d_out,
        provider_name=payload.get("provider_name"),
        trained_on=payload.get("trained_on"),
    )
