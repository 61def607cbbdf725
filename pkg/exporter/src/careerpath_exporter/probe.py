"""Industry classification probe over frozen history embeddings.

A one-vs-rest linear SVM is trained on 80% of the histories and scored on
the remaining 20%, repeated over independent random splits; the probe
reports mean and standard deviation of the held-out accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_RUNS = 10
DEFAULT_TRAIN_FRACTION = 0.8


@dataclass
class ProbeResult:
    accuracy_mean: float  # percent
    accuracy_std: float  # percent
    n_runs: int
    per_run: list[float] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 <= self.accuracy_mean <= 100.0:
            raise ValueError(f"mean accuracy out of [0,100]: {self.accuracy_mean}")
        if self.accuracy_std < 0.0:
            raise ValueError("accuracy std must be non-negative")

    def to_json(self) -> dict:
        return {
            "accuracy_mean": self.accuracy_mean,
            "accuracy_std": self.accuracy_std,
            "n_runs": self.n_runs,
            "per_run": self.per_run,
            "metadata": self.metadata,
        }


def industry_probe(
    history_embeddings: np.ndarray,
    industry_labels: Sequence[str],
    *,
    n_runs: int = DEFAULT_RUNS,
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
    seed: int = 0,
) -> ProbeResult:
    from sklearn.svm import LinearSVC

    embeddings = np.asarray(history_embeddings, dtype=np.float64)
    labels = np.asarray(industry_labels)
    if embeddings.ndim != 2:
        raise ValueError("history embeddings must be a 2-D matrix")
    if embeddings.shape[0] != labels.shape[0]:
        raise ValueError(
            f"{embeddings.shape[0]} embeddings but {labels.shape[0]} labels"
        )
    if embeddings.shape[0] < 5:
        raise ValueError("too few histories to split 80/20")

    n = embeddings.shape[0]
    n_train = int(round(n * train_fraction))
    rng = np.random.default_rng(seed)
    accuracies = []
    for _ in range(n_runs):
        order = rng.permutation(n)
        train_idx, test_idx = order[:n_train], order[n_train:]
        classifier = LinearSVC()
        classifier.fit(embeddings[train_idx], labels[train_idx])
        predicted = classifier.predict(embeddings[test_idx])
        accuracies.append(float(np.mean(predicted == labels[test_idx]) * 100.0))

    return ProbeResult(
        accuracy_mean=float(np.mean(accuracies)),
        accuracy_std=float(np.std(accuracies, ddof=1)) if n_runs > 1 else 0.0,
        n_runs=n_runs,
        per_run=accuracies,
        metadata={
            "classifier": "LinearSVC (one-vs-rest, default regularization)",
            "train_fraction": train_fraction,
            "seed": seed,
            "std_ddof": 1,
            "n_histories": int(n),
            "n_classes": int(len(set(industry_labels))),
        },
    )
