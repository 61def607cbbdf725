"""Contrastive fine-tuning of the sentence encoder on emitted pairs.

Trains with multiple negatives ranking loss (in-batch negatives) on
(doc1, doc2) positive pairs, measuring validation loss every tenth of an
epoch and keeping the best checkpoint.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path

logger = logging.getLogger(__name__)

DEFAULT_BASE_MODEL = "sentence-transformers/all-mpnet-base-v2"


@dataclass(frozen=True)
class FineTuneConfig:
    base_model_id: str = DEFAULT_BASE_MODEL
    batch_size: int = 16
    learning_rate: float = 2e-5
    warmup_fraction: float = 0.05
    scale: float = 20.0
    max_epochs: int = 2
    eval_every_fraction: float = 0.1

    def __post_init__(self) -> None:
        numeric = {
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "warmup_fraction": self.warmup_fraction,
            "scale": self.scale,
            "max_epochs": self.max_epochs,
            "eval_every_fraction": self.eval_every_fraction,
        }
        for name, value in numeric.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if not self.base_model_id:
            raise ValueError("base_model_id must be non-empty")


def _read_pair_file(path: str | Path) -> tuple[list[str], list[str]]:
    doc1, doc2 = [], []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            doc1.append(obj["doc1"])
            doc2.append(obj["doc2"])
    if not doc1:
        raise ValueError(f"pairs file {path} is empty")
    return doc1, doc2


def finetune(
    pairs_file: str | Path,
    config: FineTuneConfig,
    validation_pairs_file: str | Path,
    output_dir: str | Path,
    *,
    seed: int = 42,
) -> Path:
    """Fine-tune the encoder; returns the saved model directory.

    The directory also receives ``training_summary.json`` with the step
    schedule, per-evaluation validation losses, and the selected checkpoint.
    """
    import torch
    from datasets import Dataset
    from sentence_transformers import (
        SentenceTransformer,
        SentenceTransformerTrainer,
        SentenceTransformerTrainingArguments,
    )

    try:  # import path moved in sentence-transformers 5.x
        from sentence_transformers.sentence_transformer.losses import (
            MultipleNegativesRankingLoss,
        )
    except ImportError:
        from sentence_transformers.losses import MultipleNegativesRankingLoss

    train_doc1, train_doc2 = _read_pair_file(pairs_file)
    val_doc1, val_doc2 = _read_pair_file(validation_pairs_file)

    device = "cuda" if torch.cuda.is_available() else "cpu"
    logger.info("fine-tuning on %s: %d train pairs, %d validation pairs",
                device, len(train_doc1), len(val_doc1))
    if device == "cpu":
        logger.warning("no GPU available; training on CPU will be slow")

    try:
        model = SentenceTransformer(config.base_model_id)
    except Exception as exc:
        raise RuntimeError(
            f"could not load base encoder {config.base_model_id!r}: {exc}"
        ) from exc
    # Full fine-tune; word-embedding architectures reload with frozen tables.
    for parameter in model.parameters():
        parameter.requires_grad_(True)

    train_dataset = Dataset.from_dict({"doc1": train_doc1, "doc2": train_doc2})
    eval_dataset = Dataset.from_dict({"doc1": val_doc1, "doc2": val_doc2})

    steps_per_epoch = math.ceil(len(train_doc1) / config.batch_size)
    eval_steps = max(1, round(config.eval_every_fraction * steps_per_epoch))
    total_steps = steps_per_epoch * config.max_epochs

    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    args = SentenceTransformerTrainingArguments(
        output_dir=str(output_dir / "checkpoints"),
        num_train_epochs=config.max_epochs,
        per_device_train_batch_size=config.batch_size,
        per_device_eval_batch_size=config.batch_size,
        learning_rate=config.learning_rate,
        warmup_steps=max(1, round(config.warmup_fraction * total_steps)),
        lr_scheduler_type="linear",
        eval_strategy="steps",
        eval_steps=eval_steps,
        save_strategy="steps",
        save_steps=eval_steps,
        load_best_model_at_end=True,
        metric_for_best_model="eval_loss",
        greater_is_better=False,
        save_total_limit=2,
        fp16=(device == "cuda"),
        dataloader_pin_memory=(device == "cuda"),
        seed=seed,
        report_to="none",
        logging_strategy="no",
        disable_tqdm=True,
    )
    loss = MultipleNegativesRankingLoss(model, scale=config.scale)
    trainer = SentenceTransformerTrainer(
        model=model,
        args=args,
        train_dataset=train_dataset,
        eval_dataset=eval_dataset,
        loss=loss,
    )
    trainer.train()

    eval_losses = [entry["eval_loss"] for entry in trainer.state.log_history
                   if "eval_loss" in entry]
    summary = {
        "config": asdict(config),
        "device": device,
        "seed": seed,
        "n_train_pairs": len(train_doc1),
        "n_validation_pairs": len(val_doc1),
        "steps_per_epoch": steps_per_epoch,
        "eval_steps": eval_steps,
        "total_steps": int(trainer.state.global_step),
        "n_evaluations": len(eval_losses),
        "eval_losses": eval_losses,
        "best_eval_loss": min(eval_losses) if eval_losses else None,
        "best_checkpoint": trainer.state.best_model_checkpoint,
    }
    model.save(str(output_dir / "model"))
    (output_dir / "training_summary.json").write_text(json.dumps(summary, indent=2))
    logger.info("saved fine-tuned encoder to %s (best eval loss %.4f over %d evaluations)",
                output_dir / "model", summary["best_eval_loss"], len(eval_losses))
    return output_dir / "model"
