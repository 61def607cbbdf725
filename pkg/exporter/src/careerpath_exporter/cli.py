"""Command-line interface for the exporter."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import click
import numpy as np

from .export import export_embeddings
from .finetune import DEFAULT_BASE_MODEL, FineTuneConfig, finetune
from .probe import industry_probe
from .store import read_store


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("-v", "--verbose", is_flag=True)
def main(verbose: bool) -> None:
    """Encoder-side jobs: embedding export, fine-tuning, classification probe."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--model", required=True, help="Encoder id or local model directory.")
@click.option("--docs", required=True, type=click.Path(exists=True, dir_okay=False),
              help="{key, text} JSON lines (keys are SHA-256 of the text).")
@click.option("--out", required=True, help="Store file to write.")
@click.option("--batch-size", type=int, default=32, show_default=True)
@click.option("--name", default=None, help="provider_name recorded in the store header.")
def export(model, docs, out, batch_size, name):
    """Embed a document list into the core's store format."""
    try:
        path = export_embeddings(model, docs, out, batch_size=batch_size,
                                 provider_name=name)
    except Exception as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"store written to {path}")


@main.command(name="finetune")
@click.option("--pairs", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--val-pairs", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, help="Output directory for model and checkpoints.")
@click.option("--base-model", default=DEFAULT_BASE_MODEL, show_default=True)
@click.option("--batch-size", type=int, default=16, show_default=True)
@click.option("--learning-rate", type=float, default=2e-5, show_default=True)
@click.option("--warmup", type=float, default=0.05, show_default=True)
@click.option("--scale", type=float, default=20.0, show_default=True)
@click.option("--epochs", type=int, default=2, show_default=True)
@click.option("--eval-every", type=float, default=0.1, show_default=True,
              help="Validation-loss measurement interval, as a fraction of an epoch.")
@click.option("--seed", type=int, default=42, show_default=True)
def finetune_cmd(pairs, val_pairs, out, base_model, batch_size, learning_rate, warmup,
                 scale, epochs, eval_every, seed):
    """Fine-tune the encoder on contrastive pairs; keeps the best checkpoint."""
    config = FineTuneConfig(
        base_model_id=base_model,
        batch_size=batch_size,
        learning_rate=learning_rate,
        warmup_fraction=warmup,
        scale=scale,
        max_epochs=epochs,
        eval_every_fraction=eval_every,
    )
    try:
        model_dir = finetune(pairs, config, val_pairs, out, seed=seed)
    except Exception as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"fine-tuned model saved to {model_dir}")


@main.command()
@click.option("--store", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Embedding store holding one vector per history.")
@click.option("--labels", required=True, type=click.Path(exists=True, dir_okay=False),
              help="{key, label} JSON lines (core: embed --history-docs-out).")
@click.option("--runs", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default="probe.json", show_default=True)
def probe(store, labels, runs, seed, out):
    """Linear-SVM classification probe over stored history embeddings."""
    vectors, header = read_store(store)
    embeddings, label_list = [], []
    with Path(labels).open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            entry = json.loads(line)
            key = entry["key"]
            if key not in vectors:
                raise click.ClickException(
                    f"labels line {line_no}: key {key[:16]}... missing from the store"
                )
            embeddings.append(vectors[key])
            label_list.append(entry["label"])
    if not embeddings:
        raise click.ClickException("labels file is empty")
    try:
        result = industry_probe(np.asarray(embeddings), label_list,
                                n_runs=runs, seed=seed)
    except Exception as exc:
        raise click.ClickException(str(exc)) from exc
    payload = result.to_json()
    payload["metadata"]["store_provider"] = header["provider_name"]
    Path(out).write_text(json.dumps(payload, indent=2) + "\n")
    click.echo(f"accuracy {result.accuracy_mean:.2f} ± {result.accuracy_std:.2f} "
               f"over {result.n_runs} runs (report in {out})")


if __name__ == "__main__":
    main()
