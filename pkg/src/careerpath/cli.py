"""Command-line orchestration of the experiment lifecycle."""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import click

from .dataset import (
    Experience,
    SplitSpec,
    dataset_stats,
    expand_prediction_problems,
    read_dataset,
    split_manifest,
    stratified_split,
)
from .documents import (
    STRATEGIES,
    concat_docs,
    format_experience_doc,
    format_occupation_doc,
    generate_pairs,
    write_pairs,
)
from .embeddings import EmbeddingStore, HashEmbedder, StoreProvider, build_store, doc_key
from .evaluation import (
    evaluate,
    grid_search_alpha,
    make_baseline_scorer,
    make_hybrid_scorer,
    make_skill_score_fn,
    make_skill_scorer,
    make_text_score_fn,
    make_text_scorer,
)
from .ontology import load_ontology
from .projection import (
    TextRanker,
    build_regression_set,
    fit_projection,
    load_projection,
    save_projection,
)
from .skills import SkillRanker

logger = logging.getLogger(__name__)

_ONTOLOGY_FILES = {
    "occupations": ("occupations.csv", "occupations_en.csv", "occupations*.csv"),
    "skills": ("skills.csv", "skills_en.csv", "skills*.csv"),
    "relations": (
        "occupation_skill_relations.csv",
        "occupationSkillRelations.csv",
        "occupationSkillRelations_en.csv",
        "occupationSkillRelations*.csv",
        "*relations*.csv",
    ),
}


def _find_ontology_file(directory: Path, kind: str) -> Path:
    for pattern in _ONTOLOGY_FILES[kind]:
        if "*" in pattern:
            matches = sorted(directory.glob(pattern))
            if matches:
                return matches[0]
        elif (directory / pattern).is_file():
            return directory / pattern
    raise click.ClickException(
        f"no {kind} file found in {directory} (looked for {', '.join(_ONTOLOGY_FILES[kind])})"
    )


def _load_ontology(ontology_dir: str, esco_version: str | None):
    directory = Path(ontology_dir)
    try:
        return load_ontology(
            _find_ontology_file(directory, "occupations"),
            _find_ontology_file(directory, "skills"),
            _find_ontology_file(directory, "relations"),
            version_label=esco_version,
        )
    except Exception as exc:
        if isinstance(exc, click.ClickException):
            raise
        raise click.ClickException(f"failed to load ontology: {exc}") from exc


def _load_corpus(dataset: str, ontology, field_map_path: str | None = None):
    field_map = None
    if field_map_path:
        field_map = json.loads(Path(field_map_path).read_text(encoding="utf-8"))
    try:
        return read_dataset(dataset, ontology, field_map=field_map)
    except Exception as exc:
        raise click.ClickException(f"failed to parse dataset: {exc}") from exc


def _split_subset(histories, seed: int, split: str):
    spec = SplitSpec(seed=seed)
    train, validation, test = stratified_split(histories, spec)
    subsets = {"train": train, "val": validation, "test": test,
               "trainval": train + validation}
    return subsets[split], spec


def _make_provider(provider: str, store: str | None, dimension: int):
    if provider == "hash":
        return HashEmbedder(dimension=dimension)
    if not store:
        raise click.ClickException("--provider store requires --store FILE")
    try:
        return StoreProvider(EmbeddingStore.load(store))
    except Exception as exc:
        raise click.ClickException(f"failed to load embedding store: {exc}") from exc


def _write_json(path: str, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n",
                          encoding="utf-8")


def _read_config_file(path: str) -> dict:
    values: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.ClickException(f"config line {line_no} is not 'key = value': {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Key-value config file; flags override it.")
@click.option("-v", "--verbose", is_flag=True, help="Log at INFO level.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None, verbose: bool) -> None:
    """Next-occupation ranking experiments: ingest, train, evaluate, predict."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if config_path:
        values = _read_config_file(config_path)
        ctx.default_map = {name: values for name in main.commands}


ontology_dir_option = click.option("--ontology-dir", required=True,
                                   type=click.Path(exists=True, file_okay=False),
                                   help="Directory with the ESCO CSV export.")
dataset_option = click.option("--dataset", required=True,
                              type=click.Path(exists=True, dir_okay=False),
                              help="Career histories (JSON lines).")
esco_version_option = click.option("--esco-version", default=None,
                                   help="Snapshot label recorded in reports.")
seed_option = click.option("--seed", type=int, default=42, show_default=True,
                           help="Seed for the stratified split.")
field_map_option = click.option("--field-map", default=None,
                                type=click.Path(exists=True, dir_okay=False),
                                help="JSON mapping of upstream field names onto the canonical ones.")


def _base_config(command: str, ontology, dataset: str, seed: int | None = None) -> dict:
    config = {
        "command": command,
        "dataset": str(dataset),
        "esco": ontology.snapshot_info(),
    }
    if seed is not None:
        config["seed"] = seed
        config["ratios"] = list(SplitSpec(seed=seed).ratios)
    return config


@main.command()
@ontology_dir_option
@dataset_option
@esco_version_option
@seed_option
@field_map_option
@click.option("--out", default="ingest_report.json", show_default=True,
              help="Where to write the validation and stats report.")
def ingest(ontology_dir, dataset, esco_version, seed, field_map, out):
    """Load ontology and dataset; write validation, stats, and split reports."""
    ontology = _load_ontology(ontology_dir, esco_version)
    load = _load_corpus(dataset, ontology, field_map)
    stats = dataset_stats(load.histories)
    subsets = stratified_split(load.histories, SplitSpec(seed=seed))
    report = {
        "config": _base_config("ingest", ontology, dataset, seed),
        "ontology": ontology.snapshot_info(),
        "dataset": stats.to_json(),
        "skip_report": {
            "n_records": load.n_records,
            "skipped_short_histories": load.skipped_short,
        },
        "split": split_manifest(subsets, SplitSpec(seed=seed)),
    }
    _write_json(out, report)
    click.echo(f"ontology: {ontology.n_occupations} occupations, {ontology.n_skills} skills"
               + (f" ({ontology.skipped_relations} relation rows rejected)"
                  if ontology.skipped_relations else ""))
    click.echo(f"histories: {stats.n_histories} retained "
               f"({len(load.skipped_short)} skipped with <2 experiences), "
               f"{stats.n_experiences} experiences")
    click.echo(f"split sizes (seed {seed}): "
               + "/".join(str(len(s)) for s in subsets))
    click.echo(f"report written to {out}")


@main.command()
@ontology_dir_option
@dataset_option
@esco_version_option
@field_map_option
@click.option("--strategy", type=click.Choice(STRATEGIES), required=True)
@click.option("--spans", type=click.Choice(["on", "off"]), default="on", show_default=True,
              help="Treat every contiguous subspan as a trajectory.")
@click.option("--split", type=click.Choice(["all", "train", "val", "test"]), default="all",
              show_default=True, help="Emit pairs for one subset only.")
@seed_option
@click.option("--out", default="pairs.jsonl", show_default=True)
def pairs(ontology_dir, dataset, esco_version, field_map, strategy, spans, split, seed, out):
    """Emit contrastive training pairs as JSON lines."""
    ontology = _load_ontology(ontology_dir, esco_version)
    load = _load_corpus(dataset, ontology, field_map)
    histories = load.histories
    if split != "all":
        histories, _ = _split_subset(histories, seed, split)
    generated = generate_pairs(histories, strategy, ontology,
                               expand_spans=(spans == "on"))
    count = write_pairs(generated, out)
    click.echo(f"wrote {count} {strategy} pairs to {out}")


def _documents_for_experiments(ontology, histories) -> list[str]:
    """Every document evaluation can ask for: occupation docs, problem
    prefixes, and full histories."""
    separator = HashEmbedder().separator
    docs = [format_occupation_doc(ontology.occupations[occ_id])
            for occ_id in sorted(ontology.occupations)]
    for problem in expand_prediction_problems(histories):
        docs.append(concat_docs([format_experience_doc(ex) for ex in problem.prefix],
                                separator))
    for history in histories:
        docs.append(concat_docs([format_experience_doc(ex) for ex in history.experiences],
                                separator))
    return docs


@main.command()
@ontology_dir_option
@dataset_option
@esco_version_option
@field_map_option
@click.option("--dimension", type=int, default=256, show_default=True)
@click.option("--out", default="store.jsonl", show_default=True)
@click.option("--docs-out", default=None,
              help="Also write the {key, text} document list (input for external encoders).")
@click.option("--history-docs-out", default=None,
              help="Also write {key, history_id, label} for the full-history documents "
                   "(label = industry; input for classification probes).")
def embed(ontology_dir, dataset, esco_version, field_map, dimension, out, docs_out,
          history_docs_out):
    """Embed every needed document with the builtin hash provider."""
    ontology = _load_ontology(ontology_dir, esco_version)
    load = _load_corpus(dataset, ontology, field_map)
    docs = _documents_for_experiments(ontology, load.histories)
    provider = HashEmbedder(dimension=dimension)
    store = build_store(provider, docs)
    store.save(out)
    click.echo(f"stored {len(store)} embeddings (dimension {dimension}) in {out}")
    if docs_out:
        seen = set()
        with Path(docs_out).open("w", encoding="utf-8") as fh:
            for text in docs:
                key = doc_key(text)
                if key in seen:
                    continue
                seen.add(key)
                fh.write(json.dumps({"key": key, "text": text}, ensure_ascii=False) + "\n")
        click.echo(f"wrote {len(seen)} documents to {docs_out}")
    if history_docs_out:
        with Path(history_docs_out).open("w", encoding="utf-8") as fh:
            for history in load.histories:
                text = concat_docs(
                    [format_experience_doc(ex) for ex in history.experiences],
                    provider.separator,
                )
                fh.write(json.dumps({"key": doc_key(text), "text": text,
                                     "history_id": history.id,
                                     "label": history.industry},
                                    ensure_ascii=False) + "\n")
        click.echo(f"wrote {len(load.histories)} history labels to {history_docs_out}")


@main.command()
@ontology_dir_option
@dataset_option
@esco_version_option
@seed_option
@field_map_option
@click.option("--provider", type=click.Choice(["hash", "store"]), default="hash",
              show_default=True)
@click.option("--store", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Embedding store file (for --provider store).")
@click.option("--dimension", type=int, default=256, show_default=True,
              help="Hash provider dimension.")
@click.option("--split", type=click.Choice(["train", "trainval"]), default="trainval",
              show_default=True, help="Problems the projection is fit on.")
@click.option("--intercept", type=click.Choice(["on", "off"]), default="on", show_default=True)
@click.option("--ridge", type=float, default=1e-8, show_default=True)
@click.option("--normalize", type=click.Choice(["on", "off"]), default="off", show_default=True,
              help="L2-normalize embeddings before the regression.")
@click.option("--out", default="projection.json", show_default=True)
def fit(ontology_dir, dataset, esco_version, seed, field_map, provider, store, dimension,
        split, intercept, ridge, normalize, out):
    """Fit the history-to-next-occupation projection and save it."""
    ontology = _load_ontology(ontology_dir, esco_version)
    load = _load_corpus(dataset, ontology, field_map)
    subset, spec = _split_subset(load.histories, seed, split)
    problems = expand_prediction_problems(subset)
    if not problems:
        raise click.ClickException("no prediction problems in the selected split")
    emb_provider = _make_provider(provider, store, dimension)
    data = build_regression_set(ontology, problems, emb_provider,
                                normalize=(normalize == "on"))
    click.echo(f"regression rows: {data.n} (split {split}, seed {spec.seed})")
    try:
        projection = fit_projection(
            data,
            with_intercept=(intercept == "on"),
            ridge=ridge,
            provider_name=emb_provider.name,
            trained_on=f"split={split};seed={spec.seed};n={data.n};"
                       f"intercept={intercept};ridge={ridge};normalize={normalize}",
        )
    except Exception as exc:
        raise click.ClickException(f"projection fit failed: {exc}") from exc
    save_projection(projection, out)
    click.echo(f"projection ({projection.d_in}x{projection.d_out}, "
               f"intercept {intercept}) written to {out}")


def _parse_ks(ks: str) -> list[int]:
    try:
        values = sorted({int(part) for part in ks.split(",") if part.strip()})
    except ValueError:
        raise click.BadParameter(f"cannot parse k list {ks!r}")
    if not values or any(k < 1 for k in values):
        raise click.BadParameter(f"k values must be positive integers, got {ks!r}")
    return values


@main.command(name="eval")
@ontology_dir_option
@dataset_option
@esco_version_option
@seed_option
@field_map_option
@click.option("--method", type=click.Choice(["baseline", "skill", "text", "hybrid"]),
              required=True)
@click.option("--split", type=click.Choice(["train", "val", "test"]), default="test",
              show_default=True)
@click.option("--provider", type=click.Choice(["hash", "store"]), default="hash",
              show_default=True)
@click.option("--store", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--dimension", type=int, default=256, show_default=True)
@click.option("--projection", "projection_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha", type=float, default=0.8, show_default=True,
              help="Hybrid weight on the text score.")
@click.option("--normalize", type=click.Choice(["on", "off"]), default="off",
              show_default=True,
              help="Min-max rescale both score sets before the hybrid sum.")
@click.option("--ks", default="5,10", show_default=True, help="Recall cutoffs.")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--out", default="eval_report.json", show_default=True)
def eval_cmd(ontology_dir, dataset, esco_version, seed, field_map, method, split, provider,
             store, dimension, projection_path, alpha, normalize, ks, threads, out):
    """Evaluate one method on a named split and write the report."""
    ontology = _load_ontology(ontology_dir, esco_version)
    load = _load_corpus(dataset, ontology, field_map)
    subset, spec = _split_subset(load.histories, seed, split)
    problems = expand_prediction_problems(subset)
    if not problems:
        raise click.ClickException("no prediction problems in the selected split")
    k_values = _parse_ks(ks)

    config = _base_config("eval", ontology, dataset, seed)
    config.update({"method": method, "split": split, "ks": k_values, "threads": threads})

    if method == "baseline":
        scorer = make_baseline_scorer(ontology)
    elif method == "skill":
        scorer = make_skill_scorer(ontology)
    else:
        emb_provider = _make_provider(provider, store, dimension)
        projection = None
        if projection_path:
            projection = load_projection(projection_path)
            config["projection"] = {"path": str(projection_path),
                                    "trained_on": projection.trained_on,
                                    "provider_name": projection.provider_name,
                                    "intercept": projection.intercept is not None}
        config["provider"] = emb_provider.name
        if method == "text":
            scorer = make_text_scorer(ontology, emb_provider, projection)
        else:
            if projection is None:
                raise click.ClickException("--method hybrid requires --projection FILE")
            config["alpha"] = alpha
            config["normalize"] = normalize
            scorer = make_hybrid_scorer(alpha, ontology, emb_provider, projection,
                                        normalize=(normalize == "on"))

    try:
        report = evaluate(problems, scorer, k_values, config=config, threads=threads)
    except Exception as exc:
        raise click.ClickException(f"evaluation failed: {exc}") from exc
    _write_json(out, report.to_json())
    recalls = "  ".join(f"R@{k}={report.recall_at[k]:.4f}" for k in k_values)
    click.echo(f"{method} on {split} (seed {seed}, {report.n_problems} problems): "
               f"MRR={report.mrr:.4f}  {recalls}")
    click.echo(f"report written to {out}")


@main.command()
@ontology_dir_option
@dataset_option
@esco_version_option
@seed_option
@field_map_option
@click.option("--provider", type=click.Choice(["hash", "store"]), default="hash",
              show_default=True)
@click.option("--store", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--dimension", type=int, default=256, show_default=True)
@click.option("--projection", "projection_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Projection for the text side (fit on the train split).")
@click.option("--step", type=float, default=0.1, show_default=True)
@click.option("--ks", default="5,10", show_default=True)
@click.option("--out", default="gridsearch", show_default=True,
              help="Output prefix; writes <out>.csv and <out>.json.")
def gridsearch(ontology_dir, dataset, esco_version, seed, field_map, provider, store,
               dimension, projection_path, step, ks, out):
    """Sweep the hybrid weight on the validation split."""
    if not 0.0 < step <= 1.0:
        raise click.BadParameter("--step must lie in (0, 1]", param_hint="--step")
    ontology = _load_ontology(ontology_dir, esco_version)
    load = _load_corpus(dataset, ontology, field_map)
    subset, spec = _split_subset(load.histories, seed, "val")
    problems = expand_prediction_problems(subset)
    if not problems:
        raise click.ClickException("no prediction problems in the validation split")
    k_values = _parse_ks(ks)
    emb_provider = _make_provider(provider, store, dimension)
    projection = load_projection(projection_path)

    config = _base_config("gridsearch", ontology, dataset, seed)
    config.update({"split": "val", "step": step, "ks": k_values,
                   "provider": emb_provider.name,
                   "projection": {"path": str(projection_path),
                                  "trained_on": projection.trained_on}})
    try:
        best_alpha, curve = grid_search_alpha(
            problems,
            make_skill_score_fn(ontology),
            make_text_score_fn(ontology, emb_provider, projection),
            step,
            ks=k_values,
            config=config,
        )
    except Exception as exc:
        raise click.ClickException(f"grid search failed: {exc}") from exc

    csv_path, json_path = f"{out}.csv", f"{out}.json"
    with Path(csv_path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha", "mrr"] + [f"r{k}" for k in k_values])
        for alpha, report in curve:
            writer.writerow([alpha, report.mrr] + [report.recall_at[k] for k in k_values])
    _write_json(json_path, {
        "best_alpha": best_alpha,
        "config": config,
        "curve": [{"alpha": alpha, **report.to_json()} for alpha, report in curve],
    })
    for alpha, report in curve:
        click.echo(f"alpha={alpha:.2f}  MRR={report.mrr:.4f}  "
                   + "  ".join(f"R@{k}={report.recall_at[k]:.4f}" for k in k_values))
    click.echo(f"best alpha: {best_alpha} (curve in {csv_path}, {json_path})")


def _read_single_history(path: str) -> list:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    records = obj["experiences"] if isinstance(obj, dict) else obj
    if not isinstance(records, list) or not records:
        raise click.ClickException("history file must hold a non-empty experience list")
    experiences = []
    for raw in records:
        experiences.append(Experience(
            title=str(raw.get("title") or ""),
            description=str(raw.get("description") or ""),
            start=raw.get("start"),
            end=raw.get("end"),
            esco_label=str(raw.get("esco_label") or ""),
        ))
    return experiences


@main.command()
@ontology_dir_option
@esco_version_option
@click.option("--history", required=True, type=click.Path(exists=True, dir_okay=False),
              help="JSON file with one career history (experience list).")
@click.option("--method", type=click.Choice(["baseline", "skill", "text", "hybrid"]),
              default="skill", show_default=True)
@click.option("--provider", type=click.Choice(["hash", "store"]), default="hash",
              show_default=True)
@click.option("--store", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--dimension", type=int, default=256, show_default=True)
@click.option("--projection", "projection_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha", type=float, default=0.8, show_default=True)
@click.option("--top", type=int, default=10, show_default=True)
def predict(ontology_dir, esco_version, history, method, provider, store, dimension,
            projection_path, alpha, top):
    """Rank occupations as next steps for one career history."""
    ontology = _load_ontology(ontology_dir, esco_version)
    experiences = _read_single_history(history)
    labels = [ex.esco_label for ex in experiences]
    for label in labels:
        if label not in ontology.occupations:
            raise click.ClickException(f"history label {label!r} is not in the ontology")

    if top < 1:
        raise click.BadParameter("--top must be >= 1", param_hint="--top")
    if top > ontology.n_occupations:
        click.echo(f"warning: --top {top} exceeds the {ontology.n_occupations} known "
                   "occupations, clamping", err=True)
        top = ontology.n_occupations

    scores: dict[str, float] | None
    if method == "baseline":
        from .evaluation import reverse_history_rank
        ranking = reverse_history_rank(ontology, labels)
        scores = None
    elif method == "skill":
        ranker = SkillRanker(ontology)
        scores = ranker.score_map(labels)
        ranking = ranker.rank(labels)
    else:
        emb_provider = _make_provider(provider, store, dimension)
        projection = load_projection(projection_path) if projection_path else None
        if method == "hybrid" and projection is None:
            raise click.ClickException("--method hybrid requires --projection FILE")
        text_ranker = TextRanker(ontology, emb_provider, projection)
        if method == "text":
            scores = text_ranker.score_map(experiences)
            ranking = text_ranker.rank(experiences)
        else:
            skill_ranker = SkillRanker(ontology)
            skill_map = skill_ranker.score_map(labels)
            text_map = text_ranker.score_map(experiences)
            scores = {occ: alpha * text_map[occ] + (1.0 - alpha) * skill_map[occ]
                      for occ in skill_map}
            ranking = sorted(scores, key=lambda occ: (-scores[occ], occ))

    for position, occ_id in enumerate(ranking[:top], start=1):
        title = ontology.occupations[occ_id].title
        shown = f"{scores[occ_id]:.6f}" if scores is not None else "-"
        click.echo(f"{position:>4}  {occ_id}  {title}  {shown}")


if __name__ == "__main__":
    main()
