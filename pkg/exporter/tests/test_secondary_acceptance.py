"""Secondary acceptance suite (S1-S4), one printed verdict line per criterion.

S1 runs fully offline against a locally constructed encoder. S2-S4 need the
published corpus, an ESCO snapshot, and the pretrained encoder; point
``CAREERPATH_DATASET`` / ``CAREERPATH_ESCO_DIR`` at the data and
``CAREERPATH_ENCODER`` at a local copy of the encoder, then run with
``pytest -s``. S4 additionally fine-tunes for roughly one GPU-hour.
"""

import json
import os
import subprocess
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from careerpath_exporter.export import export_embeddings
from careerpath_exporter.finetune import DEFAULT_BASE_MODEL, FineTuneConfig, finetune
from careerpath_exporter.probe import industry_probe
from careerpath_exporter.store import doc_key

from exporter_helpers import write_docs_file

REPO_ROOT = Path(__file__).resolve().parents[2]
DATASET_PATH = Path(os.environ.get("CAREERPATH_DATASET",
                                   REPO_ROOT / "data" / "working_histories.jsonl"))
ESCO_DIR = Path(os.environ.get("CAREERPATH_ESCO_DIR", REPO_ROOT / "data" / "esco"))
ENCODER_REF = os.environ.get("CAREERPATH_ENCODER", DEFAULT_BASE_MODEL)


@contextmanager
def criterion(name: str):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        print(f"{name}: FAIL — {exc}")
        raise
    print(f"{name}: PASS ({time.perf_counter() - start:.2f}s)")


def _require_corpus_and_encoder(name: str):
    problems = []
    if not DATASET_PATH.is_file():
        problems.append(f"dataset missing at {DATASET_PATH} (set CAREERPATH_DATASET)")
    if not ESCO_DIR.is_dir():
        problems.append(f"ESCO export missing at {ESCO_DIR} (set CAREERPATH_ESCO_DIR)")
    encoder = None
    if not problems:
        try:
            from sentence_transformers import SentenceTransformer

            encoder = SentenceTransformer(ENCODER_REF)
        except Exception as exc:
            problems.append(
                f"pretrained encoder {ENCODER_REF!r} unavailable "
                f"(set CAREERPATH_ENCODER to a local copy): {exc}"
            )
    if problems:
        pytest.fail(
            f"{name} prerequisites unavailable: " + "; ".join(problems)
            + ". The build sandbox has no network access to fetch them — see "
              "README 'Reproducing the published numbers'."
        )
    return encoder


def _core(args: list[str], cwd: Path) -> None:
    result = subprocess.run([sys.executable, "-m", "careerpath.cli", *args],
                            cwd=cwd, capture_output=True, text=True)
    if result.returncode != 0:
        raise AssertionError(f"core command {' '.join(args[:3])}... failed: "
                             f"{result.stderr or result.stdout}")


def test_s1_store_round_trips_through_core_parser(tmp_path, tiny_encoder):
    with criterion("S1"):
        texts = [f"role: person {i}\ndescription: did thing number {i}"
                 for i in range(1000)]
        docs = write_docs_file(tmp_path / "docs.jsonl", texts)
        out = tmp_path / "store.jsonl"
        export_embeddings(tiny_encoder, docs, out, provider_name="tiny")

        from careerpath.embeddings import EmbeddingStore, StoreProvider

        store = EmbeddingStore.load(out)
        from careerpath_exporter.export import encoder_dimension

        assert store.dimension == encoder_dimension(tiny_encoder)
        assert len(store) == 1000
        missing = [text for text in texts if doc_key(text) not in store]
        assert not missing, f"{len(missing)} documents missing from the store"
        provider = StoreProvider(store)
        assert provider.embed(texts[0]).shape == (store.dimension,)


def test_s2_pretrained_probe_accuracy(tmp_path):
    with criterion("S2"):
        encoder = _require_corpus_and_encoder("S2")
        work = tmp_path / "s2"
        work.mkdir()
        history_docs = work / "history_docs.jsonl"
        _core(["embed", "--ontology-dir", str(ESCO_DIR), "--dataset", str(DATASET_PATH),
               "--out", str(work / "hash_store.jsonl"),
               "--history-docs-out", str(history_docs)], cwd=work)
        store = work / "store.jsonl"
        export_embeddings(encoder, history_docs, store, provider_name="pretrained")

        from careerpath_exporter.store import read_store

        vectors, _ = read_store(store)
        embeddings, labels = [], []
        for line in history_docs.read_text().splitlines():
            entry = json.loads(line)
            embeddings.append(vectors[entry["key"]])
            labels.append(entry["label"])
        import numpy as np

        result = industry_probe(np.asarray(embeddings), labels, n_runs=10)
        assert abs(result.accuracy_mean - 61.82) <= 5.0, \
            f"probe accuracy {result.accuracy_mean:.2f} outside 61.82±5.0"


def test_s3_pretrained_projected_text_prediction(tmp_path):
    with criterion("S3"):
        encoder = _require_corpus_and_encoder("S3")
        work = tmp_path / "s3"
        work.mkdir()
        docs = work / "docs.jsonl"
        _core(["embed", "--ontology-dir", str(ESCO_DIR), "--dataset", str(DATASET_PATH),
               "--out", str(work / "hash_store.jsonl"), "--docs-out", str(docs)], cwd=work)
        store = work / "store.jsonl"
        export_embeddings(encoder, docs, store, provider_name="pretrained")
        projection = work / "projection.json"
        _core(["fit", "--ontology-dir", str(ESCO_DIR), "--dataset", str(DATASET_PATH),
               "--provider", "store", "--store", str(store), "--split", "trainval",
               "--out", str(projection)], cwd=work)
        report_path = work / "report.json"
        _core(["eval", "--ontology-dir", str(ESCO_DIR), "--dataset", str(DATASET_PATH),
               "--method", "text", "--provider", "store", "--store", str(store),
               "--projection", str(projection), "--split", "test",
               "--out", str(report_path)], cwd=work)
        report = json.loads(report_path.read_text())
        assert abs(report["mrr"] - 0.202) <= 0.05, \
            f"projected text MRR {report['mrr']:.4f} outside 0.202±0.05"


def test_s4_finetuned_all_strategy_end_to_end(tmp_path):
    with criterion("S4"):
        _require_corpus_and_encoder("S4")
        work = tmp_path / "s4"
        work.mkdir()
        train_pairs = work / "train_pairs.jsonl"
        val_pairs = work / "val_pairs.jsonl"
        _core(["pairs", "--ontology-dir", str(ESCO_DIR), "--dataset", str(DATASET_PATH),
               "--strategy", "all", "--split", "train", "--out", str(train_pairs)], cwd=work)
        _core(["pairs", "--ontology-dir", str(ESCO_DIR), "--dataset", str(DATASET_PATH),
               "--strategy", "all", "--split", "val", "--out", str(val_pairs)], cwd=work)

        model_dir = finetune(train_pairs, FineTuneConfig(base_model_id=ENCODER_REF),
                             val_pairs, work / "run")

        docs = work / "docs.jsonl"
        _core(["embed", "--ontology-dir", str(ESCO_DIR), "--dataset", str(DATASET_PATH),
               "--out", str(work / "hash_store.jsonl"), "--docs-out", str(docs)], cwd=work)
        store = work / "store.jsonl"
        export_embeddings(str(model_dir), docs, store, provider_name="finetuned-all")

        projection_test = work / "projection_trainval.json"
        _core(["fit", "--ontology-dir", str(ESCO_DIR), "--dataset", str(DATASET_PATH),
               "--provider", "store", "--store", str(store), "--split", "trainval",
               "--out", str(projection_test)], cwd=work)
        text_report_path = work / "text_report.json"
        _core(["eval", "--ontology-dir", str(ESCO_DIR), "--dataset", str(DATASET_PATH),
               "--method", "text", "--provider", "store", "--store", str(store),
               "--projection", str(projection_test), "--split", "test",
               "--out", str(text_report_path)], cwd=work)
        text_report = json.loads(text_report_path.read_text())
        assert abs(text_report["recall_at"]["10"] - 0.3949) <= 0.06, \
            f"text R@10 {text_report['recall_at']['10']:.4f} outside 0.3949±0.06"

        # Grid search uses a projection fit on train only.
        projection_grid = work / "projection_train.json"
        _core(["fit", "--ontology-dir", str(ESCO_DIR), "--dataset", str(DATASET_PATH),
               "--provider", "store", "--store", str(store), "--split", "train",
               "--out", str(projection_grid)], cwd=work)
        _core(["gridsearch", "--ontology-dir", str(ESCO_DIR), "--dataset", str(DATASET_PATH),
               "--provider", "store", "--store", str(store),
               "--projection", str(projection_grid), "--step", "0.1",
               "--out", str(work / "grid")], cwd=work)
        best_alpha = json.loads((work / "grid.json").read_text())["best_alpha"]

        hybrid_report_path = work / "hybrid_report.json"
        _core(["eval", "--ontology-dir", str(ESCO_DIR), "--dataset", str(DATASET_PATH),
               "--method", "hybrid", "--alpha", str(best_alpha),
               "--provider", "store", "--store", str(store),
               "--projection", str(projection_test), "--split", "test",
               "--out", str(hybrid_report_path)], cwd=work)
        hybrid_report = json.loads(hybrid_report_path.read_text())
        assert abs(hybrid_report["recall_at"]["10"] - 0.4301) <= 0.06, \
            f"hybrid R@10 {hybrid_report['recall_at']['10']:.4f} outside 0.4301±0.06"

        skill_report_path = work / "skill_report.json"
        _core(["eval", "--ontology-dir", str(ESCO_DIR), "--dataset", str(DATASET_PATH),
               "--method", "skill", "--split", "test",
               "--out", str(skill_report_path)], cwd=work)
        skill_r10 = json.loads(skill_report_path.read_text())["recall_at"]["10"]
        assert hybrid_report["recall_at"]["10"] >= max(skill_r10,
                                                       text_report["recall_at"]["10"]), \
            "hybrid must not trail both single methods on R@10"
