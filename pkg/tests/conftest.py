from pathlib import Path

import pytest

from careerpath.dataset import CareerHistory, write_histories
from careerpath.ontology import Ontology

from helpers import make_history, make_ontology, write_ontology_csvs


@pytest.fixture
def toy_ontology() -> Ontology:
    return make_ontology({
        "occ:analyst": ({"skill:sql", "skill:python"}, {"skill:dashboards"}),
        "occ:chef": ({"skill:cooking"}, {"skill:menus"}),
        "occ:writer": (set(), set()),
    })


@pytest.fixture
def toy_corpus(toy_ontology) -> list[CareerHistory]:
    return [
        make_history("h1", ["occ:analyst", "occ:chef", "occ:analyst"], "IT"),
        make_history("h2", ["occ:chef", "occ:writer"], "CHEF"),
        make_history("h3", ["occ:writer", "occ:analyst", "occ:chef", "occ:writer"], "ARTS"),
    ]


@pytest.fixture
def corpus_file(tmp_path, toy_corpus) -> Path:
    path = tmp_path / "histories.jsonl"
    write_histories(toy_corpus, path)
    return path


@pytest.fixture
def ontology_dir(tmp_path, toy_ontology) -> Path:
    return write_ontology_csvs(toy_ontology, tmp_path / "esco")
