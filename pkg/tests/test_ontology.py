import random

import pytest

from careerpath.ontology import (
    OntologyError,
    UnknownOccupationError,
    history_skill_union,
    load_ontology,
    skill_set,
)

from helpers import make_ontology, random_ontology, write_ontology_csvs


def test_load_toy_fixture_round_trip(tmp_path, toy_ontology):
    directory = write_ontology_csvs(toy_ontology, tmp_path / "esco")
    loaded = load_ontology(
        directory / "occupations.csv",
        directory / "skills.csv",
        directory / "occupation_skill_relations.csv",
    )
    assert loaded.n_occupations == 3
    assert loaded.n_skills == 5
    for occ_id, occ in toy_ontology.occupations.items():
        assert loaded.occupations[occ_id].essential_skills == occ.essential_skills
        assert loaded.occupations[occ_id].optional_skills == occ.optional_skills


def test_load_missing_file(tmp_path, toy_ontology):
    directory = write_ontology_csvs(toy_ontology, tmp_path / "esco")
    with pytest.raises(FileNotFoundError):
        load_ontology(directory / "nope.csv", directory / "skills.csv",
                      directory / "occupation_skill_relations.csv")


def test_load_rejects_dangling_occupation(tmp_path, toy_ontology):
    directory = write_ontology_csvs(toy_ontology, tmp_path / "esco")
    relations = directory / "occupation_skill_relations.csv"
    relations.write_text(relations.read_text() + "occ:ghost,essential,skill:sql\n")
    with pytest.raises(OntologyError, match="dangling"):
        load_ontology(directory / "occupations.csv", directory / "skills.csv", relations)


def test_load_rejects_dangling_skill(tmp_path, toy_ontology):
    directory = write_ontology_csvs(toy_ontology, tmp_path / "esco")
    relations = directory / "occupation_skill_relations.csv"
    relations.write_text(relations.read_text() + "occ:chef,optional,skill:ghost\n")
    with pytest.raises(OntologyError, match="dangling"):
        load_ontology(directory / "occupations.csv", directory / "skills.csv", relations)


def test_load_rejects_duplicate_ids(tmp_path, toy_ontology):
    directory = write_ontology_csvs(toy_ontology, tmp_path / "esco")
    occupations = directory / "occupations.csv"
    occupations.write_text(occupations.read_text() + "occ:chef,chef again,twice\n")
    with pytest.raises(OntologyError, match="duplicate"):
        load_ontology(occupations, directory / "skills.csv",
                      directory / "occupation_skill_relations.csv")


def test_unknown_relation_type_rows_are_rejected_with_count(tmp_path, toy_ontology):
    directory = write_ontology_csvs(toy_ontology, tmp_path / "esco")
    relations = directory / "occupation_skill_relations.csv"
    relations.write_text(relations.read_text() + "occ:chef,related,skill:sql\n")
    loaded = load_ontology(directory / "occupations.csv", directory / "skills.csv", relations)
    assert loaded.skipped_relations == 1
    assert "skill:sql" not in skill_set(loaded, "occ:chef")


def test_relation_rows_land_in_exactly_one_partition(tmp_path):
    rng = random.Random(7)
    for _ in range(20):
        ontology = random_ontology(rng)
        directory = write_ontology_csvs(ontology, tmp_path / f"esco-{rng.random()}")
        loaded = load_ontology(
            directory / "occupations.csv",
            directory / "skills.csv",
            directory / "occupation_skill_relations.csv",
        )
        for occ in loaded.occupations.values():
            assert not occ.essential_skills & occ.optional_skills
            original = ontology.occupations[occ.id]
            assert occ.essential_skills == original.essential_skills
            assert occ.optional_skills == original.optional_skills


def test_skill_set_merges_both_partitions(toy_ontology):
    assert skill_set(toy_ontology, "occ:analyst") == {
        "skill:sql", "skill:python", "skill:dashboards"
    }


def test_skill_set_empty_occupation(toy_ontology):
    assert skill_set(toy_ontology, "occ:writer") == frozenset()


def test_skill_set_unknown_occupation(toy_ontology):
    with pytest.raises(UnknownOccupationError):
        skill_set(toy_ontology, "occ:ghost")


def test_skill_set_matches_union_oracle_on_random_ontologies():
    rng = random.Random(11)
    for _ in range(50):
        ontology = random_ontology(rng)
        for occ_id, occ in ontology.occupations.items():
            expected = set(occ.essential_skills) | set(occ.optional_skills)
            result = skill_set(ontology, occ_id)
            assert result == expected
            assert result >= occ.essential_skills
            assert result >= occ.optional_skills
            assert len(result) <= len(occ.essential_skills) + len(occ.optional_skills)


def test_history_union_singleton(toy_ontology):
    assert history_skill_union(toy_ontology, ["occ:chef"]) == {"skill:cooking", "skill:menus"}


def test_history_union_idempotent_and_order_free(toy_ontology):
    once = history_skill_union(toy_ontology, ["occ:analyst"])
    assert history_skill_union(toy_ontology, ["occ:analyst", "occ:analyst"]) == once
    forward = history_skill_union(toy_ontology, ["occ:analyst", "occ:chef"])
    backward = history_skill_union(toy_ontology, ["occ:chef", "occ:analyst"])
    assert forward == backward


def test_history_union_matches_brute_force_oracle():
    rng = random.Random(23)
    for _ in range(50):
        ontology = random_ontology(rng)
        occ_ids = sorted(ontology.occupations)
        history = [rng.choice(occ_ids) for _ in range(5)]
        oracle = set()
        for occ_id in history:
            occ = ontology.occupations[occ_id]
            oracle |= set(occ.essential_skills) | set(occ.optional_skills)
        assert history_skill_union(ontology, history) == oracle


def test_ontology_closed_under_references():
    from careerpath.ontology import Occupation, Ontology

    occ = Occupation(id="occ:a", title="a", essential_skills=frozenset({"skill:x"}))
    with pytest.raises(OntologyError, match="unknown skill"):
        Ontology(occupations={"occ:a": occ}, skills={})


def test_fingerprint_tracks_content(toy_ontology):
    same = make_ontology({
        "occ:analyst": ({"skill:sql", "skill:python"}, {"skill:dashboards"}),
        "occ:chef": ({"skill:cooking"}, {"skill:menus"}),
        "occ:writer": (set(), set()),
    })
    different = make_ontology({
        "occ:analyst": ({"skill:sql"}, {"skill:dashboards", "skill:python"}),
        "occ:chef": ({"skill:cooking"}, {"skill:menus"}),
        "occ:writer": (set(), set()),
    })
    assert toy_ontology.fingerprint == same.fingerprint
    assert toy_ontology.fingerprint != different.fingerprint
