import csv
import random
from pathlib import Path

from careerpath.dataset import CareerHistory, Experience
from careerpath.ontology import Occupation, Ontology, Skill

INDUSTRY_CYCLE = ["IT", "FINANCE", "HEALTHCARE", "CHEF", "SALES", "TEACHER"]


def make_ontology(spec: dict[str, tuple[set[str], set[str]]], skills: set[str] | None = None,
                  version_label: str | None = None) -> Ontology:
    """Build an ontology from {occ_id: (essential, optional)}."""
    all_skills = set(skills or set())
    for essential, optional in spec.values():
        all_skills |= set(essential) | set(optional)
    return Ontology(
        occupations={
            occ_id: Occupation(
                id=occ_id,
                title=occ_id.rsplit(":", 1)[-1].replace("-", " "),
                description=f"works as {occ_id.rsplit(':', 1)[-1]}",
                essential_skills=frozenset(essential),
                optional_skills=frozenset(optional),
            )
            for occ_id, (essential, optional) in spec.items()
        },
        skills={sid: Skill(id=sid, label=sid.rsplit(":", 1)[-1]) for sid in all_skills},
        version_label=version_label,
    )


def random_ontology(rng: random.Random, max_occupations: int = 20, max_skills: int = 40) -> Ontology:
    n_occ = rng.randint(2, max_occupations)
    n_skills = rng.randint(1, max_skills)
    skill_ids = [f"skill:{i:03d}" for i in range(n_skills)]
    spec = {}
    for i in range(n_occ):
        chosen = rng.sample(skill_ids, k=rng.randint(0, min(8, n_skills)))
        cut = rng.randint(0, len(chosen))
        spec[f"occ:{i:03d}"] = (set(chosen[:cut]), set(chosen[cut:]))
    return make_ontology(spec, skills=set(skill_ids))


def make_history(history_id: str, labels: list[str], industry: str = "IT",
                 starts: list[str] | None = None) -> CareerHistory:
    experiences = tuple(
        Experience(
            title=f"{label.rsplit(':', 1)[-1]} role {i}",
            description=f"did {label.rsplit(':', 1)[-1]} work, step {i}",
            esco_label=label,
            start=starts[i] if starts else None,
        )
        for i, label in enumerate(labels)
    )
    return CareerHistory(id=history_id, industry=industry, experiences=experiences)


def random_corpus(rng: random.Random, ontology: Ontology, n_histories: int,
                  min_len: int = 2, max_len: int = 6) -> list[CareerHistory]:
    occ_ids = sorted(ontology.occupations)
    histories = []
    for i in range(n_histories):
        length = rng.randint(min_len, max_len)
        labels = [rng.choice(occ_ids) for _ in range(length)]
        industry = INDUSTRY_CYCLE[i % len(INDUSTRY_CYCLE)]
        histories.append(make_history(f"hist-{i:04d}", labels, industry))
    return histories


def write_ontology_csvs(ontology: Ontology, directory: Path) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    with (directory / "occupations.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["conceptUri", "preferredLabel", "description"])
        for occ in ontology.occupations.values():
            writer.writerow([occ.id, occ.title, occ.description])
    with (directory / "skills.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["conceptUri", "preferredLabel"])
        for skill in ontology.skills.values():
            writer.writerow([skill.id, skill.label])
    with (directory / "occupation_skill_relations.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["occupationUri", "relationType", "skillUri"])
        for occ in ontology.occupations.values():
            for sid in sorted(occ.essential_skills):
                writer.writerow([occ.id, "essential", sid])
            for sid in sorted(occ.optional_skills):
                writer.writerow([occ.id, "optional", sid])
    return directory
