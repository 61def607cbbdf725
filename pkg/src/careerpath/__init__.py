"""Career path prediction over the ESCO occupation-skill graph.

Ranks every known occupation as a candidate next career step for a textual
work history, by skill overlap, by embedding projection, or by a hybrid of
both, and ships the offline evaluation harness used to compare them.
"""

from .dataset import (
    CareerHistory,
    DatasetError,
    Experience,
    PredictionProblem,
    SplitSpec,
    dataset_stats,
    expand_prediction_problems,
    expand_spans,
    parse_dataset,
    read_dataset,
    stratified_split,
    write_histories,
)
from .documents import (
    DEFAULT_SEPARATOR,
    TrainingPair,
    concat_docs,
    format_experience_doc,
    format_occupation_doc,
    generate_pairs,
    read_pairs,
    write_pairs,
)
from .embeddings import (
    EmbeddingStore,
    HashEmbedder,
    MissingEmbeddingError,
    StoreProvider,
    build_store,
    doc_key,
)
from .evaluation import (
    EvalReport,
    evaluate,
    grid_search_alpha,
    hybrid_rank,
    rank_of,
    reverse_history_rank,
)
from .ontology import (
    Occupation,
    Ontology,
    OntologyError,
    Skill,
    UnknownOccupationError,
    history_skill_union,
    load_ontology,
    skill_set,
)
from .projection import (
    ProjectionMatrix,
    RankDeficiencyError,
    RegressionSet,
    TextRanker,
    apply_projection,
    build_regression_set,
    cosine_similarity,
    fit_projection,
    load_projection,
    rank_by_text,
    save_projection,
    text_score,
)
from .skills import SkillRanker, rank_by_skill, skill_match_score

__version__ = "0.1.0"
