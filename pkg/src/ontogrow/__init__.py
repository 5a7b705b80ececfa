"""Run-time taxonomy expansion for knowledge-grounded conversation."""

from .errors import (
    DuplicateConceptError,
    IllegalAnswerError,
    OntologyIntegrityError,
    OntologyParseError,
    OracleInconsistentError,
    SessionFinishedError,
    StaleRevisionError,
    UnknownClassError,
    UnknownMethodError,
)
from .extraction import (
    CandidateConcept,
    ExtractionResult,
    classify_outcome,
    extract_concepts,
    run_recognition_eval,
)
from .insertion import (
    Answer,
    InsertionSession,
    OracleUser,
    Question,
    answer,
    attach_and_patch,
    run_with_oracle,
    start_session,
)
from .nlu import (
    AtomicSentence,
    EntityMention,
    IntentModel,
    LocalNluProvider,
    TaggedUtterance,
    classify_content,
    match_intent,
    recognize_entities,
    split_atomic,
    train_intents,
)
from .ontology import (
    Instance,
    LikelinessValue,
    Ontology,
    OntologyClass,
    SentenceTemplate,
    load_ontology,
    serialize_ontology,
)
from .stats import (
    ConfusionMatrix,
    MetricsReport,
    StepRecord,
    WilcoxonResult,
    compute_metrics,
    run_insertion_eval,
    wilcoxon_signed_rank,
)
from .text import lemmatize
from .tree import (
    DialogueTree,
    TopicNode,
    build_tree,
    next_topic,
    patch_tree,
    trigger_topic,
)

__version__ = "0.1.0"
