"""Reconciliation of functional satisfaction conditions over annotated goal models."""

from .conditions import (
    AltConditions,
    ConditionSet,
    EMPTY_KB,
    KnowledgeBase,
    Literal,
    conflict_set,
    entails,
    kb_consistent,
    kb_reduce,
    lit,
    negate_set,
    parse_kb,
    rec,
    state_update,
)
from .document import document_dumps, document_loads, document_to_model, model_to_document
from .dsl import ParseError, model_revision, parse_model, serialize_model
from .model import (
    Actor,
    Artefact,
    DecompositionLink,
    DependencyLink,
    GoalModel,
    ModelError,
    validate_model,
)
from .orgmod import (
    CapExceeded,
    DEFAULT_CAP,
    count_orgmods,
    derive_routine_labels,
    extract_dsos,
    label_text,
    path_text,
    traverse_paths,
)
from .reconcile import (
    AnnotatedModel,
    ConflictReport,
    Finding,
    and_rec,
    check_commutativity,
    dep_rec,
    detect_consistency,
    detect_entailment,
    minimality_rank,
    or_rec,
    run_sra,
)
from .resolve import (
    RefactoringPlan,
    StalePlanError,
    apply_plan,
    availability,
    cra_resolve_hierarchic,
    cra_resolve_sibling,
    deficiency,
    era_resolve,
    resolve_finding,
)

__version__ = "0.1.0"
