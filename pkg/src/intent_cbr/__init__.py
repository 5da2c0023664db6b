"""Case-based reasoning engine for cyber-attack intention analysis.

Retrieves precedent cases by weighted evidence similarity, walks
proposals through the retrieve/reuse/revise/retain cycle, and seeds its
repository with a belief-function intention estimator over causal
networks.
"""

from .cbr import (
    RetrievalRanking,
    ReviseVerdict,
    align_evidence,
    initialize_incipient,
    local_similarity,
    retain,
    retrieve,
    reuse,
    revise,
    similarity,
    write_ranking_csv,
)
from .errors import (
    AllZeroPosteriors,
    ConfidenceOutOfRange,
    CorruptRecord,
    DuplicateCaseId,
    DuplicateEvidenceId,
    EmptyPosteriors,
    EmptyRanking,
    EmptyRepository,
    FrameMismatch,
    IllegalTransition,
    IntentCbrError,
    IoFailure,
    MalformedRecord,
    NoHypothesis,
    SchemaVersionMismatch,
    SubsetOutsideFrame,
    TotalConflict,
    UnknownCaseId,
    UnknownEvidence,
    UnnormalizedWeights,
    ValidationFailure,
    ZeroMarginal,
)
from .inference import (
    analyze_attack,
    belief,
    build_mass_function,
    combine,
    evidence_marginal,
    plausibility,
    posterior,
    posteriors_for_evidence,
    vacuous,
)
from .ingest import map_kind, parse_evidence_file
from .model import (
    Attack,
    BeliefReport,
    Case,
    CaseStatus,
    CausalNetwork,
    Evidence,
    EvidenceKind,
    Hypothesis,
    Intention,
    MassFunction,
    SimilarityResult,
    transition,
    validate_attack,
    validate_case,
    validate_network,
)
from .repository import Repository

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
