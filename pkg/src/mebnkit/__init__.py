"""Multi-Entity Bayesian Networks: modeling, grounding, exact inference.

Declare an MTheory in the textual modeling language (:mod:`mebnkit.dsl`),
ground it against entity findings into a situation-specific Bayesian
network (:mod:`mebnkit.grounding`), and answer queries exactly
(:mod:`mebnkit.inference`).  A worked oil-spill monitoring model ships
in :mod:`mebnkit.corpus`.
"""

from .errors import (
    ArityMismatchError,
    ConflictingTypeError,
    DependencyCycleError,
    DistributionError,
    EnumerationTooLargeError,
    GroundingError,
    GroundingExplosionError,
    ImpossibleEvidenceError,
    InferenceError,
    MebnError,
    ParseError,
    RowCoverageError,
    UnknownFunctorError,
    UnresolvedQueryError,
)
from .model import (
    EntityInstance,
    EntityPool,
    EntityType,
    Finding,
    FindingSet,
    MFrag,
    MTheory,
    Query,
    RandomVariableSignature,
    RVInstance,
    StateSpace,
    Violation,
    entity_pool,
    home_mfrag,
    validate_mtheory,
)
from .dsl import (
    ParseDiagnostic,
    SourceSpan,
    parse_findings,
    parse_model,
    parse_query,
    serialize_model,
)
from .lpd import match_rule, synthesize_cpt, validate_distribution
from .grounding import (
    SSBN,
    Binding,
    ContextValue,
    SSBNNode,
    build_ssbn,
    enumerate_bindings,
    evaluate_context_node,
    prune_barren,
)
from .inference import (
    Factor,
    Posterior,
    apply_evidence,
    elimination_order,
    posterior_enumerate,
    posterior_ve,
)
from .export import ssbn_to_dot, ssbn_to_json

__version__ = "0.1.0"

__all__ = [
    "ArityMismatchError",
    "Binding",
    "ConflictingTypeError",
    "ContextValue",
    "DependencyCycleError",
    "DistributionError",
    "EntityInstance",
    "EntityPool",
    "EntityType",
    "EnumerationTooLargeError",
    "Factor",
    "Finding",
    "FindingSet",
    "GroundingError",
    "GroundingExplosionError",
    "ImpossibleEvidenceError",
    "InferenceError",
    "MebnError",
    "MFrag",
    "MTheory",
    "ParseDiagnostic",
    "ParseError",
    "Posterior",
    "Query",
    "RandomVariableSignature",
    "RowCoverageError",
    "RVInstance",
    "SourceSpan",
    "SSBN",
    "SSBNNode",
    "StateSpace",
    "UnknownFunctorError",
    "UnresolvedQueryError",
    "Violation",
    "apply_evidence",
    "build_ssbn",
    "elimination_order",
    "entity_pool",
    "enumerate_bindings",
    "evaluate_context_node",
    "home_mfrag",
    "match_rule",
    "parse_findings",
    "parse_model",
    "parse_query",
    "posterior_enumerate",
    "posterior_ve",
    "prune_barren",
    "serialize_model",
    "ssbn_to_dot",
    "ssbn_to_json",
    "synthesize_cpt",
    "validate_distribution",
    "validate_mtheory",
    "__version__",
]
