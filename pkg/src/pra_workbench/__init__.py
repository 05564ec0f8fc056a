"""Assessor workbench for probabilistic risk assessment of AI systems."""

from .calculus import (
    BandAnnotation,
    BandedLikelihood,
    HarmDimension,
    HarmSeverityLevel,
    HslThresholdTable,
    LikelihoodLevel,
    OddsBand,
    ProbabilityInterval,
    RiskLevel,
    compose_sequential,
    hsl_for_metric,
    hsl_upper_threshold,
    ll_band,
    ll_conservative,
    ll_from_probability,
    risk_level,
)
from .taxonomy import (
    HazardMode,
    RubricEntry,
    RubricKind,
    RubricSet,
    Taxonomy,
    TaxonomyError,
    TaxonomyLevel,
    TaxonomyNode,
    bundled_rubrics,
    bundled_taxonomy,
    children,
    load_rubrics,
    load_taxonomy,
    resolve_path,
    rubric_lookup,
)
from .pathway import (
    InteractionCell,
    PathwayDirection,
    PathwayStep,
    PropagationCategory,
    PropagationOperator,
    RiskPathway,
    StepKind,
    interaction_pairs,
    operator_by_name,
    operator_catalog,
    pathway_likelihood,
    validate_pathway,
)
from .assessment import (
    AmlProtocol,
    AssessmentError,
    AssessmentSession,
    DivergenceThresholds,
    EstimateEntry,
    EstimateRound,
    GatingError,
    OutcomeRecord,
    Rationale,
    ScenarioOrder,
    ScenarioRecord,
    ScenarioStatus,
    SessionState,
    SystemInfo,
    TeamMember,
    TeamMode,
    aml_capabilities,
    apply_operator,
    add_scenario,
    create_session,
    detect_divergence,
    finalize,
    mark_aspect_complete,
    next_aspects,
    record_estimate,
    resolve_recalibration,
    working_level,
)
from .reporting import (
    DEFAULT_SCHEME,
    AssessmentTypeColumn,
    FocusedDimension,
    FocusedScheme,
    OutputLog,
    ReportCard,
    ReportFormat,
    TalliedRiskMatrix,
    diff_report_cards,
    emit_output_log,
    focused_aggregation,
    render_report,
    report_card,
    tallied_matrix,
    verify_output_log,
)
from .workbook import (
    MutationEnvelope,
    RevisionConflict,
    SessionStore,
    WorkbookDocument,
    WorkbookError,
    apply_mutation,
    load_workbook,
    save_workbook,
)
from .service import create_app

__version__ = "0.1.0"
