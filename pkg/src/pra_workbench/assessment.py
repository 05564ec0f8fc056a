"""Assessment sessions: scenario capture, estimation, recalibration, finalization.

A session walks the taxonomy at the working level fixed by its maturity
protocol, collects hazard scenarios with severity and likelihood estimates,
reconciles diverging team estimates, and freezes into an immutable record
once every aspect is complete.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from datetime import date
from typing import Optional, Sequence

from .calculus import HarmSeverityLevel, LikelihoodLevel, risk_level
from .pathway import (
    InteractionCell,
    PathwayStep,
    RiskPathway,
    StepKind,
    operator_by_name,
    validate_pathway,
)
from .taxonomy import HazardMode, Taxonomy, TaxonomyLevel, slugify


class AssessmentError(ValueError):
    """Base for assessment workflow rejections."""


class UnknownAmlCode(AssessmentError):
    pass


class GatingError(AssessmentError):
    """The protocol in force does not allow the attempted assessment shape."""

    def __init__(self, message: str, missing_flag: str):
        self.missing_flag = missing_flag
        super().__init__(message)


class RationaleError(AssessmentError):
    def __init__(self, missing: Sequence[str]):
        self.missing = tuple(missing)
        super().__init__("rationale is missing mandatory fields: " + ", ".join(missing))


class ImmutableSessionError(AssessmentError):
    def __init__(self) -> None:
        super().__init__("session is finalized and can no longer change")


class FinalizeError(AssessmentError):
    def __init__(self, problems: Sequence[str]):
        self.problems = tuple(problems)
        super().__init__("cannot finalize: " + "; ".join(problems))


@dataclass(frozen=True)
class AmlProtocol:
    """Assessment maturity level: which assessment shapes are in scope."""

    code: str
    assess_focused_range: bool = False
    assess_aspect_group: bool = False
    consider_aspect_level: bool = False
    assess_aspect_level: bool = False
    assess_second_order: bool = False
    assess_propagation_operators: bool = False


def _aml(code: str, **flags: bool) -> AmlProtocol:
    return AmlProtocol(code=code, **flags)


AML_PROTOCOLS: dict[str, AmlProtocol] = {
    p.code: p
    for p in (
        _aml("AML-008", assess_focused_range=True, assess_aspect_group=True),
        _aml("AML-010", assess_aspect_group=True),
        _aml("AML-020", assess_aspect_group=True, assess_second_order=True),
        _aml("AML-110", assess_aspect_group=True, consider_aspect_level=True),
        _aml("AML-111", assess_aspect_group=True, consider_aspect_level=True,
             assess_propagation_operators=True),
        _aml("AML-120", assess_aspect_group=True, consider_aspect_level=True,
             assess_second_order=True),
        _aml("AML-121", assess_aspect_group=True, consider_aspect_level=True,
             assess_second_order=True, assess_propagation_operators=True),
        _aml("AML-210", consider_aspect_level=True, assess_aspect_level=True),
        _aml("AML-211", consider_aspect_level=True, assess_aspect_level=True,
             assess_propagation_operators=True),
        _aml("AML-220", consider_aspect_level=True, assess_aspect_level=True,
             assess_second_order=True),
        _aml("AML-221", consider_aspect_level=True, assess_aspect_level=True,
             assess_second_order=True, assess_propagation_operators=True),
    )
}


def aml_capabilities(code: str) -> AmlProtocol:
    try:
        return AML_PROTOCOLS[code]
    except KeyError:
        known = ", ".join(sorted(AML_PROTOCOLS))
        raise UnknownAmlCode(f"unknown AML code {code!r}; known codes: {known}") from None


def working_level(aml: AmlProtocol) -> TaxonomyLevel:
    """The taxonomy tier at which the protocol walks aspects."""
    if aml.assess_aspect_level:
        return TaxonomyLevel.TL2
    if aml.assess_aspect_group:
        return TaxonomyLevel.TL1
    raise AssessmentError(f"protocol {aml.code} fixes no working level")


@dataclass(frozen=True)
class TeamMember:
    name: str
    role: str = ""


@dataclass(frozen=True)
class SystemInfo:
    """Context record describing what is being assessed, by whom, and how."""

    assessment_date: Optional[date] = None
    team_composition: tuple[TeamMember, ...] = ()
    assessing_organization: str = ""
    assessment_time_frame_years: float = 0.0
    assessment_type_code: str = ""
    system_name: str = ""
    version: str = ""
    access_level: str = ""
    generational_scope: str = ""
    system_level_assumptions: str = ""


def validate_system_info(info: SystemInfo) -> list[str]:
    """Names of fields still blocking finalization."""
    problems = []
    if info.assessment_date is None:
        problems.append("assessment_date is not set")
    if not info.team_composition or any(not m.name.strip() for m in info.team_composition):
        problems.append("team_composition needs at least one named assessor")
    if not info.assessing_organization.strip():
        problems.append("assessing_organization is empty")
    if info.assessment_time_frame_years <= 0:
        problems.append("assessment_time_frame_years must be positive")
    if not info.assessment_type_code.strip():
        problems.append("assessment_type_code is empty")
    for text_field in ("system_name", "version", "access_level",
                       "generational_scope", "system_level_assumptions"):
        if not getattr(info, text_field).strip():
            problems.append(f"{text_field} is empty")
    return problems


class TeamMode(enum.Enum):
    SINGLE = "single"
    TEAM = "team"


class EstimateRound(enum.Enum):
    INITIAL = "initial"
    POST_RECALIBRATION = "post_recalibration"


@dataclass(frozen=True)
class EstimateEntry:
    assessor: str
    hsl: HarmSeverityLevel
    ll: LikelihoodLevel
    round: EstimateRound = EstimateRound.INITIAL


@dataclass(frozen=True)
class Rationale:
    key_assumptions: str
    evidence_quality: str
    known_uncertainties: str
    sensitivity_notes: str = ""
    operator_or_interaction_rationale: Optional[str] = None

    def missing_fields(self) -> list[str]:
        return [
            name
            for name in ("key_assumptions", "evidence_quality", "known_uncertainties")
            if not getattr(self, name).strip()
        ]


class ScenarioOrder(enum.Enum):
    FIRST_ORDER = "first_order"
    SECOND_ORDER = "second_order"


class ScenarioStatus(enum.Enum):
    DRAFT = "draft"
    ESTIMATED = "estimated"
    RECALIBRATING = "recalibrating"
    COMPLETE = "complete"


@dataclass(frozen=True)
class OutcomeRecord:
    """One potential harm outcome of a scenario with its estimate history."""

    description: str
    estimates: tuple[EstimateEntry, ...] = ()
    final: Optional[tuple[HarmSeverityLevel, LikelihoodLevel]] = None
    flagged: bool = False


@dataclass(frozen=True)
class ScenarioRecord:
    id: str
    aspect_ref: str
    order: ScenarioOrder
    hazard_mode: HazardMode
    narrative: str
    outcomes: tuple[OutcomeRecord, ...]
    prop_enhanced: bool = False
    pathway: Optional[RiskPathway] = None
    interaction: Optional[InteractionCell] = None
    parent_scenario: Optional[str] = None
    applied_operator: Optional[str] = None
    dimension_refs: tuple[str, ...] = ()
    rationale: Optional[Rationale] = None
    status: ScenarioStatus = ScenarioStatus.DRAFT

    def __post_init__(self) -> None:
        if not self.id.strip():
            raise AssessmentError("scenario id must be non-empty")
        if self.order == ScenarioOrder.SECOND_ORDER and self.interaction is None:
            raise AssessmentError(f"second-order scenario {self.id} needs an interaction pair")
        if self.order == ScenarioOrder.FIRST_ORDER and self.interaction is not None:
            raise AssessmentError(f"first-order scenario {self.id} cannot carry an interaction")
        if self.prop_enhanced:
            if self.parent_scenario is None or self.applied_operator is None:
                raise AssessmentError(
                    f"propagation-enhanced scenario {self.id} needs a parent scenario "
                    "and an applied operator"
                )
        elif self.parent_scenario is not None or self.applied_operator is not None:
            raise AssessmentError(
                f"scenario {self.id} carries lineage fields but is not propagation-enhanced"
            )
        if not self.outcomes:
            raise AssessmentError(f"scenario {self.id} needs at least one outcome")

    def outcome(self, index: int) -> OutcomeRecord:
        if not 0 <= index < len(self.outcomes):
            raise AssessmentError(
                f"scenario {self.id} has no outcome {index}; "
                f"valid indices are 0..{len(self.outcomes) - 1}"
            )
        return self.outcomes[index]


@dataclass(frozen=True)
class DivergenceThresholds:
    """Spreads at or above these values flag an outcome for recalibration."""

    ll_delta: int = 2
    hsl_delta: int = 1


@dataclass(frozen=True)
class DivergenceFlag:
    scenario_id: str
    outcome_index: int
    hsl_spread: int
    ll_spread: int
    message: str


class SessionState(enum.Enum):
    CONFIGURED = "configured"
    IN_PROGRESS = "in_progress"
    FINALIZED = "finalized"


@dataclass(frozen=True)
class AspectCompletion:
    aspect_id: str
    rationale: str


@dataclass(frozen=True)
class AssessmentSession:
    id: str
    system_info: SystemInfo
    aml: AmlProtocol
    framework_version: str
    team_mode: TeamMode
    scenarios: tuple[ScenarioRecord, ...] = ()
    aspect_completion: tuple[AspectCompletion, ...] = ()
    divergence_thresholds: DivergenceThresholds = DivergenceThresholds()
    state: SessionState = SessionState.CONFIGURED
    revision: int = 0

    def scenario(self, scenario_id: str) -> ScenarioRecord:
        for scenario in self.scenarios:
            if scenario.id == scenario_id:
                return scenario
        raise AssessmentError(f"unknown scenario id: {scenario_id}")

    def has_scenario(self, scenario_id: str) -> bool:
        return any(s.id == scenario_id for s in self.scenarios)

    def assessors(self) -> list[str]:
        return [m.name for m in self.system_info.team_composition]

    def completed_aspects(self) -> dict[str, str]:
        return {c.aspect_id: c.rationale for c in self.aspect_completion}


def assessment_type_code(aml_code: str, framework_version: str, team_mode: TeamMode) -> str:
    suffix = "T" if team_mode == TeamMode.TEAM else "S"
    return f"{aml_code}-{framework_version}-{suffix}"


def create_session(
    session_id: str,
    system_info: SystemInfo,
    aml_code: str,
    framework_version: str,
    team_mode: TeamMode,
    divergence_thresholds: DivergenceThresholds = DivergenceThresholds(),
) -> AssessmentSession:
    """Open a new session; the type code is derived, never caller-supplied."""
    if not session_id.strip():
        raise AssessmentError("session id must be non-empty")
    aml = aml_capabilities(aml_code)
    if not framework_version.strip():
        raise AssessmentError("framework version must be non-empty")
    members = system_info.team_composition
    if team_mode == TeamMode.SINGLE and len(members) != 1:
        raise AssessmentError("single-assessor sessions need exactly one team member")
    if team_mode == TeamMode.TEAM and len(members) < 2:
        raise AssessmentError("team sessions need at least two team members")
    if len({m.name for m in members}) != len(members):
        raise AssessmentError("team member names must be distinct")
    code = assessment_type_code(aml_code, framework_version, team_mode)
    info = replace(system_info, assessment_type_code=code)
    return AssessmentSession(
        id=session_id,
        system_info=info,
        aml=aml,
        framework_version=framework_version,
        team_mode=team_mode,
        divergence_thresholds=divergence_thresholds,
    )


def _require_mutable(session: AssessmentSession) -> None:
    if session.state == SessionState.FINALIZED:
        raise ImmutableSessionError()


def _advance(session: AssessmentSession, **changes) -> AssessmentSession:
    state = changes.pop("state", session.state)
    if state == SessionState.CONFIGURED:
        state = SessionState.IN_PROGRESS
    return replace(session, state=state, revision=session.revision + 1, **changes)


def next_aspects(session: AssessmentSession, taxonomy: Taxonomy) -> list[str]:
    """Working-level aspects not yet marked complete, in document order."""
    done = set(session.completed_aspects())
    level = working_level(session.aml)
    return [n.id for n in taxonomy.at_level(level) if n.id not in done]


def _check_aspect_gating(session: AssessmentSession, aspect_ref: str, taxonomy: Taxonomy) -> None:
    node = taxonomy.node(aspect_ref)
    level = working_level(session.aml)
    if node.level == level:
        return
    if node.level < level:
        raise GatingError(
            f"aspect {aspect_ref} sits above the working level (TL{int(level)}) "
            f"of protocol {session.aml.code}",
            missing_flag="assess_aspect_level",
        )
    if not session.aml.consider_aspect_level:
        raise GatingError(
            f"protocol {session.aml.code} does not allow aspect-level detail below "
            f"TL{int(level)}; scenario aspect {aspect_ref} requires the "
            "consider-aspect-level option",
            missing_flag="consider_aspect_level",
        )
    taxonomy.ancestor_at(aspect_ref, level)


def add_scenario(
    session: AssessmentSession,
    scenario: ScenarioRecord,
    taxonomy: Taxonomy,
) -> AssessmentSession:
    """Admit a scenario if the protocol allows its shape."""
    _require_mutable(session)
    if session.has_scenario(scenario.id):
        raise AssessmentError(f"duplicate scenario id: {scenario.id}")
    if not scenario.narrative.strip():
        raise AssessmentError(f"scenario {scenario.id} needs a narrative")
    if any(not o.description.strip() for o in scenario.outcomes):
        raise AssessmentError(f"scenario {scenario.id} has an outcome without a description")
    if scenario.status != ScenarioStatus.DRAFT or any(
        o.estimates or o.final for o in scenario.outcomes
    ):
        raise AssessmentError(
            f"scenario {scenario.id} must enter as a draft without estimates"
        )
    _check_aspect_gating(session, scenario.aspect_ref, taxonomy)
    if scenario.order == ScenarioOrder.SECOND_ORDER:
        if not session.aml.assess_second_order:
            raise GatingError(
                f"protocol {session.aml.code} does not include second-order "
                "assessment; pick a protocol with the second-order option",
                missing_flag="assess_second_order",
            )
        assert scenario.interaction is not None
        for ref in scenario.interaction.pair():
            taxonomy.node(ref)
    if scenario.prop_enhanced:
        if not session.aml.assess_propagation_operators:
            raise GatingError(
                f"protocol {session.aml.code} does not include propagation "
                "operator assessment",
                missing_flag="assess_propagation_operators",
            )
        operator_by_name(scenario.applied_operator or "")
        if scenario.parent_scenario and not session.has_scenario(scenario.parent_scenario):
            raise AssessmentError(
                f"scenario {scenario.id} names unknown parent {scenario.parent_scenario}"
            )
    if scenario.pathway is not None:
        findings = validate_pathway(taxonomy, scenario.pathway)
        if findings:
            details = "; ".join(f.message for f in findings)
            raise AssessmentError(f"scenario {scenario.id} pathway is invalid: {details}")
    return _advance(session, scenarios=session.scenarios + (scenario,))


def _replace_scenario(
    session: AssessmentSession, updated: ScenarioRecord
) -> tuple[ScenarioRecord, ...]:
    return tuple(updated if s.id == updated.id else s for s in session.scenarios)


def record_estimate(
    session: AssessmentSession,
    scenario_id: str,
    assessor: str,
    outcome_index: int,
    hsl: HarmSeverityLevel,
    ll: LikelihoodLevel,
    rationale: Rationale,
) -> AssessmentSession:
    """Record one assessor's initial severity and likelihood for an outcome."""
    _require_mutable(session)
    scenario = session.scenario(scenario_id)
    if scenario.status in (ScenarioStatus.RECALIBRATING, ScenarioStatus.COMPLETE):
        raise AssessmentError(
            f"scenario {scenario_id} is {scenario.status.value}; initial estimates are closed"
        )
    if assessor not in session.assessors():
        raise AssessmentError(f"{assessor!r} is not on the assessment team")
    missing = rationale.missing_fields()
    if missing:
        raise RationaleError(missing)
    outcome = scenario.outcome(outcome_index)
    entry = EstimateEntry(
        assessor=assessor,
        hsl=HarmSeverityLevel(hsl),
        ll=LikelihoodLevel(ll),
        round=EstimateRound.INITIAL,
    )
    kept = tuple(
        e for e in outcome.estimates
        if not (e.assessor == assessor and e.round == EstimateRound.INITIAL)
    )
    outcomes = list(scenario.outcomes)
    outcomes[outcome_index] = replace(outcome, estimates=kept + (entry,))
    updated = replace(scenario, outcomes=tuple(outcomes), rationale=rationale)
    updated = replace(updated, status=_estimation_status(session, updated))
    return _advance(session, scenarios=_replace_scenario(session, updated))


def _estimation_status(session: AssessmentSession, scenario: ScenarioRecord) -> ScenarioStatus:
    team = set(session.assessors())
    for outcome in scenario.outcomes:
        seen = {e.assessor for e in outcome.estimates if e.round == EstimateRound.INITIAL}
        if not team <= seen:
            return ScenarioStatus.DRAFT
    return ScenarioStatus.ESTIMATED


def divergence_flags(
    scenario: ScenarioRecord,
    thresholds: DivergenceThresholds = DivergenceThresholds(),
) -> list[DivergenceFlag]:
    """Outcomes whose initial estimates spread beyond the thresholds."""
    flags = []
    for index, outcome in enumerate(scenario.outcomes):
        initial = [e for e in outcome.estimates if e.round == EstimateRound.INITIAL]
        if len(initial) < 2:
            continue
        hsl_spread = max(e.hsl for e in initial) - min(e.hsl for e in initial)
        ll_spread = max(e.ll for e in initial) - min(e.ll for e in initial)
        if hsl_spread >= thresholds.hsl_delta or ll_spread >= thresholds.ll_delta:
            flags.append(DivergenceFlag(
                scenario_id=scenario.id,
                outcome_index=index,
                hsl_spread=hsl_spread,
                ll_spread=ll_spread,
                message=(
                    f"outcome {index} of scenario {scenario.id} diverges: "
                    f"severity spread {hsl_spread}, likelihood spread {ll_spread}"
                ),
            ))
    return flags


def detect_divergence(
    session: AssessmentSession, scenario_id: str
) -> tuple[AssessmentSession, list[DivergenceFlag]]:
    """Flag diverging outcomes; a flagged scenario moves to recalibration."""
    _require_mutable(session)
    scenario = session.scenario(scenario_id)
    if scenario.status not in (ScenarioStatus.ESTIMATED, ScenarioStatus.RECALIBRATING):
        raise AssessmentError(
            f"scenario {scenario_id} is {scenario.status.value}; divergence checks "
            "need a fully estimated scenario"
        )
    flags = divergence_flags(scenario, session.divergence_thresholds)
    if flags:
        flagged_indices = {f.outcome_index for f in flags}
        outcomes = tuple(
            replace(o, flagged=(i in flagged_indices))
            for i, o in enumerate(scenario.outcomes)
        )
        updated = replace(scenario, outcomes=outcomes, status=ScenarioStatus.RECALIBRATING)
    else:
        updated = scenario
    return _advance(session, scenarios=_replace_scenario(session, updated)), flags


def _final_estimate(
    entries: Sequence[EstimateEntry],
) -> tuple[HarmSeverityLevel, LikelihoodLevel]:
    """Pick the entry with the highest risk level, then severity, then likelihood."""
    best = max(entries, key=lambda e: (risk_level(e.hsl, e.ll), e.hsl, e.ll))
    return (best.hsl, best.ll)


def resolve_recalibration(
    session: AssessmentSession,
    scenario_id: str,
    post_entries: Sequence[tuple[int, EstimateEntry]] = (),
) -> AssessmentSession:
    """Settle final outcome estimates and complete the scenario.

    Outcomes that were flagged as divergent need a post-recalibration entry
    from every team member; unflagged outcomes pass their initial estimates
    through. The final estimate is always the maximum-risk candidate.
    """
    _require_mutable(session)
    scenario = session.scenario(scenario_id)
    if scenario.status == ScenarioStatus.RECALIBRATING:
        flagged = {i for i, o in enumerate(scenario.outcomes) if o.flagged}
    elif scenario.status == ScenarioStatus.ESTIMATED:
        flagged = {
            f.outcome_index
            for f in divergence_flags(scenario, session.divergence_thresholds)
        }
    else:
        raise AssessmentError(
            f"scenario {scenario_id} is {scenario.status.value}; nothing to resolve"
        )
    by_outcome: dict[int, list[EstimateEntry]] = {}
    for index, entry in post_entries:
        scenario.outcome(index)
        if index not in flagged:
            raise AssessmentError(
                f"outcome {index} of scenario {scenario_id} was not flagged; "
                "post-recalibration entries apply only to divergent outcomes"
            )
        if entry.round != EstimateRound.POST_RECALIBRATION:
            raise AssessmentError("recalibration entries must use the post-recalibration round")
        if entry.assessor not in session.assessors():
            raise AssessmentError(f"{entry.assessor!r} is not on the assessment team")
        by_outcome.setdefault(index, []).append(entry)

    team = set(session.assessors())
    outcomes = list(scenario.outcomes)
    for index, outcome in enumerate(scenario.outcomes):
        if index in flagged:
            entries = by_outcome.get(index, [])
            seen = {e.assessor for e in entries}
            if seen != team:
                missing = sorted(team - seen)
                raise AssessmentError(
                    f"outcome {index} of scenario {scenario_id} needs post-recalibration "
                    "entries from every assessor; missing: " + ", ".join(missing)
                )
            candidates: Sequence[EstimateEntry] = entries
            history = outcome.estimates + tuple(entries)
            flagged_mark = True
        else:
            candidates = [
                e for e in outcome.estimates if e.round == EstimateRound.INITIAL
            ]
            if not candidates:
                raise AssessmentError(
                    f"outcome {index} of scenario {scenario_id} has no estimates"
                )
            history = outcome.estimates
            flagged_mark = outcome.flagged
        outcomes[index] = replace(
            outcome,
            estimates=history,
            final=_final_estimate(candidates),
            flagged=flagged_mark,
        )
    updated = replace(scenario, outcomes=tuple(outcomes), status=ScenarioStatus.COMPLETE)
    return _advance(session, scenarios=_replace_scenario(session, updated))


def mark_aspect_complete(
    session: AssessmentSession,
    aspect_id: str,
    rationale: str,
    taxonomy: Taxonomy,
) -> AssessmentSession:
    """Record that an aspect has been fully considered, with justification."""
    _require_mutable(session)
    if not rationale.strip():
        raise AssessmentError(f"completing aspect {aspect_id} needs a rationale")
    level = working_level(session.aml)
    node = taxonomy.node(aspect_id)
    if node.level != level:
        raise AssessmentError(
            f"aspect {aspect_id} is not at the protocol working level (TL{int(level)})"
        )
    completion = tuple(c for c in session.aspect_completion if c.aspect_id != aspect_id)
    completion += (AspectCompletion(aspect_id=aspect_id, rationale=rationale),)
    return _advance(session, aspect_completion=completion)


def finalize(session: AssessmentSession, taxonomy: Taxonomy) -> AssessmentSession:
    """Freeze the session once every gate holds; finalized sessions never change."""
    _require_mutable(session)
    problems = []
    remaining = next_aspects(session, taxonomy)
    if remaining:
        shown = ", ".join(remaining[:5])
        more = f" (+{len(remaining) - 5} more)" if len(remaining) > 5 else ""
        problems.append(f"aspects not yet complete: {shown}{more}")
    unfinished = [s.id for s in session.scenarios if s.status != ScenarioStatus.COMPLETE]
    if unfinished:
        problems.append("scenarios not complete: " + ", ".join(unfinished))
    problems.extend(validate_system_info(session.system_info))
    if problems:
        raise FinalizeError(problems)
    return replace(session, state=SessionState.FINALIZED, revision=session.revision + 1)


def apply_operator(
    parent: ScenarioRecord,
    operator_name: str,
    narrative_delta: str = "",
    new_id: Optional[str] = None,
) -> ScenarioRecord:
    """Derive a propagation-enhanced child scenario awaiting fresh estimates."""
    op = operator_by_name(operator_name)
    child_id = new_id or f"{parent.id}+{slugify(op.name)}"
    narrative = parent.narrative
    note = narrative_delta.strip() or f"Propagated through {op.name}."
    narrative = f"{narrative}\n{note}" if narrative else note
    pathway = parent.pathway
    if pathway is not None:
        inserted = PathwayStep(
            description=note,
            step_kind=StepKind.INTERMEDIATE,
            probability=None,
            operator_in=op.name,
        )
        steps = pathway.steps[:-1] + (inserted,) + pathway.steps[-1:]
        pathway = replace(pathway, steps=steps)
    outcomes = tuple(
        OutcomeRecord(description=o.description) for o in parent.outcomes
    )
    return replace(
        parent,
        id=child_id,
        narrative=narrative,
        pathway=pathway,
        outcomes=outcomes,
        prop_enhanced=True,
        parent_scenario=parent.id,
        applied_operator=op.name,
        status=ScenarioStatus.DRAFT,
    )
