"""Workbook persistence and command application.

A workbook document is the canonical JSON form of one assessment session.
Serialization is deterministic: saving a loaded document reproduces the
input bytes exactly, which makes content digests and byte-level diffing
meaningful. Mutations go through envelopes carrying the revision the caller
last saw, so concurrent edits surface as conflicts instead of lost updates.
"""
from __future__ import annotations

import json
import logging
import os
import re
import tempfile
import threading
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from . import assessment as asmt
from .assessment import (
    AspectCompletion,
    AssessmentSession,
    DivergenceThresholds,
    EstimateEntry,
    EstimateRound,
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
)
from .calculus import HarmSeverityLevel, LikelihoodLevel, ProbabilityInterval
from .pathway import (
    InteractionCell,
    PathwayDirection,
    PathwayStep,
    RiskPathway,
    StepKind,
)
from .taxonomy import HazardMode, Taxonomy

logger = logging.getLogger(__name__)

FORMAT_VERSION = "1"


class WorkbookError(ValueError):
    """A document failed validation; nothing is repaired silently."""


class RevisionConflict(Exception):
    """The caller's expected revision no longer matches the stored session."""

    def __init__(self, current_revision: int):
        self.current_revision = current_revision
        super().__init__(
            f"session has moved on to revision {current_revision}; "
            "refetch before retrying"
        )


@dataclass(frozen=True)
class WorkbookDocument:
    format_version: str
    taxonomy_version: str
    session: AssessmentSession
    emitted_outputs: tuple[str, ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)


# ---------------------------------------------------------------------------
# Serialization to canonical dictionaries


def _system_info_to_dict(info: SystemInfo) -> dict:
    return {
        "assessment_date": info.assessment_date.isoformat() if info.assessment_date else None,
        "team_composition": [
            {"name": m.name, "role": m.role} for m in info.team_composition
        ],
        "assessing_organization": info.assessing_organization,
        "assessment_time_frame_years": info.assessment_time_frame_years,
        "assessment_type_code": info.assessment_type_code,
        "system_name": info.system_name,
        "version": info.version,
        "access_level": info.access_level,
        "generational_scope": info.generational_scope,
        "system_level_assumptions": info.system_level_assumptions,
    }


def _estimate_to_dict(entry: EstimateEntry) -> dict:
    return {
        "assessor": entry.assessor,
        "hsl": int(entry.hsl),
        "ll": int(entry.ll),
        "round": entry.round.value,
    }


def _rationale_to_dict(rationale: Optional[Rationale]) -> Optional[dict]:
    if rationale is None:
        return None
    return {
        "key_assumptions": rationale.key_assumptions,
        "evidence_quality": rationale.evidence_quality,
        "known_uncertainties": rationale.known_uncertainties,
        "sensitivity_notes": rationale.sensitivity_notes,
        "operator_or_interaction_rationale": rationale.operator_or_interaction_rationale,
    }


def _outcome_to_dict(outcome: OutcomeRecord) -> dict:
    return {
        "description": outcome.description,
        "estimates": [_estimate_to_dict(e) for e in outcome.estimates],
        "final": [int(outcome.final[0]), int(outcome.final[1])] if outcome.final else None,
        "flagged": outcome.flagged,
    }


def _probability_to_dict(probability) -> Optional[dict]:
    if probability is None:
        return None
    if isinstance(probability, ProbabilityInterval):
        return {"kind": "interval", "lo": probability.lo, "hi": probability.hi}
    return {"kind": "level", "level": int(probability)}


def _step_to_dict(step: PathwayStep) -> dict:
    return {
        "description": step.description,
        "step_kind": step.step_kind.value,
        "probability": _probability_to_dict(step.probability),
        "operator_in": step.operator_in,
    }


def _pathway_to_dict(pathway: Optional[RiskPathway]) -> Optional[dict]:
    if pathway is None:
        return None
    return {
        "source_aspect": pathway.source_aspect,
        "steps": [_step_to_dict(s) for s in pathway.steps],
        "terminal_aspect": pathway.terminal_aspect,
        "direction_built": pathway.direction_built.value,
    }


def _interaction_to_dict(cell: Optional[InteractionCell]) -> Optional[dict]:
    if cell is None:
        return None
    return {"aspect_a": cell.aspect_a, "aspect_b": cell.aspect_b, "rationale": cell.rationale}


def _scenario_to_dict(scenario: ScenarioRecord) -> dict:
    return {
        "id": scenario.id,
        "aspect_ref": scenario.aspect_ref,
        "order": scenario.order.value,
        "hazard_mode": scenario.hazard_mode.value,
        "narrative": scenario.narrative,
        "prop_enhanced": scenario.prop_enhanced,
        "pathway": _pathway_to_dict(scenario.pathway),
        "interaction": _interaction_to_dict(scenario.interaction),
        "parent_scenario": scenario.parent_scenario,
        "applied_operator": scenario.applied_operator,
        "outcomes": [_outcome_to_dict(o) for o in scenario.outcomes],
        "dimension_refs": list(scenario.dimension_refs),
        "rationale": _rationale_to_dict(scenario.rationale),
        "status": scenario.status.value,
    }


def session_to_dict(session: AssessmentSession) -> dict:
    return {
        "id": session.id,
        "system_info": _system_info_to_dict(session.system_info),
        "aml_code": session.aml.code,
        "framework_version": session.framework_version,
        "team_mode": session.team_mode.value,
        "divergence_thresholds": {
            "ll_delta": session.divergence_thresholds.ll_delta,
            "hsl_delta": session.divergence_thresholds.hsl_delta,
        },
        "scenarios": [_scenario_to_dict(s) for s in session.scenarios],
        "aspect_completion": [
            {"aspect_id": c.aspect_id, "rationale": c.rationale}
            for c in session.aspect_completion
        ],
        "state": session.state.value,
        "revision": session.revision,
    }


def document_to_dict(doc: WorkbookDocument) -> dict:
    return {
        "format_version": doc.format_version,
        "taxonomy_version": doc.taxonomy_version,
        "session": session_to_dict(doc.session),
        "emitted_outputs": list(doc.emitted_outputs),
    }


def document_bytes(doc: WorkbookDocument) -> bytes:
    text = json.dumps(document_to_dict(doc), indent=2, ensure_ascii=False) + "\n"
    return text.encode("utf-8")


# ---------------------------------------------------------------------------
# Deserialization with full validation


class _Reader:
    """Typed field access over a parsed JSON object with located errors."""

    def __init__(self, raw: Any, where: str):
        if not isinstance(raw, Mapping):
            raise WorkbookError(f"{where} must be an object")
        self.raw = raw
        self.where = where

    def req(self, key: str) -> Any:
        if key not in self.raw:
            raise WorkbookError(f"{self.where} is missing field {key!r}")
        return self.raw[key]

    def str_(self, key: str, allow_empty: bool = True) -> str:
        value = self.req(key)
        if not isinstance(value, str):
            raise WorkbookError(f"{self.where}.{key} must be a string")
        if not allow_empty and not value:
            raise WorkbookError(f"{self.where}.{key} must be non-empty")
        return value

    def opt_str(self, key: str) -> Optional[str]:
        value = self.req(key)
        if value is not None and not isinstance(value, str):
            raise WorkbookError(f"{self.where}.{key} must be a string or null")
        return value

    def int_(self, key: str) -> int:
        value = self.req(key)
        if isinstance(value, bool) or not isinstance(value, int):
            raise WorkbookError(f"{self.where}.{key} must be an integer")
        return value

    def num(self, key: str) -> float:
        value = self.req(key)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise WorkbookError(f"{self.where}.{key} must be a number")
        return value

    def bool_(self, key: str) -> bool:
        value = self.req(key)
        if not isinstance(value, bool):
            raise WorkbookError(f"{self.where}.{key} must be a boolean")
        return value

    def list_(self, key: str) -> list:
        value = self.req(key)
        if not isinstance(value, list):
            raise WorkbookError(f"{self.where}.{key} must be a list")
        return value

    def enum(self, key: str, enum_cls):
        value = self.req(key)
        try:
            return enum_cls(value)
        except ValueError:
            allowed = ", ".join(repr(e.value) for e in enum_cls)
            raise WorkbookError(
                f"{self.where}.{key} has invalid value {value!r}; expected one of {allowed}"
            ) from None


def _domain(where: str, fn, *args, **kwargs):
    """Run a domain constructor, rewrapping its own rejections as document errors."""
    try:
        return fn(*args, **kwargs)
    except WorkbookError:
        raise
    except ValueError as exc:
        raise WorkbookError(f"{where}: {exc}") from None


def _system_info_from_dict(raw: Any) -> SystemInfo:
    r = _Reader(raw, "system_info")
    raw_date = r.opt_str("assessment_date")
    if raw_date is not None:
        try:
            parsed_date: Optional[date] = date.fromisoformat(raw_date)
        except ValueError:
            raise WorkbookError(
                f"system_info.assessment_date is not an ISO date: {raw_date!r}"
            ) from None
    else:
        parsed_date = None
    members = []
    for i, m in enumerate(r.list_("team_composition")):
        mr = _Reader(m, f"team_composition[{i}]")
        members.append(TeamMember(name=mr.str_("name"), role=mr.str_("role")))
    return SystemInfo(
        assessment_date=parsed_date,
        team_composition=tuple(members),
        assessing_organization=r.str_("assessing_organization"),
        assessment_time_frame_years=r.num("assessment_time_frame_years"),
        assessment_type_code=r.str_("assessment_type_code"),
        system_name=r.str_("system_name"),
        version=r.str_("version"),
        access_level=r.str_("access_level"),
        generational_scope=r.str_("generational_scope"),
        system_level_assumptions=r.str_("system_level_assumptions"),
    )


def _estimate_from_dict(raw: Any, where: str) -> EstimateEntry:
    r = _Reader(raw, where)
    return _domain(
        where,
        EstimateEntry,
        assessor=r.str_("assessor", allow_empty=False),
        hsl=_level(r, "hsl", HarmSeverityLevel),
        ll=_level(r, "ll", LikelihoodLevel),
        round=r.enum("round", EstimateRound),
    )


def _level(r: _Reader, key: str, enum_cls):
    value = r.int_(key)
    try:
        return enum_cls(value)
    except ValueError:
        lo = min(int(e) for e in enum_cls)
        hi = max(int(e) for e in enum_cls)
        raise WorkbookError(
            f"{r.where}.{key} must be in [{lo}, {hi}], got {value}"
        ) from None


def _rationale_from_dict(raw: Any, where: str) -> Optional[Rationale]:
    if raw is None:
        return None
    r = _Reader(raw, where)
    return Rationale(
        key_assumptions=r.str_("key_assumptions"),
        evidence_quality=r.str_("evidence_quality"),
        known_uncertainties=r.str_("known_uncertainties"),
        sensitivity_notes=r.str_("sensitivity_notes"),
        operator_or_interaction_rationale=r.opt_str("operator_or_interaction_rationale"),
    )


def _outcome_from_dict(raw: Any, where: str) -> OutcomeRecord:
    r = _Reader(raw, where)
    estimates = tuple(
        _estimate_from_dict(e, f"{where}.estimates[{i}]")
        for i, e in enumerate(r.list_("estimates"))
    )
    raw_final = r.req("final")
    final = None
    if raw_final is not None:
        if (not isinstance(raw_final, list) or len(raw_final) != 2):
            raise WorkbookError(f"{where}.final must be a [severity, likelihood] pair")
        try:
            final = (HarmSeverityLevel(raw_final[0]), LikelihoodLevel(raw_final[1]))
        except ValueError as exc:
            raise WorkbookError(f"{where}.final is out of range: {exc}") from None
    return OutcomeRecord(
        description=r.str_("description"),
        estimates=estimates,
        final=final,
        flagged=r.bool_("flagged"),
    )


def _probability_from_dict(raw: Any, where: str):
    if raw is None:
        return None
    r = _Reader(raw, where)
    kind = r.str_("kind")
    if kind == "interval":
        return _domain(where, ProbabilityInterval, lo=r.num("lo"), hi=r.num("hi"))
    if kind == "level":
        return _level(r, "level", LikelihoodLevel)
    raise WorkbookError(f"{where}.kind must be 'interval' or 'level', got {kind!r}")


def _pathway_from_dict(raw: Any, where: str) -> Optional[RiskPathway]:
    if raw is None:
        return None
    r = _Reader(raw, where)
    steps = []
    for i, s in enumerate(r.list_("steps")):
        sr = _Reader(s, f"{where}.steps[{i}]")
        steps.append(_domain(
            sr.where,
            PathwayStep,
            description=sr.str_("description"),
            step_kind=sr.enum("step_kind", StepKind),
            probability=_probability_from_dict(sr.req("probability"), sr.where),
            operator_in=sr.opt_str("operator_in"),
        ))
    return RiskPathway(
        source_aspect=r.str_("source_aspect"),
        steps=tuple(steps),
        terminal_aspect=r.str_("terminal_aspect"),
        direction_built=r.enum("direction_built", PathwayDirection),
    )


def _interaction_from_dict(raw: Any, where: str) -> Optional[InteractionCell]:
    if raw is None:
        return None
    r = _Reader(raw, where)
    return _domain(
        where,
        InteractionCell,
        aspect_a=r.str_("aspect_a"),
        aspect_b=r.str_("aspect_b"),
        rationale=r.str_("rationale"),
    )


def _scenario_from_dict(raw: Any, where: str) -> ScenarioRecord:
    r = _Reader(raw, where)
    outcomes = tuple(
        _outcome_from_dict(o, f"{where}.outcomes[{i}]")
        for i, o in enumerate(r.list_("outcomes"))
    )
    dimension_refs = []
    for i, ref in enumerate(r.list_("dimension_refs")):
        if not isinstance(ref, str):
            raise WorkbookError(f"{where}.dimension_refs[{i}] must be a string")
        dimension_refs.append(ref)
    return _domain(
        where,
        ScenarioRecord,
        id=r.str_("id", allow_empty=False),
        aspect_ref=r.str_("aspect_ref", allow_empty=False),
        order=r.enum("order", ScenarioOrder),
        hazard_mode=r.enum("hazard_mode", HazardMode),
        narrative=r.str_("narrative"),
        prop_enhanced=r.bool_("prop_enhanced"),
        pathway=_pathway_from_dict(r.req("pathway"), f"{where}.pathway"),
        interaction=_interaction_from_dict(r.req("interaction"), f"{where}.interaction"),
        parent_scenario=r.opt_str("parent_scenario"),
        applied_operator=r.opt_str("applied_operator"),
        outcomes=outcomes,
        dimension_refs=tuple(dimension_refs),
        rationale=_rationale_from_dict(r.req("rationale"), f"{where}.rationale"),
        status=r.enum("status", ScenarioStatus),
    )


def session_from_dict(raw: Any) -> AssessmentSession:
    r = _Reader(raw, "session")
    thresholds_r = _Reader(r.req("divergence_thresholds"), "session.divergence_thresholds")
    scenarios = tuple(
        _scenario_from_dict(s, f"session.scenarios[{i}]")
        for i, s in enumerate(r.list_("scenarios"))
    )
    completion = []
    for i, c in enumerate(r.list_("aspect_completion")):
        cr = _Reader(c, f"session.aspect_completion[{i}]")
        completion.append(AspectCompletion(
            aspect_id=cr.str_("aspect_id", allow_empty=False),
            rationale=cr.str_("rationale"),
        ))
    revision = r.int_("revision")
    if revision < 0:
        raise WorkbookError("session.revision must be non-negative")
    return _domain(
        "session",
        AssessmentSession,
        id=r.str_("id", allow_empty=False),
        system_info=_system_info_from_dict(r.req("system_info")),
        aml=_domain("session.aml_code", aml_capabilities, r.str_("aml_code")),
        framework_version=r.str_("framework_version", allow_empty=False),
        team_mode=r.enum("team_mode", TeamMode),
        divergence_thresholds=DivergenceThresholds(
            ll_delta=thresholds_r.int_("ll_delta"),
            hsl_delta=thresholds_r.int_("hsl_delta"),
        ),
        scenarios=scenarios,
        aspect_completion=tuple(completion),
        state=r.enum("state", SessionState),
        revision=revision,
    )


def _consistency_issues(session: AssessmentSession, taxonomy: Taxonomy) -> list[str]:
    """Cross-checks that need the taxonomy: unknown refs and gating soundness."""
    issues = []
    for scenario in session.scenarios:
        if scenario.aspect_ref not in taxonomy:
            issues.append(
                f"scenario {scenario.id} references unknown aspect {scenario.aspect_ref!r}"
            )
        if scenario.interaction is not None:
            for ref in scenario.interaction.pair():
                if ref not in taxonomy:
                    issues.append(
                        f"scenario {scenario.id} interaction references "
                        f"unknown aspect {ref!r}"
                    )
        if scenario.order == ScenarioOrder.SECOND_ORDER and not session.aml.assess_second_order:
            issues.append(
                f"scenario {scenario.id} is second-order but protocol "
                f"{session.aml.code} does not include second-order assessment"
            )
        if scenario.prop_enhanced and not session.aml.assess_propagation_operators:
            issues.append(
                f"scenario {scenario.id} is propagation-enhanced but protocol "
                f"{session.aml.code} does not include propagation operators"
            )
    for completion in session.aspect_completion:
        if completion.aspect_id not in taxonomy:
            issues.append(f"completed aspect {completion.aspect_id!r} is not in the taxonomy")
    return issues


def load_workbook(
    source: Union[str, Path, bytes],
    taxonomy: Optional[Taxonomy] = None,
) -> WorkbookDocument:
    """Parse and fully validate a workbook document.

    Validation failures raise; nothing is repaired on the way in. A taxonomy
    version that differs from the document's is reported as a warning as long
    as every referenced aspect still resolves.
    """
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, Path):
        text = source.read_text("utf-8")
    elif isinstance(source, str) and source.lstrip().startswith("{"):
        text = source
    else:
        text = Path(source).read_text("utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WorkbookError(f"workbook is not valid JSON: {exc}") from None
    r = _Reader(raw, "workbook")
    version = r.str_("format_version")
    if version != FORMAT_VERSION:
        raise WorkbookError(
            f"unsupported workbook format version {version!r}; "
            f"this build reads version {FORMAT_VERSION!r}"
        )
    emitted = []
    for i, digest in enumerate(r.list_("emitted_outputs")):
        if not isinstance(digest, str):
            raise WorkbookError(f"workbook.emitted_outputs[{i}] must be a string digest")
        emitted.append(digest)
    session = session_from_dict(r.req("session"))
    taxonomy_version = r.str_("taxonomy_version")
    warnings = []
    if taxonomy is not None:
        issues = _consistency_issues(session, taxonomy)
        if issues:
            raise WorkbookError("workbook fails validation: " + "; ".join(issues))
        if taxonomy.version != taxonomy_version:
            message = (
                f"workbook was written against taxonomy {taxonomy_version!r} "
                f"but {taxonomy.version!r} is loaded; all references still resolve"
            )
            warnings.append(message)
            logger.warning(message)
    return WorkbookDocument(
        format_version=version,
        taxonomy_version=taxonomy_version,
        session=session,
        emitted_outputs=tuple(emitted),
        warnings=tuple(warnings),
    )


def save_workbook(doc: WorkbookDocument, destination: Union[str, Path]) -> int:
    """Write the canonical byte form; returns the byte count."""
    data = document_bytes(doc)
    Path(destination).write_bytes(data)
    return len(data)


# ---------------------------------------------------------------------------
# Mutation envelopes


@dataclass(frozen=True)
class MutationEnvelope:
    expected_revision: int
    command: str
    args: Mapping[str, Any]
    actor: str = ""


def _arg(args: Mapping[str, Any], key: str, where: str = "mutation args") -> Any:
    if key not in args:
        raise WorkbookError(f"{where} missing {key!r}")
    return args[key]


def _mutate_add_scenario(session, args, taxonomy):
    scenario = _scenario_from_dict(_arg(args, "scenario"), "scenario")
    return asmt.add_scenario(session, scenario, taxonomy), {"scenario_id": scenario.id}


def _mutate_record_estimate(session, args, taxonomy):
    rationale = _rationale_from_dict(_arg(args, "rationale"), "rationale")
    if rationale is None:
        raise WorkbookError("record_estimate needs a rationale object")
    updated = asmt.record_estimate(
        session,
        scenario_id=_arg(args, "scenario_id"),
        assessor=_arg(args, "assessor"),
        outcome_index=int(_arg(args, "outcome_index")),
        hsl=HarmSeverityLevel(int(_arg(args, "hsl"))),
        ll=LikelihoodLevel(int(_arg(args, "ll"))),
        rationale=rationale,
    )
    status = updated.scenario(_arg(args, "scenario_id")).status.value
    return updated, {"scenario_status": status}


def _mutate_detect_divergence(session, args, taxonomy):
    updated, flags = asmt.detect_divergence(session, _arg(args, "scenario_id"))
    payload = {
        "flags": [
            {
                "scenario_id": f.scenario_id,
                "outcome_index": f.outcome_index,
                "hsl_spread": f.hsl_spread,
                "ll_spread": f.ll_spread,
                "message": f.message,
            }
            for f in flags
        ]
    }
    return updated, payload


def _mutate_resolve_recalibration(session, args, taxonomy):
    post_entries = []
    for i, raw in enumerate(args.get("post_entries", [])):
        r = _Reader(raw, f"post_entries[{i}]")
        entry = EstimateEntry(
            assessor=r.str_("assessor", allow_empty=False),
            hsl=_level(r, "hsl", HarmSeverityLevel),
            ll=_level(r, "ll", LikelihoodLevel),
            round=EstimateRound.POST_RECALIBRATION,
        )
        post_entries.append((r.int_("outcome_index"), entry))
    scenario_id = _arg(args, "scenario_id")
    updated = asmt.resolve_recalibration(session, scenario_id, post_entries)
    finals = [
        {"outcome_index": i, "hsl": int(o.final[0]), "ll": int(o.final[1])}
        for i, o in enumerate(updated.scenario(scenario_id).outcomes)
        if o.final is not None
    ]
    return updated, {"finals": finals}


def _mutate_mark_aspect_complete(session, args, taxonomy):
    aspect_id = _arg(args, "aspect_id")
    updated = asmt.mark_aspect_complete(
        session, aspect_id, _arg(args, "rationale"), taxonomy
    )
    return updated, {"aspect_id": aspect_id}


def _mutate_finalize(session, args, taxonomy):
    updated = asmt.finalize(session, taxonomy)
    return updated, {"state": updated.state.value}


def _mutate_apply_operator(session, args, taxonomy):
    parent = session.scenario(_arg(args, "parent_id"))
    child = asmt.apply_operator(
        parent,
        operator_name=_arg(args, "operator"),
        narrative_delta=args.get("narrative_delta", ""),
        new_id=args.get("new_id"),
    )
    return asmt.add_scenario(session, child, taxonomy), {"scenario_id": child.id}


_COMMANDS = {
    "add_scenario": _mutate_add_scenario,
    "record_estimate": _mutate_record_estimate,
    "detect_divergence": _mutate_detect_divergence,
    "resolve_recalibration": _mutate_resolve_recalibration,
    "mark_aspect_complete": _mutate_mark_aspect_complete,
    "finalize": _mutate_finalize,
    "apply_operator": _mutate_apply_operator,
}


def mutation_commands() -> list[str]:
    return sorted(_COMMANDS)


def apply_mutation(
    session: AssessmentSession,
    envelope: MutationEnvelope,
    taxonomy: Taxonomy,
) -> tuple[AssessmentSession, dict]:
    """Apply one command if the envelope's revision matches the session's."""
    if envelope.expected_revision != session.revision:
        raise RevisionConflict(session.revision)
    handler = _COMMANDS.get(envelope.command)
    if handler is None:
        known = ", ".join(mutation_commands())
        raise WorkbookError(
            f"unknown mutation command {envelope.command!r}; known commands: {known}"
        )
    updated, payload = handler(session, envelope.args, taxonomy)
    payload["revision"] = updated.revision
    return updated, payload


# ---------------------------------------------------------------------------
# Directory-backed session store


_SESSION_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


class SessionStore:
    """One workbook file per session, with atomic writes and guarded mutations."""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def path_for(self, session_id: str) -> Path:
        if not _SESSION_ID_RE.match(session_id):
            raise WorkbookError(f"invalid session id: {session_id!r}")
        return self.root / f"{session_id}.workbook.json"

    def exists(self, session_id: str) -> bool:
        return self.path_for(session_id).exists()

    def list_ids(self) -> list[str]:
        return sorted(
            p.name[: -len(".workbook.json")]
            for p in self.root.glob("*.workbook.json")
        )

    def create(self, doc: WorkbookDocument) -> None:
        with self._lock:
            path = self.path_for(doc.session.id)
            if path.exists():
                raise WorkbookError(f"session {doc.session.id} already exists")
            self._write(path, doc)

    def get(self, session_id: str, taxonomy: Optional[Taxonomy] = None) -> WorkbookDocument:
        path = self.path_for(session_id)
        if not path.exists():
            raise KeyError(session_id)
        return load_workbook(path, taxonomy)

    def mutate(
        self,
        session_id: str,
        envelope: MutationEnvelope,
        taxonomy: Taxonomy,
    ) -> tuple[WorkbookDocument, dict]:
        """Load, apply, persist. A rejected mutation leaves the file untouched."""
        with self._lock:
            doc = self.get(session_id)
            updated_session, payload = apply_mutation(doc.session, envelope, taxonomy)
            updated = replace(doc, session=updated_session)
            self._write(self.path_for(session_id), updated)
            return updated, payload

    def record_output(self, session_id: str, digest: str) -> WorkbookDocument:
        with self._lock:
            doc = self.get(session_id)
            if digest not in doc.emitted_outputs:
                doc = replace(doc, emitted_outputs=doc.emitted_outputs + (digest,))
                self._write(self.path_for(session_id), doc)
            return doc

    def _write(self, path: Path, doc: WorkbookDocument) -> None:
        data = document_bytes(doc)
        fd, tmp = tempfile.mkstemp(dir=str(self.root), suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def bundled_example_workbook() -> WorkbookDocument:
    """A small mid-assessment workbook shipped with the package."""
    from importlib import resources

    data = resources.files("pra_workbench.data").joinpath(
        "example-workbook.json"
    ).read_bytes()
    return load_workbook(data)
