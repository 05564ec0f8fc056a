"""Aggregated views of a finalized assessment: report card, tally, output log.

The report card rolls scenario outcomes up to aspect-group rows and four
assessment-type columns, taking the maximum risk level in each cell so a
cell never understates its worst credible finding. Cells with no completed
outcome stay unassessed, which is deliberately distinct from risk level 0.
"""
from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass
from datetime import datetime
from typing import Optional

from .assessment import (
    AssessmentSession,
    ScenarioOrder,
    ScenarioRecord,
    ScenarioStatus,
    SessionState,
)
from .calculus import RiskLevel, risk_level
from .taxonomy import Taxonomy, TaxonomyLevel


class ReportingError(ValueError):
    pass


class AssessmentTypeColumn(enum.Enum):
    FIRST_ORDER = "first_order"
    FIRST_ORDER_PROP = "first_order_prop"
    SECOND_ORDER = "second_order"
    SECOND_ORDER_PROP = "second_order_prop"


COLUMN_LABELS = {
    AssessmentTypeColumn.FIRST_ORDER: "First Order",
    AssessmentTypeColumn.FIRST_ORDER_PROP: "First Order (Propagated)",
    AssessmentTypeColumn.SECOND_ORDER: "Second Order",
    AssessmentTypeColumn.SECOND_ORDER_PROP: "Second Order (Propagated)",
}

COLUMN_ORDER = (
    AssessmentTypeColumn.FIRST_ORDER,
    AssessmentTypeColumn.FIRST_ORDER_PROP,
    AssessmentTypeColumn.SECOND_ORDER,
    AssessmentTypeColumn.SECOND_ORDER_PROP,
)


def column_for(scenario: ScenarioRecord) -> AssessmentTypeColumn:
    if scenario.order == ScenarioOrder.FIRST_ORDER:
        return (AssessmentTypeColumn.FIRST_ORDER_PROP if scenario.prop_enhanced
                else AssessmentTypeColumn.FIRST_ORDER)
    return (AssessmentTypeColumn.SECOND_ORDER_PROP if scenario.prop_enhanced
            else AssessmentTypeColumn.SECOND_ORDER)


@dataclass(frozen=True)
class FocusedDimension:
    id: str
    label: str
    definition: str = ""


@dataclass(frozen=True)
class FocusedScheme:
    """Named set of cross-cutting dimensions scenarios can point at."""

    name: str
    dimensions: tuple[FocusedDimension, ...]

    def __post_init__(self) -> None:
        if len(self.dimensions) < 2:
            raise ReportingError("a focused scheme needs at least two dimensions")
        ids = [d.id for d in self.dimensions]
        if len(set(ids)) != len(ids):
            raise ReportingError("focused scheme dimension ids must be distinct")

    def ids(self) -> list[str]:
        return [d.id for d in self.dimensions]


DEFAULT_SCHEME = FocusedScheme(
    name="default",
    dimensions=(
        FocusedDimension(
            "social-fabric-erosion", "Social Fabric Erosion",
            "Breakdown of social connections, trust, and cohesion within "
            "communities and society."),
        FocusedDimension(
            "economic-system-unraveling", "Economic System Unraveling",
            "Failure of existing financial structures, economic institutions "
            "and processes."),
        FocusedDimension(
            "critical-infrastructure-failure", "Critical Infrastructure Failure",
            "Breakdown (or compromise) of essential systems and services that "
            "support societal functioning."),
        FocusedDimension(
            "governance-breakdown", "Governance Breakdown",
            "Deterioration or collapse of political and administrative structures."),
        FocusedDimension(
            "environmental-breakdown", "Environmental Breakdown",
            "Degradation of natural systems and ecosystems."),
        FocusedDimension(
            "public-health-disintegration", "Public Health Disintegration",
            "Widespread collapse of healthcare systems and overall population health."),
    ),
)


@dataclass(frozen=True)
class ReportCard:
    context: dict
    row_order: tuple[str, ...]
    row_labels: dict
    cells: dict
    total_max: Optional[RiskLevel]
    scheme_name: str
    focused: dict
    radar: tuple

    def cell(self, group_id: str, column: AssessmentTypeColumn) -> Optional[RiskLevel]:
        return self.cells[(group_id, column)]


def _completed_finals(session: AssessmentSession):
    for scenario in session.scenarios:
        if scenario.status != ScenarioStatus.COMPLETE:
            continue
        for outcome in scenario.outcomes:
            if outcome.final is None:
                raise ReportingError(
                    f"complete scenario {scenario.id} has an outcome without a final estimate"
                )
            yield scenario, outcome.final


def report_card(
    session: AssessmentSession,
    taxonomy: Taxonomy,
    scheme: FocusedScheme = DEFAULT_SCHEME,
) -> ReportCard:
    """Aggregate completed outcomes into the group-by-type risk grid."""
    groups = taxonomy.at_level(TaxonomyLevel.TL1)
    cells: dict = {(g.id, col): None for g in groups for col in COLUMN_ORDER}
    for scenario, (hsl, ll) in _completed_finals(session):
        group = taxonomy.ancestor_at(scenario.aspect_ref, TaxonomyLevel.TL1)
        column = column_for(scenario)
        value = risk_level(hsl, ll)
        key = (group.id, column)
        current = cells[key]
        if current is None or value > current:
            cells[key] = value
    assessed = [v for v in cells.values() if v is not None]
    total_max = max(assessed) if assessed else None
    focused = focused_aggregation(session, scheme)
    radar = tuple(
        (dim.label, int(focused[dim.id]) if focused[dim.id] is not None else None)
        for dim in scheme.dimensions
    )
    info = session.system_info
    context = {
        "session_id": session.id,
        "system_name": info.system_name,
        "system_version": info.version,
        "assessing_organization": info.assessing_organization,
        "assessment_date": info.assessment_date.isoformat() if info.assessment_date else "",
        "assessment_type_code": info.assessment_type_code,
        "framework_version": session.framework_version,
        "time_frame_years": info.assessment_time_frame_years,
        "session_state": session.state.value,
    }
    return ReportCard(
        context=context,
        row_order=tuple(g.id for g in groups),
        row_labels={g.id: g.label for g in groups},
        cells=cells,
        total_max=total_max,
        scheme_name=scheme.name,
        focused=focused,
        radar=radar,
    )


def focused_aggregation(
    session: AssessmentSession,
    scheme: FocusedScheme = DEFAULT_SCHEME,
) -> dict:
    """Maximum risk level per focused dimension over completed outcomes."""
    values: dict = {dim_id: None for dim_id in scheme.ids()}
    for scenario, (hsl, ll) in _completed_finals(session):
        if not scenario.dimension_refs:
            continue
        value = risk_level(hsl, ll)
        for ref in scenario.dimension_refs:
            if ref not in values:
                raise ReportingError(
                    f"scenario {scenario.id} references dimension {ref!r} which is "
                    f"not part of scheme {scheme.name!r}"
                )
            if values[ref] is None or value > values[ref]:
                values[ref] = value
    return values


@dataclass(frozen=True)
class TalliedRiskMatrix:
    """Count of final outcome estimates in each likelihood-severity cell."""

    counts: tuple

    def count(self, ll: int, hsl: int) -> int:
        return self.counts[ll][hsl - 1]

    def total(self) -> int:
        return sum(sum(row) for row in self.counts)


def tallied_matrix(session: AssessmentSession) -> TalliedRiskMatrix:
    grid = [[0] * 6 for _ in range(9)]
    for _, (hsl, ll) in _completed_finals(session):
        grid[int(ll)][int(hsl) - 1] += 1
    return TalliedRiskMatrix(counts=tuple(tuple(row) for row in grid))


@dataclass(frozen=True)
class OutputLog:
    """Immutable, digest-sealed record of a finalized session."""

    completed_at: datetime
    framework_version: str
    snapshot: dict
    content_digest: str


def _digest_payload(completed_at: datetime, snapshot: dict) -> str:
    body = canonical_json({"completed_at": completed_at.isoformat(), "snapshot": snapshot})
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


def emit_output_log(session: AssessmentSession, completed_at: datetime) -> OutputLog:
    """Seal a finalized session into a timestamped, content-addressed record."""
    from .workbook import session_to_dict

    if session.state != SessionState.FINALIZED:
        raise ReportingError("output logs are only emitted for finalized sessions")
    snapshot = session_to_dict(session)
    return OutputLog(
        completed_at=completed_at,
        framework_version=session.framework_version,
        snapshot=snapshot,
        content_digest=_digest_payload(completed_at, snapshot),
    )


def verify_output_log(log: OutputLog) -> bool:
    """True when the digest still matches the logged content."""
    return log.content_digest == _digest_payload(log.completed_at, log.snapshot)


def output_log_to_dict(log: OutputLog) -> dict:
    return {
        "completed_at": log.completed_at.isoformat(),
        "framework_version": log.framework_version,
        "snapshot": log.snapshot,
        "content_digest": log.content_digest,
    }


def canonical_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=False) + "\n"


class ChangeKind(enum.Enum):
    VALUE_CHANGED = "value_changed"
    NEWLY_ASSESSED = "newly_assessed"
    NO_LONGER_ASSESSED = "no_longer_assessed"


@dataclass(frozen=True)
class CellChange:
    row: str
    column: str
    before: Optional[int]
    after: Optional[int]
    kind: ChangeKind
    delta: Optional[int] = None


@dataclass(frozen=True)
class ReportCardDiff:
    cell_changes: tuple
    focused_changes: tuple
    total_max_before: Optional[int]
    total_max_after: Optional[int]

    def is_empty(self) -> bool:
        return not self.cell_changes and not self.focused_changes and (
            self.total_max_before == self.total_max_after
        )


def diff_report_cards(a: ReportCard, b: ReportCard) -> ReportCardDiff:
    """Cell-level changes between two cards of identical shape."""
    if a.row_order != b.row_order:
        raise ReportingError("report cards cover different aspect-group rows")
    if a.scheme_name != b.scheme_name or list(a.focused) != list(b.focused):
        raise ReportingError("report cards use different focused schemes")
    cell_changes = []
    for row in a.row_order:
        for column in COLUMN_ORDER:
            before = a.cells[(row, column)]
            after = b.cells[(row, column)]
            change = _build_change(row, column.value, before, after)
            if change:
                cell_changes.append(change)
    focused_changes = []
    for dim_id in a.focused:
        change = _build_change(dim_id, "focused", a.focused[dim_id], b.focused[dim_id])
        if change:
            focused_changes.append(change)
    return ReportCardDiff(
        cell_changes=tuple(cell_changes),
        focused_changes=tuple(focused_changes),
        total_max_before=int(a.total_max) if a.total_max is not None else None,
        total_max_after=int(b.total_max) if b.total_max is not None else None,
    )


def _build_change(
    row: str, column: str, before: Optional[RiskLevel], after: Optional[RiskLevel]
) -> Optional[CellChange]:
    before_i = int(before) if before is not None else None
    after_i = int(after) if after is not None else None
    if before_i == after_i:
        return None
    if before_i is None:
        kind = ChangeKind.NEWLY_ASSESSED
        delta = None
    elif after_i is None:
        kind = ChangeKind.NO_LONGER_ASSESSED
        delta = None
    else:
        kind = ChangeKind.VALUE_CHANGED
        delta = after_i - before_i
    return CellChange(row=row, column=column, before=before_i, after=after_i,
                      kind=kind, delta=delta)


class ReportFormat(enum.Enum):
    MARKDOWN = "md"
    DELIMITED = "table"
    STRUCTURED = "structured"


DISCLAIMER = (
    "DISCLAIMER: This report records semi-quantitative judgments made by the "
    "named assessors under the stated assumptions and time frame. Risk levels "
    "are screening values for prioritization, not measurements; they inherit "
    "the coarseness of the likelihood bands, the severity anchors, and the "
    "assessors' calibration. A low or unassessed cell is not evidence of "
    "safety. Results are not comparable across systems assessed under "
    "different protocols or assumptions, and should be read together with the "
    "scenario narratives, rationales, and the sealed output log."
)

UNASSESSED_MARK = "n/a"


def report_card_to_dict(card: ReportCard) -> dict:
    return {
        "context": dict(card.context),
        "rows": list(card.row_order),
        "row_labels": dict(card.row_labels),
        "columns": [c.value for c in COLUMN_ORDER],
        "cells": {
            row: {
                col.value: (int(card.cells[(row, col)])
                            if card.cells[(row, col)] is not None else None)
                for col in COLUMN_ORDER
            }
            for row in card.row_order
        },
        "total_max": int(card.total_max) if card.total_max is not None else None,
        "scheme": card.scheme_name,
        "focused": {
            k: (int(v) if v is not None else None) for k, v in card.focused.items()
        },
        "radar": [[label, value] for label, value in card.radar],
    }


def report_card_from_dict(doc: dict) -> ReportCard:
    cells = {}
    for row in doc["rows"]:
        for col in COLUMN_ORDER:
            raw = doc["cells"][row][col.value]
            cells[(row, col)] = RiskLevel(raw) if raw is not None else None
    return ReportCard(
        context=dict(doc["context"]),
        row_order=tuple(doc["rows"]),
        row_labels=dict(doc["row_labels"]),
        cells=cells,
        total_max=RiskLevel(doc["total_max"]) if doc["total_max"] is not None else None,
        scheme_name=doc["scheme"],
        focused={
            k: (RiskLevel(v) if v is not None else None)
            for k, v in doc["focused"].items()
        },
        radar=tuple((label, value) for label, value in doc["radar"]),
    )


def tallied_matrix_to_dict(matrix: TalliedRiskMatrix) -> dict:
    return {"counts": [list(row) for row in matrix.counts], "total": matrix.total()}


def _cell_text(value: Optional[RiskLevel]) -> str:
    return UNASSESSED_MARK if value is None else str(int(value))


def render_report(
    card: ReportCard,
    matrix: TalliedRiskMatrix,
    fmt: ReportFormat = ReportFormat.MARKDOWN,
) -> str:
    if fmt == ReportFormat.STRUCTURED:
        return canonical_json({
            "report_card": report_card_to_dict(card),
            "tallied_matrix": tallied_matrix_to_dict(matrix),
            "disclaimer": DISCLAIMER,
        })
    if fmt == ReportFormat.DELIMITED:
        return _render_delimited(card, matrix)
    return _render_markdown(card, matrix)


def _render_markdown(card: ReportCard, matrix: TalliedRiskMatrix) -> str:
    lines = []
    ctx = card.context
    lines.append(f"# Risk Report Card: {ctx['system_name']} {ctx['system_version']}".rstrip())
    lines.append("")
    lines.append(f"- Assessing organization: {ctx['assessing_organization']}")
    lines.append(f"- Assessment date: {ctx['assessment_date']}")
    lines.append(f"- Assessment type code: {ctx['assessment_type_code']}")
    lines.append(f"- Time frame: {ctx['time_frame_years']} year(s)")
    lines.append(f"- Session: {ctx['session_id']} ({ctx['session_state']})")
    lines.append("")
    lines.append("## Report Card")
    lines.append("")
    header = ["Aspect Group"] + [COLUMN_LABELS[c] for c in COLUMN_ORDER]
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "---|" * len(header))
    for row in card.row_order:
        cells = [_cell_text(card.cells[(row, col)]) for col in COLUMN_ORDER]
        lines.append("| " + " | ".join([card.row_labels[row]] + cells) + " |")
    lines.append("")
    total = _cell_text(card.total_max)
    lines.append(f"Total maximum risk level: {total}")
    lines.append("")
    lines.append("## Focused Aggregation")
    lines.append("")
    lines.append(f"Scheme: {card.scheme_name}")
    lines.append("")
    for label, value in card.radar:
        shown = UNASSESSED_MARK if value is None else str(value)
        lines.append(f"- {label}: {shown}")
    lines.append("")
    lines.append("## Tallied Risk Matrix")
    lines.append("")
    lines.append("| | HSL-1 | HSL-2 | HSL-3 | HSL-4 | HSL-5 | HSL-6 |")
    lines.append("|---|---|---|---|---|---|---|")
    for ll in range(8, -1, -1):
        row = [str(matrix.counts[ll][h]) for h in range(6)]
        lines.append(f"| LL-{ll} | " + " | ".join(row) + " |")
    lines.append("")
    lines.append(f"Tallied outcomes: {matrix.total()}")
    lines.append("")
    lines.append("## Disclaimer")
    lines.append("")
    lines.append(DISCLAIMER)
    lines.append("")
    return "\n".join(lines)


def _render_delimited(card: ReportCard, matrix: TalliedRiskMatrix) -> str:
    lines = []
    for key in ("system_name", "system_version", "assessing_organization",
                "assessment_date", "assessment_type_code", "session_id"):
        lines.append(f"context\t{key}\t{card.context[key]}")
    header = ["report_card", "aspect_group"] + [c.value for c in COLUMN_ORDER]
    lines.append("\t".join(header))
    for row in card.row_order:
        cells = [_cell_text(card.cells[(row, col)]) for col in COLUMN_ORDER]
        lines.append("\t".join(["report_card", row] + cells))
    lines.append(f"total_max\t{_cell_text(card.total_max)}")
    for dim_id, value in card.focused.items():
        lines.append(f"focused\t{dim_id}\t{_cell_text(value)}")
    lines.append("tally\tll" + "".join(f"\thsl{h}" for h in range(1, 7)))
    for ll in range(8, -1, -1):
        row = "\t".join(str(matrix.counts[ll][h]) for h in range(6))
        lines.append(f"tally\t{ll}\t{row}")
    lines.append(f"disclaimer\t{DISCLAIMER}")
    return "\n".join(lines) + "\n"
