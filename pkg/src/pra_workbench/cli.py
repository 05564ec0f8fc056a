"""Command line workbench driver.

Commands operate on a single workbook file. Relative workbook paths resolve
under PRA_WORKBOOK_DIR when that is set, so assessors can keep one directory
of workbooks and address them by name.
"""
from __future__ import annotations

import functools
import os
import sys
from dataclasses import replace
from datetime import date, datetime
from pathlib import Path
from typing import Optional

import click

from . import assessment as asmt
from .assessment import (
    AssessmentError,
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
)
from .calculus import HarmSeverityLevel, LikelihoodLevel
from .pathway import InteractionCell, PathwayError
from .reporting import (
    DEFAULT_SCHEME,
    FocusedDimension,
    FocusedScheme,
    ReportFormat,
    ReportingError,
    diff_report_cards,
    emit_output_log,
    output_log_to_dict,
    render_report,
    report_card,
    tallied_matrix,
)
from .service import WORKBOOK_DIR_ENV, create_app
from .taxonomy import (
    HazardMode,
    Taxonomy,
    TaxonomyError,
    bundled_rubrics,
    bundled_taxonomy,
    load_rubrics,
    load_taxonomy,
    slugify,
)
from .workbook import (
    FORMAT_VERSION,
    RevisionConflict,
    WorkbookDocument,
    WorkbookError,
    _pathway_from_dict,
    load_workbook,
    save_workbook,
)

_DOMAIN_ERRORS = (
    AssessmentError,
    WorkbookError,
    TaxonomyError,
    PathwayError,
    ReportingError,
    RevisionConflict,
)


def _guarded(fn):
    """Print one machine-parsable error line and exit nonzero on rejection."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except _DOMAIN_ERRORS as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _resolve_workbook(path: str) -> Path:
    p = Path(path)
    if p.is_absolute():
        return p
    root = os.environ.get(WORKBOOK_DIR_ENV)
    return (Path(root) / p) if root else p


def _taxonomy_from(path: Optional[str]) -> Taxonomy:
    return load_taxonomy(Path(path)) if path else bundled_taxonomy()


def _load_doc(workbook: str, taxonomy: Taxonomy) -> tuple[WorkbookDocument, Path]:
    path = _resolve_workbook(workbook)
    if not path.exists():
        raise WorkbookError(f"no workbook at {path}")
    return load_workbook(path, taxonomy), path


def _write_doc(doc: WorkbookDocument, path: Path) -> None:
    save_workbook(doc, path)


workbook_option = click.option(
    "--workbook", required=True, help="Workbook file (relative paths resolve "
    f"under ${WORKBOOK_DIR_ENV} when set).")
taxonomy_option = click.option(
    "--taxonomy", default=None, help="Custom taxonomy document; defaults to the "
    "bundled dataset.")


@click.group()
def main() -> None:
    """Assessor workbench for probabilistic risk assessment of AI systems."""


@main.command()
@workbook_option
@taxonomy_option
@click.option("--session-id", default=None, help="Defaults to a slug of the system name.")
@click.option("--aml", required=True, help="Assessment maturity level code, e.g. AML-120.")
@click.option("--framework-version", default="v0.9.1-alpha", show_default=True)
@click.option("--team/--single", "team", default=False,
              help="Team sessions need two or more assessors.")
@click.option("--assessor", "assessors", multiple=True, required=True,
              help="Assessor as 'Name' or 'Name:Role'; repeatable.")
@click.option("--organization", required=True)
@click.option("--date", "assessment_date", required=True, help="ISO date of the assessment.")
@click.option("--time-frame-years", type=float, required=True)
@click.option("--system-name", required=True)
@click.option("--system-version", required=True)
@click.option("--access-level", required=True)
@click.option("--generational-scope", required=True)
@click.option("--assumptions", required=True, help="System-level assumptions.")
@click.option("--ll-delta", type=int, default=2, show_default=True,
              help="Likelihood spread that flags divergence.")
@click.option("--hsl-delta", type=int, default=1, show_default=True,
              help="Severity spread that flags divergence.")
@_guarded
def init(workbook, taxonomy, session_id, aml, framework_version, team, assessors,
         organization, assessment_date, time_frame_years, system_name, system_version,
         access_level, generational_scope, assumptions, ll_delta, hsl_delta) -> None:
    """Create a workbook with a freshly configured session."""
    tax = _taxonomy_from(taxonomy)
    path = _resolve_workbook(workbook)
    if path.exists():
        raise WorkbookError(f"workbook already exists at {path}")
    members = []
    for raw in assessors:
        name, _, role = raw.partition(":")
        members.append(TeamMember(name=name.strip(), role=role.strip()))
    try:
        parsed_date = date.fromisoformat(assessment_date)
    except ValueError:
        raise WorkbookError(f"--date must be an ISO date, got {assessment_date!r}") from None
    info = SystemInfo(
        assessment_date=parsed_date,
        team_composition=tuple(members),
        assessing_organization=organization,
        assessment_time_frame_years=time_frame_years,
        system_name=system_name,
        version=system_version,
        access_level=access_level,
        generational_scope=generational_scope,
        system_level_assumptions=assumptions,
    )
    session = asmt.create_session(
        session_id=session_id or slugify(system_name),
        system_info=info,
        aml_code=aml,
        framework_version=framework_version,
        team_mode=TeamMode.TEAM if team else TeamMode.SINGLE,
        divergence_thresholds=DivergenceThresholds(ll_delta=ll_delta, hsl_delta=hsl_delta),
    )
    doc = WorkbookDocument(
        format_version=FORMAT_VERSION,
        taxonomy_version=tax.version,
        session=session,
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    _write_doc(doc, path)
    click.echo(f"created session {session.id} "
               f"({session.system_info.assessment_type_code}) at revision 0")


@main.command()
@workbook_option
@taxonomy_option
@_guarded
def validate(workbook, taxonomy) -> None:
    """Check a workbook against the format and the taxonomy."""
    doc, _ = _load_doc(workbook, _taxonomy_from(taxonomy))
    for warning in doc.warnings:
        click.echo(f"warning: {warning}", err=True)
    click.echo(f"workbook ok: session {doc.session.id} "
               f"state={doc.session.state.value} revision={doc.session.revision}")


@main.command()
@workbook_option
@taxonomy_option
@_guarded
def aspects(workbook, taxonomy) -> None:
    """List working-level aspects still awaiting completion."""
    tax = _taxonomy_from(taxonomy)
    doc, _ = _load_doc(workbook, tax)
    pending = asmt.next_aspects(doc.session, tax)
    for aspect_id in pending:
        click.echo(f"{aspect_id}\t{tax.node(aspect_id).label}")
    done = len(doc.session.aspect_completion)
    click.echo(f"pending: {len(pending)}  complete: {done}")


@main.group()
def scenario() -> None:
    """Add, derive, and list hazard scenarios."""


@scenario.command("add")
@workbook_option
@taxonomy_option
@click.option("--id", "scenario_id", default=None, help="Defaults to s-001, s-002, ...")
@click.option("--aspect", required=True, help="Taxonomy id of the assessed aspect.")
@click.option("--mode", type=click.Choice([m.value for m in HazardMode]),
              default=HazardMode.COMBINED.value, show_default=True)
@click.option("--order", type=click.Choice(["first", "second"]), default="first",
              show_default=True)
@click.option("--narrative", required=True)
@click.option("--outcome", "outcomes", multiple=True, required=True,
              help="Outcome description; repeatable.")
@click.option("--dimension", "dimensions", multiple=True,
              help="Focused dimension id this scenario bears on; repeatable.")
@click.option("--interaction", default=None,
              help="Two aspect ids joined by a comma (second order only).")
@click.option("--interaction-rationale", default="")
@click.option("--pathway-json", default=None, type=click.Path(exists=True),
              help="JSON file holding a pathway in workbook schema.")
@_guarded
def scenario_add(workbook, taxonomy, scenario_id, aspect, mode, order, narrative,
                 outcomes, dimensions, interaction, interaction_rationale,
                 pathway_json) -> None:
    """Record a new draft scenario, subject to the session's protocol."""
    tax = _taxonomy_from(taxonomy)
    doc, path = _load_doc(workbook, tax)
    cell = None
    if interaction:
        parts = [p.strip() for p in interaction.split(",")]
        if len(parts) != 2:
            raise AssessmentError("--interaction needs exactly two aspect ids")
        cell = InteractionCell(parts[0], parts[1], interaction_rationale)
    pathway = None
    if pathway_json:
        import json as _json

        raw = _json.loads(Path(pathway_json).read_text("utf-8"))
        pathway = _pathway_from_dict(raw, "pathway")
    record = ScenarioRecord(
        id=scenario_id or f"s-{len(doc.session.scenarios) + 1:03d}",
        aspect_ref=aspect,
        order=ScenarioOrder.SECOND_ORDER if order == "second" else ScenarioOrder.FIRST_ORDER,
        hazard_mode=HazardMode(mode),
        narrative=narrative,
        outcomes=tuple(OutcomeRecord(description=o) for o in outcomes),
        interaction=cell,
        dimension_refs=tuple(dimensions),
        pathway=pathway,
    )
    session = asmt.add_scenario(doc.session, record, tax)
    _write_doc(replace(doc, session=session), path)
    click.echo(f"added scenario {record.id} at revision {session.revision}")


@scenario.command("derive")
@workbook_option
@taxonomy_option
@click.option("--parent", required=True, help="Scenario id to derive from.")
@click.option("--operator", required=True, help="Propagation operator name.")
@click.option("--delta", default="", help="Narrative describing the propagation.")
@click.option("--id", "new_id", default=None)
@_guarded
def scenario_derive(workbook, taxonomy, parent, operator, delta, new_id) -> None:
    """Derive a propagation-enhanced child scenario awaiting new estimates."""
    tax = _taxonomy_from(taxonomy)
    doc, path = _load_doc(workbook, tax)
    child = asmt.apply_operator(doc.session.scenario(parent), operator, delta, new_id)
    session = asmt.add_scenario(doc.session, child, tax)
    _write_doc(replace(doc, session=session), path)
    click.echo(f"derived scenario {child.id} from {parent} via {child.applied_operator}")


@scenario.command("list")
@workbook_option
@taxonomy_option
@_guarded
def scenario_list(workbook, taxonomy) -> None:
    doc, _ = _load_doc(workbook, _taxonomy_from(taxonomy))
    for s in doc.session.scenarios:
        shape = s.order.value + ("+prop" if s.prop_enhanced else "")
        click.echo(f"{s.id}\t{s.aspect_ref}\t{shape}\t{s.status.value}"
                   f"\toutcomes={len(s.outcomes)}")
    click.echo(f"total: {len(doc.session.scenarios)}")


@main.command()
@workbook_option
@taxonomy_option
@click.option("--scenario", "scenario_id", required=True)
@click.option("--assessor", required=True)
@click.option("--outcome", type=int, default=0, show_default=True,
              help="Outcome index within the scenario.")
@click.option("--hsl", type=int, required=True, help="Harm severity level, 1-6.")
@click.option("--ll", type=int, required=True, help="Likelihood level, 0-8.")
@click.option("--assumptions", required=True, help="Key assumptions behind the estimate.")
@click.option("--evidence", required=True, help="Evidence quality notes.")
@click.option("--uncertainties", required=True, help="Known uncertainties.")
@click.option("--sensitivity", default="")
@click.option("--op-rationale", default=None,
              help="Operator or interaction rationale, when applicable.")
@_guarded
def estimate(workbook, taxonomy, scenario_id, assessor, outcome, hsl, ll,
             assumptions, evidence, uncertainties, sensitivity, op_rationale) -> None:
    """Record one assessor's initial severity and likelihood estimate."""
    tax = _taxonomy_from(taxonomy)
    doc, path = _load_doc(workbook, tax)
    try:
        hsl_level = HarmSeverityLevel(hsl)
        ll_level = LikelihoodLevel(ll)
    except ValueError as exc:
        raise AssessmentError(str(exc)) from None
    session = asmt.record_estimate(
        doc.session,
        scenario_id=scenario_id,
        assessor=assessor,
        outcome_index=outcome,
        hsl=hsl_level,
        ll=ll_level,
        rationale=Rationale(
            key_assumptions=assumptions,
            evidence_quality=evidence,
            known_uncertainties=uncertainties,
            sensitivity_notes=sensitivity,
            operator_or_interaction_rationale=op_rationale,
        ),
    )
    status = session.scenario(scenario_id).status.value
    click.echo(f"recorded estimate for {scenario_id} outcome {outcome}; "
               f"scenario is {status}")
    _write_doc(replace(doc, session=session), path)


def _parse_post_entry(raw: str) -> tuple[int, EstimateEntry]:
    """Parse 'OUTCOME:ASSESSOR=HSL,LL' into a recalibration entry."""
    try:
        index_part, rest = raw.split(":", 1)
        assessor, levels = rest.rsplit("=", 1)
        hsl_part, ll_part = levels.split(",", 1)
        return (
            int(index_part),
            EstimateEntry(
                assessor=assessor.strip(),
                hsl=HarmSeverityLevel(int(hsl_part)),
                ll=LikelihoodLevel(int(ll_part)),
                round=EstimateRound.POST_RECALIBRATION,
            ),
        )
    except (ValueError, IndexError):
        raise AssessmentError(
            f"--post must look like OUTCOME:ASSESSOR=HSL,LL, got {raw!r}"
        ) from None


@main.command()
@workbook_option
@taxonomy_option
@click.option("--scenario", "scenario_id", required=True)
@click.option("--post", "post_entries", multiple=True,
              help="Post-recalibration entry as OUTCOME:ASSESSOR=HSL,LL; repeatable.")
@_guarded
def recalibrate(workbook, taxonomy, scenario_id, post_entries) -> None:
    """Run divergence detection, then settle final estimates for a scenario."""
    tax = _taxonomy_from(taxonomy)
    doc, path = _load_doc(workbook, tax)
    session = doc.session
    if session.scenario(scenario_id).status == ScenarioStatus.ESTIMATED:
        session, flags = asmt.detect_divergence(session, scenario_id)
        for flag in flags:
            click.echo(f"divergence: {flag.message}")
    parsed = [_parse_post_entry(raw) for raw in post_entries]
    session = asmt.resolve_recalibration(session, scenario_id, parsed)
    _write_doc(replace(doc, session=session), path)
    for i, outcome in enumerate(session.scenario(scenario_id).outcomes):
        assert outcome.final is not None
        hsl_final, ll_final = outcome.final
        click.echo(f"outcome {i} final: HSL-{int(hsl_final)} LL-{int(ll_final)}")
    click.echo(f"scenario {scenario_id} complete at revision {session.revision}")


@main.command("complete-aspect")
@workbook_option
@taxonomy_option
@click.option("--aspect", required=True, help="Working-level aspect id.")
@click.option("--rationale", required=True)
@_guarded
def complete_aspect(workbook, taxonomy, aspect, rationale) -> None:
    """Mark an aspect reviewed, with the reasoning that closes it out."""
    tax = _taxonomy_from(taxonomy)
    doc, path = _load_doc(workbook, tax)
    session = asmt.mark_aspect_complete(doc.session, aspect, rationale, tax)
    _write_doc(replace(doc, session=session), path)
    remaining = len(asmt.next_aspects(session, tax))
    click.echo(f"aspect {aspect} complete; {remaining} remaining")


@main.command()
@workbook_option
@taxonomy_option
@_guarded
def finalize(workbook, taxonomy) -> None:
    """Freeze the session once every aspect and scenario is settled."""
    tax = _taxonomy_from(taxonomy)
    doc, path = _load_doc(workbook, tax)
    session = asmt.finalize(doc.session, tax)
    _write_doc(replace(doc, session=session), path)
    click.echo(f"session {session.id} finalized at revision {session.revision}")


def _scheme_from(path: Optional[str]) -> FocusedScheme:
    if not path:
        return DEFAULT_SCHEME
    import json as _json

    raw = _json.loads(Path(path).read_text("utf-8"))
    dims = tuple(
        FocusedDimension(
            id=d["id"], label=d.get("label", d["id"]), definition=d.get("definition", "")
        )
        for d in raw["dimensions"]
    )
    return FocusedScheme(name=raw.get("name", Path(path).stem), dimensions=dims)


@main.command()
@workbook_option
@taxonomy_option
@click.option("--format", "fmt", type=click.Choice([f.value for f in ReportFormat]),
              default=ReportFormat.MARKDOWN.value, show_default=True)
@click.option("--scheme", default=None, type=click.Path(exists=True),
              help="Custom focused scheme JSON.")
@click.option("--out", default=None, type=click.Path(),
              help="Write to a file instead of stdout.")
@_guarded
def report(workbook, taxonomy, fmt, scheme, out) -> None:
    """Render the report card, focused view, and tallied risk matrix."""
    tax = _taxonomy_from(taxonomy)
    doc, _ = _load_doc(workbook, tax)
    if doc.session.state != SessionState.FINALIZED:
        raise ReportingError(
            f"session not finalized: {doc.session.id} is {doc.session.state.value}"
        )
    card = report_card(doc.session, tax, _scheme_from(scheme))
    matrix = tallied_matrix(doc.session)
    text = render_report(card, matrix, ReportFormat(fmt))
    if out:
        Path(out).write_text(text, "utf-8")
        click.echo(f"wrote report to {out}")
    else:
        click.echo(text, nl=False)


@main.command("output-log")
@workbook_option
@taxonomy_option
@click.option("--completed-at", required=True,
              help="Completion timestamp (ISO 8601); recorded as supplied.")
@click.option("--out", default=None, type=click.Path())
@_guarded
def output_log(workbook, taxonomy, completed_at, out) -> None:
    """Emit the sealed output log for a finalized session."""
    tax = _taxonomy_from(taxonomy)
    doc, path = _load_doc(workbook, tax)
    try:
        stamp = datetime.fromisoformat(completed_at)
    except ValueError:
        raise ReportingError(
            f"--completed-at must be an ISO timestamp, got {completed_at!r}"
        ) from None
    log = emit_output_log(doc.session, stamp)
    import json as _json

    text = _json.dumps(output_log_to_dict(log), indent=2, ensure_ascii=False) + "\n"
    if log.content_digest not in doc.emitted_outputs:
        updated = replace(doc, emitted_outputs=doc.emitted_outputs + (log.content_digest,))
        _write_doc(updated, path)
    if out:
        Path(out).write_text(text, "utf-8")
        click.echo(f"wrote output log to {out} (digest {log.content_digest})")
    else:
        click.echo(text, nl=False)


@main.command()
@workbook_option
@click.option("--against", required=True, help="Workbook to compare with.")
@taxonomy_option
@click.option("--scheme", default=None, type=click.Path(exists=True))
@_guarded
def diff(workbook, against, taxonomy, scheme) -> None:
    """Show report-card changes between two workbooks of the same shape."""
    tax = _taxonomy_from(taxonomy)
    doc_a, _ = _load_doc(workbook, tax)
    doc_b, _ = _load_doc(against, tax)
    chosen = _scheme_from(scheme)
    card_a = report_card(doc_a.session, tax, chosen)
    card_b = report_card(doc_b.session, tax, chosen)
    result = diff_report_cards(card_a, card_b)
    for change in result.cell_changes + result.focused_changes:
        before = "n/a" if change.before is None else str(change.before)
        after = "n/a" if change.after is None else str(change.after)
        if change.delta is not None:
            note = f"{change.delta:+d}"
        elif change.before is None:
            note = "newly assessed"
        else:
            note = "no longer assessed"
        click.echo(f"{change.column}\t{change.row}\t{before} -> {after}\t({note})")
    if result.is_empty():
        click.echo("no report card changes")
    else:
        a_total = "n/a" if result.total_max_before is None else result.total_max_before
        b_total = "n/a" if result.total_max_after is None else result.total_max_after
        click.echo(f"total_max\t{a_total} -> {b_total}")


@main.command()
@click.option("--listen", default="127.0.0.1:8000", show_default=True,
              help="ADDRESS:PORT to bind.")
@click.option("--workbook-dir", default=None,
              help=f"Session storage root; defaults to ${WORKBOOK_DIR_ENV} or ./workbooks.")
@taxonomy_option
@click.option("--rubrics", "rubrics_path", default=None,
              help="Custom rubric document; defaults to the bundled dataset.")
@_guarded
def serve(listen, workbook_dir, taxonomy, rubrics_path) -> None:
    """Serve the HTTP API for interactive clients."""
    import uvicorn

    host, _, port = listen.rpartition(":")
    if not host or not port.isdigit():
        raise WorkbookError(f"--listen must look like HOST:PORT, got {listen!r}")
    app = create_app(
        store=workbook_dir,
        taxonomy=_taxonomy_from(taxonomy),
        rubrics=load_rubrics(Path(rubrics_path)) if rubrics_path else bundled_rubrics(),
    )
    uvicorn.run(app, host=host, port=int(port))


if __name__ == "__main__":
    main()
