from __future__ import annotations

import random
from datetime import date

import pytest

from pra_workbench import assessment as asmt
from pra_workbench.assessment import (
    AML_PROTOCOLS,
    AssessmentSession,
    DivergenceThresholds,
    EstimateEntry,
    EstimateRound,
    OutcomeRecord,
    Rationale,
    ScenarioOrder,
    ScenarioRecord,
    SystemInfo,
    TeamMember,
    TeamMode,
    working_level,
)
from pra_workbench.calculus import HarmSeverityLevel, LikelihoodLevel
from pra_workbench.pathway import InteractionCell, operator_catalog
from pra_workbench.reporting import DEFAULT_SCHEME
from pra_workbench.taxonomy import (
    HazardMode,
    Taxonomy,
    TaxonomyLevel,
    bundled_rubrics,
    bundled_taxonomy,
)


@pytest.fixture(scope="session")
def taxonomy() -> Taxonomy:
    return bundled_taxonomy()


@pytest.fixture(scope="session")
def rubrics():
    return bundled_rubrics()


def make_system_info(team: tuple[str, ...] = ("Ada",), **overrides) -> SystemInfo:
    base = dict(
        assessment_date=date(2026, 8, 1),
        team_composition=tuple(TeamMember(name, "Assessor") for name in team),
        assessing_organization="Example Assessors",
        assessment_time_frame_years=1.0,
        system_name="ExampleNet",
        version="1.0 accessed 2026-07-01",
        access_level="API access only",
        generational_scope="Single Build",
        system_level_assumptions="No direct internet access.",
    )
    base.update(overrides)
    return SystemInfo(**base)


RATIONALE = Rationale(
    key_assumptions="Deployment stays within the stated scope.",
    evidence_quality="Moderate; red-team exercises and published evaluations.",
    known_uncertainties="Capability ceiling under fine-tuning is unclear.",
)


def make_session(
    aml_code: str = "AML-121",
    team: tuple[str, ...] = ("Ada", "Ben"),
    session_id: str = "sess",
    thresholds: DivergenceThresholds = DivergenceThresholds(),
) -> AssessmentSession:
    mode = TeamMode.TEAM if len(team) > 1 else TeamMode.SINGLE
    return asmt.create_session(
        session_id=session_id,
        system_info=make_system_info(team),
        aml_code=aml_code,
        framework_version="v0.9.1-alpha",
        team_mode=mode,
        divergence_thresholds=thresholds,
    )


def make_scenario(
    scenario_id: str = "s-001",
    aspect_ref: str = "capability/reasoning",
    order: ScenarioOrder = ScenarioOrder.FIRST_ORDER,
    outcomes: int = 1,
    dimension_refs: tuple[str, ...] = (),
    interaction: InteractionCell | None = None,
    **overrides,
) -> ScenarioRecord:
    fields = dict(
        id=scenario_id,
        aspect_ref=aspect_ref,
        order=order,
        hazard_mode=HazardMode.COMBINED,
        narrative="A concrete misuse and failure story for the aspect.",
        outcomes=tuple(
            OutcomeRecord(description=f"outcome {i}") for i in range(outcomes)
        ),
        interaction=interaction,
        dimension_refs=dimension_refs,
    )
    fields.update(overrides)
    return ScenarioRecord(**fields)


def random_finalized_session(
    rng: random.Random,
    taxonomy: Taxonomy,
    session_id: str,
    max_scenarios: int = 4,
) -> AssessmentSession:
    """Drive the real operations to a finalized session; fully seed-determined."""
    aml_code = rng.choice(sorted(AML_PROTOCOLS))
    aml = AML_PROTOCOLS[aml_code]
    if rng.random() < 0.3:
        team = ("Solo",)
    else:
        team = tuple(f"assessor-{i}" for i in range(rng.randint(2, 3)))
    session = make_session(aml_code, team, session_id)
    level = working_level(aml)
    working_nodes = [n.id for n in taxonomy.at_level(level)]
    deeper = [n.id for n in taxonomy.at_level(TaxonomyLevel.TL2)]

    for index in range(rng.randint(0, max_scenarios)):
        if aml.consider_aspect_level and level == TaxonomyLevel.TL1 and rng.random() < 0.4:
            aspect = rng.choice(deeper)
        else:
            aspect = rng.choice(working_nodes)
        second = aml.assess_second_order and rng.random() < 0.3
        interaction = None
        order = ScenarioOrder.FIRST_ORDER
        if second:
            order = ScenarioOrder.SECOND_ORDER
            partner = rng.choice([n for n in working_nodes if n != aspect])
            interaction = InteractionCell(aspect, partner, "combined effect")
        dims = tuple(
            rng.sample(DEFAULT_SCHEME.ids(), rng.randint(0, 2))
        )
        scenario = make_scenario(
            scenario_id=f"{session_id}-s{index}",
            aspect_ref=aspect,
            order=order,
            outcomes=rng.randint(1, 2),
            interaction=interaction,
            dimension_refs=dims,
        )
        session = asmt.add_scenario(session, scenario, taxonomy)
        if (
            aml.assess_propagation_operators
            and order == ScenarioOrder.FIRST_ORDER
            and rng.random() < 0.3
        ):
            op = rng.choice(operator_catalog()).name
            child = asmt.apply_operator(scenario, op, "propagation variant")
            session = asmt.add_scenario(session, child, taxonomy)

    for scenario in session.scenarios:
        for outcome_index in range(len(scenario.outcomes)):
            for name in team:
                session = asmt.record_estimate(
                    session, scenario.id, name, outcome_index,
                    HarmSeverityLevel(rng.randint(1, 6)),
                    LikelihoodLevel(rng.randint(0, 8)),
                    RATIONALE,
                )
        session, flags = asmt.detect_divergence(session, scenario.id)
        post = []
        for flag in flags:
            for name in team:
                post.append((
                    flag.outcome_index,
                    EstimateEntry(
                        assessor=name,
                        hsl=HarmSeverityLevel(rng.randint(1, 6)),
                        ll=LikelihoodLevel(rng.randint(0, 8)),
                        round=EstimateRound.POST_RECALIBRATION,
                    ),
                ))
        session = asmt.resolve_recalibration(session, scenario.id, post)

    for aspect_id in asmt.next_aspects(session, taxonomy):
        session = asmt.mark_aspect_complete(
            session, aspect_id, "Reviewed against the rubric anchors.", taxonomy
        )
    return asmt.finalize(session, taxonomy)
