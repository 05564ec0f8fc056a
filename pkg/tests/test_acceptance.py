"""Acceptance gate: one test per core guarantee, each with its own oracle.

Every test here checks an implementation against an independent source of
truth: a frozen reference table, a big-integer recomputation, a brute-force
scan, or a scripted end-to-end run. Timed criteria assert their budget.
"""
import math
import random
import time
from fractions import Fraction

import pytest
from click.testing import CliRunner

import pra_workbench.assessment as asmt
from conftest import RATIONALE, make_scenario, make_session, random_finalized_session
from pra_workbench.assessment import (
    AML_PROTOCOLS,
    EstimateEntry,
    EstimateRound,
    GatingError,
    ScenarioOrder,
    ScenarioStatus,
    working_level,
)
from pra_workbench.calculus import (
    BandAnnotation,
    HarmSeverityLevel,
    LikelihoodLevel,
    ProbabilityInterval,
    compose_sequential,
    hsl_threshold_raw_product,
    hsl_upper_threshold,
    ll_from_probability,
    risk_level,
)
from pra_workbench.cli import main
from pra_workbench.pathway import InteractionCell
from pra_workbench.reporting import (
    DISCLAIMER,
    AssessmentTypeColumn,
    focused_aggregation,
    report_card,
    tallied_matrix,
)
from pra_workbench.taxonomy import TaxonomyLevel, bundled_taxonomy
from pra_workbench.workbook import (
    FORMAT_VERSION,
    MutationEnvelope,
    RevisionConflict,
    SessionStore,
    WorkbookDocument,
    document_bytes,
    load_workbook,
)

# Frozen copy of the risk level grid, rows LL-0 through LL-8, columns
# HSL-1 through HSL-6. Transcribed independently of the implementation.
REFERENCE_MATRIX = (
    (0, 0, 0, 0, 0, 0),
    (0, 0, 1, 3, 4, 6),
    (0, 0, 1, 3, 5, 6),
    (0, 1, 2, 4, 5, 7),
    (1, 2, 3, 4, 6, 7),
    (2, 3, 4, 5, 6, 8),
    (3, 4, 5, 6, 7, 8),
    (4, 5, 6, 7, 8, 9),
    (4, 5, 7, 8, 9, 9),
)


def test_risk_matrix_fidelity():
    """All 54 grid cells match the frozen table; both axes are monotone."""
    start = time.perf_counter()
    for ll in range(9):
        for hsl in range(1, 7):
            got = risk_level(HarmSeverityLevel(hsl), LikelihoodLevel(ll))
            assert got == REFERENCE_MATRIX[ll][hsl - 1], (hsl, ll)
    assert all(risk_level(h, LikelihoodLevel(0)) == 0 for h in range(1, 7))
    for ll in range(9):
        for hsl in range(1, 6):
            assert risk_level(hsl, ll) <= risk_level(hsl + 1, ll)
    for hsl in range(1, 7):
        for ll in range(8):
            assert risk_level(hsl, ll) <= risk_level(hsl, ll + 1)
    assert time.perf_counter() - start < 1.0


def _round_to_half_magnitude(raw: int) -> int:
    """Independent oracle: mantissa to the nearest 0.5, halves rounding up."""
    exponent = len(str(raw)) - 1
    mantissa = Fraction(raw, 10 ** exponent)
    halves = int(mantissa * 2 + Fraction(1, 2))
    return halves * 10 ** exponent // 2


def test_hsl_formula_reproduction():
    """Severity thresholds equal rounded products of consecutive Fibonacci numbers."""
    start = time.perf_counter()
    fib = [1, 1]
    while len(fib) < 16:
        fib.append(fib[-1] + fib[-2])
    expected_raw = []
    product = 1
    for index in range(5):
        product *= fib[7 + index]
        expected_raw.append(product)
    assert expected_raw == [21, 714, 39270, 3495030, 503284320]
    for n in range(1, 6):
        assert hsl_threshold_raw_product(n) == expected_raw[n - 1]
        assert hsl_upper_threshold(n) == _round_to_half_magnitude(expected_raw[n - 1])
    assert [hsl_upper_threshold(n) for n in range(1, 6)] == [
        20, 700, 40000, 3500000, 500000000,
    ]
    assert time.perf_counter() - start < 1.0


def _band_by_scan(p: float) -> tuple[int, object]:
    if p <= 1e-12:
        return 0, None
    if p < 1e-8:
        return 1, BandAnnotation.BELOW_BAND
    if p == 1.0:
        return 8, None
    lower_bounds = (1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1)
    level = 1
    for i, bound in enumerate(lower_bounds):
        if p >= bound:
            level = i + 1
    return level, None


def test_ll_band_inverse():
    """Banding matches a brute-force boundary scan on 10000 random points."""
    rng = random.Random(20260826)
    samples = [10.0 ** rng.uniform(-12.0, 0.0) for _ in range(10000)]
    start = time.perf_counter()
    for p in samples:
        banded = ll_from_probability(p)
        assert (int(banded.level), banded.annotation) == _band_by_scan(p), p
    assert time.perf_counter() - start < 1.0
    # boundaries are lower-inclusive; the sub-band gap is open on both sides
    for level, bound in enumerate((1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1), 1):
        banded = ll_from_probability(bound)
        assert (int(banded.level), banded.annotation) == (level, None)
    assert ll_from_probability(1e-4).level == LikelihoodLevel.LL5
    assert ll_from_probability(1.0).level == LikelihoodLevel.LL8
    low = ll_from_probability(1e-12)
    assert (int(low.level), low.annotation) == (0, None)
    just_above = ll_from_probability(math.nextafter(1e-12, 1.0))
    assert (int(just_above.level), just_above.annotation) == (1, BandAnnotation.BELOW_BAND)
    just_below = ll_from_probability(math.nextafter(1e-8, 0.0))
    assert (int(just_below.level), just_below.annotation) == (1, BandAnnotation.BELOW_BAND)


def test_composition_properties():
    """Sequential composition is the interval product, with identity and monotony."""
    rng = random.Random(41)
    assert compose_sequential([]) == ProbabilityInterval(1.0, 1.0)
    unit = ProbabilityInterval(1.0, 1.0)
    start = time.perf_counter()
    for _ in range(1000):
        intervals = []
        for _ in range(rng.randint(1, 6)):
            hi = 10.0 ** rng.uniform(-4.0, 0.0)
            intervals.append(ProbabilityInterval(hi * rng.uniform(0.1, 1.0), hi))
        combined = compose_sequential(intervals)
        lo_oracle = math.prod(i.lo for i in intervals)
        hi_oracle = math.prod(i.hi for i in intervals)
        assert math.isclose(combined.lo, lo_oracle, rel_tol=1e-12, abs_tol=0.0)
        assert math.isclose(combined.hi, hi_oracle, rel_tol=1e-12, abs_tol=0.0)
        assert compose_sequential(intervals + [unit]) == combined
        index = rng.randrange(len(intervals))
        narrow = intervals[index]
        intervals[index] = ProbabilityInterval(
            narrow.lo * 0.5, min(1.0, narrow.hi * 1.5)
        )
        widened = compose_sequential(intervals)
        assert widened.lo <= combined.lo
        assert widened.hi >= combined.hi
    assert time.perf_counter() - start < 5.0


# Admission verdicts per protocol for the three gated scenario shapes:
# a second-order interaction, a propagation-enhanced derivation, and a
# scenario one tier below the protocol's working level.
GATING_TABLE = (
    # code, second-order, propagation-enhanced, finer-than-group aspect
    ("AML-008", False, False, False),
    ("AML-010", False, False, False),
    ("AML-020", True, False, False),
    ("AML-110", False, False, True),
    ("AML-111", False, True, True),
    ("AML-120", True, False, True),
    ("AML-121", True, True, True),
    ("AML-210", False, False, True),
    ("AML-211", False, True, True),
    ("AML-220", True, False, True),
    ("AML-221", True, True, True),
)


def _admits(session, scenario, taxonomy) -> bool:
    try:
        asmt.add_scenario(session, scenario, taxonomy)
    except GatingError:
        return False
    return True


def test_aml_gating_table():
    """Every protocol admits exactly the scenario shapes its options allow."""
    taxonomy = bundled_taxonomy()
    assert len(GATING_TABLE) * 3 == 33
    for code, second_ok, prop_ok, aspect_ok in GATING_TABLE:
        session = make_session(code, ("Ada",), f"gate-{code.lower()}")
        level = working_level(AML_PROTOCOLS[code])
        if level == TaxonomyLevel.TL1:
            primary, partner = "capability/reasoning", "capability/agency"
            finer = "capability/reasoning/deductive-reasoning"
        else:
            primary = "capability/reasoning/deductive-reasoning"
            partner = "capability/agency/autonomy"
            finer = primary
        second = make_scenario(
            "shape-second", aspect_ref=primary, order=ScenarioOrder.SECOND_ORDER,
            interaction=InteractionCell(primary, partner, "combined effect"),
        )
        assert _admits(session, second, taxonomy) is second_ok, (code, "second")
        base = make_scenario("shape-base", aspect_ref=primary)
        with_base = asmt.add_scenario(session, base, taxonomy)
        derived = asmt.apply_operator(base, "Accumulation")
        assert _admits(with_base, derived, taxonomy) is prop_ok, (code, "prop")
        if level == TaxonomyLevel.TL1:
            fine = make_scenario("shape-fine", aspect_ref=finer)
            assert _admits(session, fine, taxonomy) is aspect_ok, (code, "aspect")
        else:
            # TL2 is this protocol's working level, so admission is the baseline
            fine = make_scenario("shape-fine", aspect_ref=finer)
            assert _admits(session, fine, taxonomy) is True is aspect_ok, (code, "aspect")


def _rl_key(hsl: int, ll: int) -> tuple[int, int, int]:
    return (REFERENCE_MATRIX[ll][hsl - 1], hsl, ll)


def test_recalibration_max_rule():
    """Finals equal the brute-force maximum of the governing estimate round."""
    taxonomy = bundled_taxonomy()
    rng = random.Random(73)
    for trial in range(500):
        team = tuple(f"a{i}" for i in range(rng.randint(2, 4)))
        session = make_session("AML-020", team, f"recal-{trial}")
        scenario = make_scenario(
            "s-recal", aspect_ref="capability/reasoning",
            outcomes=rng.randint(1, 3),
        )
        session = asmt.add_scenario(session, scenario, taxonomy)
        initial: dict[int, list[tuple[int, int]]] = {}
        for index in range(len(scenario.outcomes)):
            initial[index] = []
            for name in team:
                hsl, ll = rng.randint(1, 6), rng.randint(0, 8)
                initial[index].append((hsl, ll))
                session = asmt.record_estimate(
                    session, "s-recal", name, index,
                    HarmSeverityLevel(hsl), LikelihoodLevel(ll), RATIONALE,
                )
        session, flags = asmt.detect_divergence(session, "s-recal")
        expected_flagged = {
            index
            for index, values in initial.items()
            if max(v[1] for v in values) - min(v[1] for v in values) >= 2
            or max(v[0] for v in values) - min(v[0] for v in values) >= 1
        }
        assert {f.outcome_index for f in flags} == expected_flagged, trial
        posts: dict[int, list[tuple[int, int]]] = {}
        entries = []
        for index in sorted(expected_flagged):
            posts[index] = []
            for name in team:
                hsl, ll = rng.randint(1, 6), rng.randint(0, 8)
                posts[index].append((hsl, ll))
                entries.append((index, EstimateEntry(
                    assessor=name,
                    hsl=HarmSeverityLevel(hsl),
                    ll=LikelihoodLevel(ll),
                    round=EstimateRound.POST_RECALIBRATION,
                )))
        session = asmt.resolve_recalibration(session, "s-recal", entries)
        resolved = session.scenario("s-recal")
        assert resolved.status == ScenarioStatus.COMPLETE
        for index, outcome in enumerate(resolved.outcomes):
            governing = posts[index] if index in expected_flagged else initial[index]
            best = max(governing, key=lambda v: _rl_key(*v))
            final_hsl, final_ll = outcome.final
            assert (int(final_hsl), int(final_ll)) == best, (trial, index)
            final_rl = REFERENCE_MATRIX[final_ll][final_hsl - 1]
            assert all(final_rl >= _rl_key(*v)[0] for v in governing)

    # threshold boundaries: spreads of exactly (2 LL) or (1 HSL) flag, lesser do not
    for (a, b), should_flag in (
        (((3, 4), (3, 6)), True),
        (((3, 4), (3, 5)), False),
        (((3, 4), (4, 4)), True),
        (((3, 4), (3, 4)), False),
    ):
        session = make_session("AML-020", ("x", "y"), "recal-edge")
        session = asmt.add_scenario(
            session, make_scenario("s-edge", aspect_ref="capability/reasoning"),
            taxonomy,
        )
        for name, (hsl, ll) in zip(("x", "y"), (a, b)):
            session = asmt.record_estimate(
                session, "s-edge", name, 0,
                HarmSeverityLevel(hsl), LikelihoodLevel(ll), RATIONALE,
            )
        _, flags = asmt.detect_divergence(session, "s-edge")
        assert bool(flags) is should_flag, (a, b)


def _column_oracle(scenario) -> AssessmentTypeColumn:
    if scenario.order == ScenarioOrder.FIRST_ORDER:
        if scenario.prop_enhanced:
            return AssessmentTypeColumn.FIRST_ORDER_PROP
        return AssessmentTypeColumn.FIRST_ORDER
    if scenario.prop_enhanced:
        return AssessmentTypeColumn.SECOND_ORDER_PROP
    return AssessmentTypeColumn.SECOND_ORDER


def test_report_card_aggregation():
    """Cells, totals, tallies, and focused values match brute-force maxima."""
    taxonomy = bundled_taxonomy()
    start = time.perf_counter()
    for seed in range(200):
        rng = random.Random(9000 + seed)
        session = random_finalized_session(rng, taxonomy, f"agg-{seed}")
        card = report_card(session, taxonomy)
        tally = tallied_matrix(session)
        focused = focused_aggregation(session)

        expected_cells: dict = {}
        expected_focused: dict = {}
        outcome_count = 0
        best = None
        for scenario in session.scenarios:
            if scenario.status != ScenarioStatus.COMPLETE:
                continue
            group_id = "/".join(scenario.aspect_ref.split("/")[:2])
            column = _column_oracle(scenario)
            for outcome in scenario.outcomes:
                hsl, ll = outcome.final
                value = REFERENCE_MATRIX[ll][hsl - 1]
                outcome_count += 1
                key = (group_id, column)
                if expected_cells.get(key) is None or value > expected_cells[key]:
                    expected_cells[key] = value
                if best is None or value > best:
                    best = value
                for ref in scenario.dimension_refs:
                    if expected_focused.get(ref) is None or value > expected_focused[ref]:
                        expected_focused[ref] = value

        for key, value in card.cells.items():
            assert value == expected_cells.get(key), (seed, key)
        assert card.total_max == best, seed
        assert tally.total() == outcome_count, seed
        for dim_id, value in focused.items():
            assert value == expected_focused.get(dim_id), (seed, dim_id)
            if value is not None:
                assert value <= card.total_max
    assert time.perf_counter() - start < 10.0


def test_taxonomy_integrity():
    """The bundled forest has the pinned shape and clean parent links."""
    taxonomy = bundled_taxonomy()
    tl0 = taxonomy.at_level(TaxonomyLevel.TL0)
    tl1 = taxonomy.at_level(TaxonomyLevel.TL1)
    tl2 = taxonomy.at_level(TaxonomyLevel.TL2)
    assert (len(tl0), len(tl1), len(tl2)) == (4, 10, 61)
    assert len(taxonomy.nodes) == 75
    assert len({node.id for node in taxonomy.nodes}) == 75
    assert [node.label for node in taxonomy.roots()] == [
        "Capability", "Domain Knowledge", "Affordance", "Impact Domain",
    ]
    for node in taxonomy.nodes:
        if node.level == TaxonomyLevel.TL0:
            assert node.parent is None
            continue
        parent = taxonomy.node(node.parent)
        assert parent.level == TaxonomyLevel(node.level - 1)
        chain = taxonomy.ancestors(node.id)
        assert [int(a.level) for a in chain] == list(range(int(node.level), -1, -1))
        assert chain[-1].parent is None


def test_persistence_round_trip(tmp_path):
    """Serialized sessions reload equal; rejected mutations change no bytes."""
    taxonomy = bundled_taxonomy()
    for seed in range(200):
        rng = random.Random(31000 + seed)
        session = random_finalized_session(
            rng, taxonomy, f"rt-{seed}", max_scenarios=3
        )
        doc = WorkbookDocument(FORMAT_VERSION, taxonomy.version, session)
        reloaded = load_workbook(document_bytes(doc), taxonomy)
        assert reloaded.session == session, seed
        assert reloaded == doc, seed

    store = SessionStore(tmp_path / "store")
    rng = random.Random(5)
    session = random_finalized_session(rng, taxonomy, "conflict-check")
    store.create(WorkbookDocument(FORMAT_VERSION, taxonomy.version, session))
    path = store.path_for("conflict-check")
    before = path.read_bytes()
    stale = MutationEnvelope(
        expected_revision=session.revision + 7, command="finalize", args={}
    )
    with pytest.raises(RevisionConflict):
        store.mutate("conflict-check", stale, taxonomy)
    assert path.read_bytes() == before


def _scripted_report(runner: CliRunner, directory) -> bytes:
    workbook = str(directory / "flow.json")

    def run(args):
        result = runner.invoke(main, args)
        assert result.exit_code == 0, result.output + (result.stderr or "")
        return result

    run([
        "init", "--workbook", workbook, "--aml", "AML-121", "--team",
        "--assessor", "Ada:Lead", "--assessor", "Ben:Analyst",
        "--organization", "Example Assessors", "--date", "2026-08-01",
        "--time-frame-years", "1.0", "--system-name", "ExampleNet",
        "--system-version", "1.0 accessed 2026-07-01",
        "--access-level", "API access only",
        "--generational-scope", "Single Build",
        "--assumptions", "No direct internet access.",
    ])
    run([
        "scenario", "add", "--workbook", workbook,
        "--aspect", "capability/reasoning",
        "--narrative", "A concrete misuse and failure story.",
        "--outcome", "harm occurs",
        "--dimension", "governance-breakdown",
    ])
    run([
        "scenario", "derive", "--workbook", workbook,
        "--parent", "s-001", "--operator", "Accumulation",
    ])
    run([
        "scenario", "add", "--workbook", workbook, "--id", "s-002",
        "--aspect", "capability/agency",
        "--narrative", "Two aspects combine into a joint failure.",
        "--outcome", "joint harm occurs",
        "--order", "second",
        "--interaction", "capability/agency,affordance/operational-affordance",
        "--interaction-rationale", "Agency amplifies operational reach.",
    ])
    grid = {"s-001": (4, 5), "s-001+accumulation": (4, 6), "s-002": (3, 4)}
    for scenario_id, (hsl, ll) in grid.items():
        for assessor in ("Ada", "Ben"):
            run([
                "estimate", "--workbook", workbook, "--scenario", scenario_id,
                "--assessor", assessor, "--outcome", "0",
                "--hsl", str(hsl), "--ll", str(ll),
                "--assumptions", "Deployment stays in scope.",
                "--evidence", "Moderate; red-team exercises.",
                "--uncertainties", "Fine-tuning ceiling unclear.",
            ])
        run(["recalibrate", "--workbook", workbook, "--scenario", scenario_id])
    listing = run(["aspects", "--workbook", workbook])
    for line in listing.output.splitlines():
        if line.startswith("pending:"):
            continue
        run([
            "complete-aspect", "--workbook", workbook,
            "--aspect", line.split("\t")[0],
            "--rationale", "Considered in depth.",
        ])
    run(["finalize", "--workbook", workbook])
    out = directory / "report.md"
    run(["report", "--workbook", workbook, "--out", str(out)])
    return out.read_bytes()


def test_cli_end_to_end(tmp_path):
    """The scripted workflow yields a byte-stable Markdown report card."""
    runner = CliRunner()
    start = time.perf_counter()
    first_dir = tmp_path / "one"
    second_dir = tmp_path / "two"
    first_dir.mkdir()
    second_dir.mkdir()
    first = _scripted_report(runner, first_dir)
    second = _scripted_report(runner, second_dir)
    assert time.perf_counter() - start < 5.0
    assert first == second
    text = first.decode("utf-8")
    for label in (
        "First Order", "First Order (Propagated)",
        "Second Order", "Second Order (Propagated)",
    ):
        assert label in text
    assert DISCLAIMER in text
    rerun = tmp_path / "one" / "again.md"
    result = runner.invoke(main, [
        "report", "--workbook", str(first_dir / "flow.json"), "--out", str(rerun),
    ])
    assert result.exit_code == 0
    assert rerun.read_bytes() == first
