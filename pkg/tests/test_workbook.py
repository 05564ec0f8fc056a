"""Tests for workbook serialization, mutation envelopes, and the session store."""
import json
import logging
import random
import threading
from dataclasses import replace

import pytest

from pra_workbench.assessment import (
    GatingError,
    ScenarioOrder,
    ScenarioStatus,
    SessionState,
    add_scenario,
    next_aspects,
    record_estimate,
)
from pra_workbench.calculus import LikelihoodLevel as LL
from pra_workbench.calculus import HarmSeverityLevel as HSL
from pra_workbench.pathway import InteractionCell, PathwayDirection, chain
from pra_workbench.workbook import (
    FORMAT_VERSION,
    MutationEnvelope,
    RevisionConflict,
    SessionStore,
    WorkbookDocument,
    WorkbookError,
    apply_mutation,
    bundled_example_workbook,
    document_bytes,
    document_to_dict,
    load_workbook,
    mutation_commands,
    save_workbook,
    session_from_dict,
    session_to_dict,
)

from conftest import (
    RATIONALE,
    make_scenario,
    make_session,
    random_finalized_session,
)


def rich_session(taxonomy):
    """A session exercising every serializable construct."""
    session = make_session(aml_code="AML-121")
    pathway = chain(
        "capability/reasoning",
        "impact-domain/societal",
        [
            ("deceptive plan formed", LL.LL6),
            ("plan survives oversight", None, "External Opacity of Use"),
            ("institutional trust erodes", LL.LL5),
        ],
        direction=PathwayDirection.BACKWARD,
    )
    first = make_scenario(
        scenario_id="s-001",
        outcomes=2,
        dimension_refs=("social-fabric-erosion",),
        pathway=pathway,
    )
    session = add_scenario(session, first, taxonomy)
    second = make_scenario(
        scenario_id="s-002",
        order=ScenarioOrder.SECOND_ORDER,
        interaction=InteractionCell(
            "capability/agency", "affordance/operational-affordance",
            rationale="Autonomy compounds with broad tool access.",
        ),
    )
    session = add_scenario(session, second, taxonomy)
    session = record_estimate(session, "s-001", "Ada", 0, HSL.HSL3, LL.LL5, RATIONALE)
    session = record_estimate(session, "s-001", "Ben", 0, HSL.HSL4, LL.LL3, RATIONALE)
    return session


def document_for(session, taxonomy, **overrides):
    fields = dict(
        format_version=FORMAT_VERSION,
        taxonomy_version=taxonomy.version,
        session=session,
    )
    fields.update(overrides)
    return WorkbookDocument(**fields)


def rationale_payload():
    return {
        "key_assumptions": "a",
        "evidence_quality": "b",
        "known_uncertainties": "c",
        "sensitivity_notes": "",
        "operator_or_interaction_rationale": None,
    }


def scenario_payload(scenario_id="s-001", aspect_ref="capability/reasoning"):
    return {
        "id": scenario_id,
        "aspect_ref": aspect_ref,
        "order": "first_order",
        "hazard_mode": "combined",
        "narrative": "A concrete misuse and failure story.",
        "prop_enhanced": False,
        "pathway": None,
        "interaction": None,
        "parent_scenario": None,
        "applied_operator": None,
        "outcomes": [
            {"description": "harm occurs", "estimates": [], "final": None, "flagged": False},
        ],
        "dimension_refs": [],
        "rationale": None,
        "status": "draft",
    }


class TestRoundTrip:
    def test_rich_session_survives_dict_round_trip(self, taxonomy):
        session = rich_session(taxonomy)
        assert session_from_dict(session_to_dict(session)) == session

    def test_document_round_trip_is_byte_stable(self, taxonomy):
        doc = document_for(rich_session(taxonomy), taxonomy)
        data = document_bytes(doc)
        loaded = load_workbook(data, taxonomy)
        assert loaded == doc
        assert document_bytes(loaded) == data

    def test_bytes_are_canonical_json(self, taxonomy):
        data = document_bytes(document_for(rich_session(taxonomy), taxonomy))
        text = data.decode("utf-8")
        assert text.endswith("\n")
        assert text.startswith('{\n  "format_version": "1",\n')
        assert json.loads(text)["format_version"] == "1"

    def test_save_and_load_via_file(self, taxonomy, tmp_path):
        doc = document_for(rich_session(taxonomy), taxonomy)
        path = tmp_path / "one.workbook.json"
        written = save_workbook(doc, path)
        assert written == path.stat().st_size
        assert load_workbook(path, taxonomy) == doc
        assert load_workbook(str(path), taxonomy) == doc
        assert load_workbook(path.read_text("utf-8"), taxonomy) == doc

    def test_explicit_nulls_are_kept(self, taxonomy):
        doc = document_for(rich_session(taxonomy), taxonomy)
        raw = json.loads(document_bytes(doc))
        first = raw["session"]["scenarios"][0]
        assert first["interaction"] is None
        assert first["parent_scenario"] is None
        assert first["pathway"]["steps"][1]["probability"] is None

    @pytest.mark.parametrize("seed", [7, 99, 2026])
    def test_randomized_finalized_sessions_round_trip(self, taxonomy, seed):
        rng = random.Random(seed)
        session = random_finalized_session(rng, taxonomy, f"rt-{seed}")
        doc = document_for(session, taxonomy)
        data = document_bytes(doc)
        loaded = load_workbook(data, taxonomy)
        assert loaded.session == session
        assert document_bytes(loaded) == data


class TestLoadValidation:
    def doc_dict(self, taxonomy):
        return document_to_dict(document_for(rich_session(taxonomy), taxonomy))

    def reload(self, raw, taxonomy=None):
        return load_workbook(json.dumps(raw), taxonomy)

    def test_invalid_json(self):
        with pytest.raises(WorkbookError, match="not valid JSON"):
            load_workbook(b"{broken")

    def test_unsupported_format_version(self, taxonomy):
        raw = self.doc_dict(taxonomy)
        raw["format_version"] = "2"
        with pytest.raises(WorkbookError, match="unsupported workbook format version '2'"):
            self.reload(raw)

    def test_missing_field_is_located(self, taxonomy):
        raw = self.doc_dict(taxonomy)
        del raw["session"]["id"]
        with pytest.raises(WorkbookError, match="session is missing field 'id'"):
            self.reload(raw)

    def test_wrong_type_is_located(self, taxonomy):
        raw = self.doc_dict(taxonomy)
        raw["session"]["revision"] = "three"
        with pytest.raises(WorkbookError, match="session.revision must be an integer"):
            self.reload(raw)

    def test_negative_revision(self, taxonomy):
        raw = self.doc_dict(taxonomy)
        raw["session"]["revision"] = -1
        with pytest.raises(WorkbookError, match="non-negative"):
            self.reload(raw)

    def test_bad_enum_value_lists_choices(self, taxonomy):
        raw = self.doc_dict(taxonomy)
        raw["session"]["team_mode"] = "crowd"
        with pytest.raises(WorkbookError, match="'single', 'team'"):
            self.reload(raw)

    def test_severity_out_of_range(self, taxonomy):
        raw = self.doc_dict(taxonomy)
        raw["session"]["scenarios"][0]["outcomes"][0]["estimates"][0]["hsl"] = 7
        with pytest.raises(WorkbookError, match=r"hsl must be in \[1, 6\], got 7"):
            self.reload(raw)

    def test_final_must_be_a_pair(self, taxonomy):
        raw = self.doc_dict(taxonomy)
        raw["session"]["scenarios"][0]["outcomes"][0]["final"] = [3]
        with pytest.raises(WorkbookError, match=r"\[severity, likelihood\] pair"):
            self.reload(raw)

    def test_bad_date(self, taxonomy):
        raw = self.doc_dict(taxonomy)
        raw["session"]["system_info"]["assessment_date"] = "yesterday"
        with pytest.raises(WorkbookError, match="not an ISO date"):
            self.reload(raw)

    def test_bad_probability_kind(self, taxonomy):
        raw = self.doc_dict(taxonomy)
        raw["session"]["scenarios"][0]["pathway"]["steps"][0]["probability"] = {
            "kind": "vibes"
        }
        with pytest.raises(WorkbookError, match="'interval' or 'level'"):
            self.reload(raw)

    def test_domain_invariants_rewrapped(self, taxonomy):
        raw = self.doc_dict(taxonomy)
        raw["session"]["scenarios"][1]["interaction"] = None
        with pytest.raises(WorkbookError, match="needs an interaction pair"):
            self.reload(raw)

    def test_unknown_aml_code(self, taxonomy):
        raw = self.doc_dict(taxonomy)
        raw["session"]["aml_code"] = "AML-000"
        with pytest.raises(WorkbookError, match="unknown AML code"):
            self.reload(raw)

    def test_emitted_outputs_must_be_strings(self, taxonomy):
        raw = self.doc_dict(taxonomy)
        raw["emitted_outputs"] = [123]
        with pytest.raises(WorkbookError, match="string digest"):
            self.reload(raw)

    def test_unknown_aspect_fails_with_taxonomy(self, taxonomy):
        raw = self.doc_dict(taxonomy)
        raw["session"]["scenarios"][0]["aspect_ref"] = "capability/osmosis"
        loaded = self.reload(raw)  # structural load alone is fine
        assert loaded.session.scenarios[0].aspect_ref == "capability/osmosis"
        with pytest.raises(WorkbookError, match="unknown aspect 'capability/osmosis'"):
            self.reload(raw, taxonomy)

    def test_protocol_mismatch_fails_with_taxonomy(self, taxonomy):
        raw = self.doc_dict(taxonomy)
        raw["session"]["aml_code"] = "AML-010"
        with pytest.raises(WorkbookError, match="second-order"):
            self.reload(raw, taxonomy)

    def test_taxonomy_version_mismatch_warns(self, taxonomy, caplog):
        raw = self.doc_dict(taxonomy)
        raw["taxonomy_version"] = "0.0.1"
        with caplog.at_level(logging.WARNING, logger="pra_workbench.workbook"):
            loaded = self.reload(raw, taxonomy)
        assert loaded.warnings
        assert "0.0.1" in loaded.warnings[0]
        assert any("0.0.1" in r.message for r in caplog.records)
        # warnings do not participate in document equality
        assert loaded == replace(loaded, warnings=())


class TestMutationEnvelopes:
    def test_revision_conflict(self, taxonomy):
        session = make_session()
        envelope = MutationEnvelope(
            expected_revision=5, command="finalize", args={}, actor="Ada"
        )
        with pytest.raises(RevisionConflict) as info:
            apply_mutation(session, envelope, taxonomy)
        assert info.value.current_revision == 0
        assert "revision 0" in str(info.value)

    def test_unknown_command(self, taxonomy):
        session = make_session()
        envelope = MutationEnvelope(expected_revision=0, command="explode", args={})
        with pytest.raises(WorkbookError, match="unknown mutation command 'explode'"):
            apply_mutation(session, envelope, taxonomy)

    def test_command_listing(self):
        assert mutation_commands() == [
            "add_scenario",
            "apply_operator",
            "detect_divergence",
            "finalize",
            "mark_aspect_complete",
            "record_estimate",
            "resolve_recalibration",
        ]

    def test_missing_argument_named(self, taxonomy):
        session = make_session()
        envelope = MutationEnvelope(expected_revision=0, command="add_scenario", args={})
        with pytest.raises(WorkbookError, match="missing 'scenario'"):
            apply_mutation(session, envelope, taxonomy)

    def step(self, session, taxonomy, command, args):
        envelope = MutationEnvelope(
            expected_revision=session.revision, command=command, args=args
        )
        updated, payload = apply_mutation(session, envelope, taxonomy)
        assert payload["revision"] == updated.revision
        return updated, payload

    def test_full_lifecycle_through_envelopes(self, taxonomy):
        session = make_session(aml_code="AML-121")

        session, payload = self.step(session, taxonomy, "add_scenario", {
            "scenario": scenario_payload(),
        })
        assert payload["scenario_id"] == "s-001"

        session, payload = self.step(session, taxonomy, "record_estimate", {
            "scenario_id": "s-001", "assessor": "Ada", "outcome_index": 0,
            "hsl": 2, "ll": 3, "rationale": rationale_payload(),
        })
        assert payload["scenario_status"] == "draft"

        session, payload = self.step(session, taxonomy, "record_estimate", {
            "scenario_id": "s-001", "assessor": "Ben", "outcome_index": 0,
            "hsl": 4, "ll": 6, "rationale": rationale_payload(),
        })
        assert payload["scenario_status"] == "estimated"

        session, payload = self.step(session, taxonomy, "detect_divergence", {
            "scenario_id": "s-001",
        })
        assert len(payload["flags"]) == 1
        assert payload["flags"][0]["hsl_spread"] == 2
        assert payload["flags"][0]["ll_spread"] == 3

        session, payload = self.step(session, taxonomy, "resolve_recalibration", {
            "scenario_id": "s-001",
            "post_entries": [
                {"outcome_index": 0, "assessor": "Ada", "hsl": 3, "ll": 5},
                {"outcome_index": 0, "assessor": "Ben", "hsl": 3, "ll": 4},
            ],
        })
        assert payload["finals"] == [{"outcome_index": 0, "hsl": 3, "ll": 5}]
        assert session.scenario("s-001").status == ScenarioStatus.COMPLETE

        session, payload = self.step(session, taxonomy, "apply_operator", {
            "parent_id": "s-001", "operator": "Accumulation", "new_id": "s-001a",
        })
        assert payload["scenario_id"] == "s-001a"

        session, _ = self.step(session, taxonomy, "record_estimate", {
            "scenario_id": "s-001a", "assessor": "Ada", "outcome_index": 0,
            "hsl": 2, "ll": 2, "rationale": rationale_payload(),
        })
        session, _ = self.step(session, taxonomy, "record_estimate", {
            "scenario_id": "s-001a", "assessor": "Ben", "outcome_index": 0,
            "hsl": 2, "ll": 2, "rationale": rationale_payload(),
        })
        session, _ = self.step(session, taxonomy, "resolve_recalibration", {
            "scenario_id": "s-001a",
        })

        for aspect in next_aspects(session, taxonomy):
            session, payload = self.step(session, taxonomy, "mark_aspect_complete", {
                "aspect_id": aspect, "rationale": "Considered in depth.",
            })
            assert payload["aspect_id"] == aspect

        session, payload = self.step(session, taxonomy, "finalize", {})
        assert payload["state"] == "finalized"
        assert session.state == SessionState.FINALIZED


class TestSessionStore:
    def fresh(self, tmp_path, taxonomy, session_id="alpha"):
        store = SessionStore(tmp_path / "workbooks")
        doc = document_for(make_session(session_id=session_id), taxonomy)
        store.create(doc)
        return store, doc

    def test_create_get_list(self, tmp_path, taxonomy):
        store, doc = self.fresh(tmp_path, taxonomy)
        assert store.exists("alpha")
        assert not store.exists("beta")
        assert store.list_ids() == ["alpha"]
        assert store.get("alpha", taxonomy) == doc

    def test_create_duplicate(self, tmp_path, taxonomy):
        store, doc = self.fresh(tmp_path, taxonomy)
        with pytest.raises(WorkbookError, match="already exists"):
            store.create(doc)

    def test_invalid_session_id(self, tmp_path, taxonomy):
        store, _ = self.fresh(tmp_path, taxonomy)
        for bad in ("", "../escape", "a b", ".hidden"):
            with pytest.raises(WorkbookError, match="invalid session id"):
                store.path_for(bad)

    def test_get_missing(self, tmp_path, taxonomy):
        store, _ = self.fresh(tmp_path, taxonomy)
        with pytest.raises(KeyError):
            store.get("beta")

    def test_mutate_persists(self, tmp_path, taxonomy):
        store, doc = self.fresh(tmp_path, taxonomy)
        envelope = MutationEnvelope(
            expected_revision=0, command="add_scenario",
            args={"scenario": scenario_payload()},
        )
        updated, payload = store.mutate("alpha", envelope, taxonomy)
        assert payload["revision"] == 1
        reloaded = store.get("alpha", taxonomy)
        assert reloaded == updated
        assert reloaded.session.has_scenario("s-001")

    def test_conflict_leaves_bytes_untouched(self, tmp_path, taxonomy):
        store, doc = self.fresh(tmp_path, taxonomy)
        path = store.path_for("alpha")
        before = path.read_bytes()
        envelope = MutationEnvelope(
            expected_revision=41, command="add_scenario",
            args={"scenario": scenario_payload()},
        )
        with pytest.raises(RevisionConflict):
            store.mutate("alpha", envelope, taxonomy)
        assert path.read_bytes() == before

    def test_gating_rejection_leaves_bytes_untouched(self, tmp_path, taxonomy):
        store = SessionStore(tmp_path / "workbooks")
        doc = document_for(
            make_session(aml_code="AML-010", team=("Ada",), session_id="gated"),
            taxonomy,
        )
        store.create(doc)
        path = store.path_for("gated")
        before = path.read_bytes()
        envelope = MutationEnvelope(
            expected_revision=0, command="add_scenario",
            args={"scenario": scenario_payload(
                aspect_ref="capability/reasoning/recursion"
            )},
        )
        with pytest.raises(GatingError):
            store.mutate("gated", envelope, taxonomy)
        assert path.read_bytes() == before

    def test_no_temp_files_left_behind(self, tmp_path, taxonomy):
        store, _ = self.fresh(tmp_path, taxonomy)
        envelope = MutationEnvelope(
            expected_revision=0, command="add_scenario",
            args={"scenario": scenario_payload()},
        )
        store.mutate("alpha", envelope, taxonomy)
        leftovers = list(store.root.glob("*.tmp"))
        assert leftovers == []

    def test_record_output_is_idempotent(self, tmp_path, taxonomy):
        store, _ = self.fresh(tmp_path, taxonomy)
        doc = store.record_output("alpha", "d" * 64)
        assert doc.emitted_outputs == ("d" * 64,)
        doc = store.record_output("alpha", "d" * 64)
        assert doc.emitted_outputs == ("d" * 64,)
        doc = store.record_output("alpha", "e" * 64)
        assert doc.emitted_outputs == ("d" * 64, "e" * 64)


class TestBundledExample:
    def test_loads_and_round_trips(self, taxonomy):
        doc = bundled_example_workbook()
        assert doc.format_version == FORMAT_VERSION
        assert doc.taxonomy_version == taxonomy.version
        # reload under the bundled taxonomy to run the aspect cross-checks
        blob = document_bytes(doc)
        assert load_workbook(blob, taxonomy) == doc
        assert document_bytes(load_workbook(blob, taxonomy)) == blob

    def test_shows_a_mid_assessment_state(self):
        session = bundled_example_workbook().session
        assert session.state == SessionState.IN_PROGRESS
        statuses = {s.id: s.status for s in session.scenarios}
        assert statuses["s-001"] == ScenarioStatus.COMPLETE
        assert statuses["s-001+accumulation"] == ScenarioStatus.ESTIMATED
        assert statuses["s-003"] == ScenarioStatus.DRAFT
        assert session.scenario("s-001").outcomes[0].final is not None


class TestConcurrentMutation:
    def test_accepted_revisions_are_gapless(self, tmp_path, taxonomy):
        store = SessionStore(tmp_path / "workbooks")
        store.create(document_for(make_session(session_id="race"), taxonomy))
        accepted = []
        guard = threading.Lock()
        per_worker = 8

        def worker(tag):
            for i in range(per_worker):
                while True:
                    current = store.get("race")
                    envelope = MutationEnvelope(
                        expected_revision=current.session.revision,
                        command="add_scenario",
                        args={"scenario": scenario_payload(f"s-{tag}-{i}")},
                        actor=tag,
                    )
                    try:
                        updated, _ = store.mutate("race", envelope, taxonomy)
                    except RevisionConflict:
                        continue
                    with guard:
                        accepted.append(updated.session.revision)
                    break

        workers = [
            threading.Thread(target=worker, args=(tag,)) for tag in ("a", "b", "c")
        ]
        for thread in workers:
            thread.start()
        for thread in workers:
            thread.join()

        total = per_worker * len(workers)
        assert sorted(accepted) == list(range(1, total + 1))
        final = store.get("race", taxonomy)
        assert final.session.revision == total
        assert len(final.session.scenarios) == total
