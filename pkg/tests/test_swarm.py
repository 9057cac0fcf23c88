import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hivemind.ann import encode_network
from hivemind.concepts import ConceptGraph, StrengthGrade
from hivemind.errors import InvalidTransition, InvariantViolation, NoImplementation, UnknownEntity
from hivemind.machines import GeoPoint, MachineRegistry
from hivemind.packages import AnnPackages
from hivemind.store import Store
from hivemind.swarm import SwarmController, efficacy_score, haversine_m, plan_goto

from test_machines import constant_net
from test_store import make_machine_def


@pytest.fixture
def world(mem_store):
    graph = ConceptGraph(mem_store)
    registry = MachineRegistry(mem_store)
    packages = AnnPackages(mem_store)
    swarm = SwarmController(mem_store)
    return mem_store, graph, registry, packages, swarm


def setup_selection(store, graph, registry, packages, n_anns=2, n_machines=2):
    concept = graph.create_concept("door", "")
    ann_ids = []
    for i in range(n_anns):
        pkg = packages.upload(f"det{i}", encode_network(constant_net(2, 1)),
                              metadata={"i": i})
        graph.map_relation(concept["id"], "ann", pkg["id"], StrengthGrade(0.8, 0.0))
        ann_ids.append(pkg["id"])
    machine_ids = [registry.register_machine(make_machine_def(f"r{i}"))["id"]
                   for i in range(n_machines)]
    return concept, ann_ids, machine_ids


class TestEfficacy:
    def test_laplace_values(self):
        assert efficacy_score(0, 0) == 0.5
        assert efficacy_score(4, 3) == pytest.approx(4 / 6)
        assert efficacy_score(1000, 1000) == pytest.approx(1001 / 1002)

    @given(st.integers(0, 10**6), st.integers(0, 10**6))
    def test_score_in_open_interval(self, attempts, extra):
        successes = min(attempts, extra)
        assert 0.0 < efficacy_score(attempts, successes) < 1.0

    def test_record_outcome_counters(self, world):
        store, graph, registry, packages, swarm = world
        concept, ann_ids, machine_ids = setup_selection(store, graph, registry, packages)
        rec = swarm.record_outcome(concept["id"], ann_ids[0], machine_ids[0], True)
        assert (rec["attempts"], rec["successes"]) == (1, 1)
        rec = swarm.record_outcome(concept["id"], ann_ids[0], machine_ids[0], False)
        assert (rec["attempts"], rec["successes"]) == (2, 1)

    def test_counters_monotonic_and_timestamped(self, world):
        store, graph, registry, packages, swarm = world
        concept, ann_ids, machine_ids = setup_selection(store, graph, registry, packages)
        prev = (0, 0, 0)
        for success in (True, False, False, True, True):
            rec = swarm.record_outcome(concept["id"], ann_ids[0], machine_ids[0], success)
            now = (rec["attempts"], rec["successes"], rec["last_outcome_at"])
            assert now[0] > prev[0] and now[1] >= prev[1] and now[2] > prev[2]
            assert rec["successes"] <= rec["attempts"]
            prev = now

    def test_unknown_entities_rejected(self, world):
        store, graph, registry, packages, swarm = world
        with pytest.raises(UnknownEntity):
            swarm.record_outcome(1, 2, 3, True)


class TestSelection:
    def test_prefers_higher_success_rate(self, world):
        store, graph, registry, packages, swarm = world
        concept, ann_ids, machine_ids = setup_selection(store, graph, registry, packages)
        for _ in range(10):
            swarm.record_outcome(concept["id"], ann_ids[0], machine_ids[0], False)
        for i in range(10):
            swarm.record_outcome(concept["id"], ann_ids[1], machine_ids[0], i < 9)
        assert swarm.select_implementation("door") == (ann_ids[1], machine_ids[0])

    def test_cold_start_lowest_pair(self, world):
        store, graph, registry, packages, swarm = world
        concept, ann_ids, machine_ids = setup_selection(store, graph, registry, packages)
        assert swarm.select_implementation("door") == (min(ann_ids), min(machine_ids))

    def test_retired_ann_excluded(self, world):
        store, graph, registry, packages, swarm = world
        concept, ann_ids, machine_ids = setup_selection(store, graph, registry, packages)
        packages.retire(min(ann_ids))
        selected = swarm.select_implementation("door")
        assert selected[0] == max(ann_ids)

    def test_no_implementation(self, world):
        store, graph, registry, packages, swarm = world
        graph.create_concept("ghost", "")
        with pytest.raises(NoImplementation):
            swarm.select_implementation("ghost")

    @given(st.data())
    @settings(max_examples=40, deadline=None)
    def test_matches_argmax_enumeration(self, data):
        store = Store(None)
        graph = ConceptGraph(store)
        registry = MachineRegistry(store)
        packages = AnnPackages(store)
        swarm = SwarmController(store)
        n_anns = data.draw(st.integers(1, 5))
        n_machines = data.draw(st.integers(1, 5))
        concept, ann_ids, machine_ids = setup_selection(
            store, graph, registry, packages, n_anns, n_machines)
        ledger = {}
        for ann_id, machine_id in itertools.product(ann_ids, machine_ids):
            if data.draw(st.booleans()):
                attempts = data.draw(st.integers(1, 20))
                successes = data.draw(st.integers(0, attempts))
                for i in range(attempts):
                    swarm.record_outcome(concept["id"], ann_id, machine_id, i < successes)
                ledger[(ann_id, machine_id)] = (attempts, successes)
        expected = min(
            itertools.product(ann_ids, machine_ids),
            key=lambda pair: (-efficacy_score(*ledger.get(pair, (0, 0))), pair))
        assert swarm.select_implementation("door") == expected


class TestTasks:
    def test_single_concept_single_machine(self, world):
        store, graph, registry, packages, swarm = world
        concept, ann_ids, machine_ids = setup_selection(
            store, graph, registry, packages, n_anns=1, n_machines=1)
        assignments = swarm.submit_task([{"op": "detect", "concept": "door"}], ["door"])
        assert len(assignments) == 1
        assert assignments[0]["status"] == "queued"
        assert assignments[0]["ann_ids"] == [ann_ids[0]]

    def test_two_concepts_same_machine_grouped(self, world):
        store, graph, registry, packages, swarm = world
        concept, ann_ids, machine_ids = setup_selection(
            store, graph, registry, packages, n_anns=1, n_machines=1)
        knob = graph.create_concept("knob", "")
        pkg = packages.upload("knobdet", encode_network(constant_net(2, 1)))
        graph.map_relation(knob["id"], "ann", pkg["id"], StrengthGrade(0.8, 0.0))
        assignments = swarm.submit_task([{"op": "detect", "concept": "door"}],
                                        ["door", "knob"])
        assert len(assignments) == 1
        assert sorted(assignments[0]["ann_ids"]) == sorted([ann_ids[0], pkg["id"]])

    def test_concept_without_ann_fails(self, world):
        store, graph, registry, packages, swarm = world
        setup_selection(store, graph, registry, packages)
        graph.create_concept("ghost", "")
        with pytest.raises(NoImplementation):
            swarm.submit_task([{"op": "detect", "concept": "ghost"}], ["ghost"])

    def test_empty_script_rejected(self, world):
        store, graph, registry, packages, swarm = world
        with pytest.raises(InvariantViolation):
            swarm.submit_task([], [])

    def test_outbox_drains_atomically(self, world):
        store, graph, registry, packages, swarm = world
        concept, ann_ids, machine_ids = setup_selection(
            store, graph, registry, packages, n_anns=1, n_machines=1)
        swarm.submit_task([{"op": "detect", "concept": "door"}], ["door"])
        first = swarm.drain_outbox(machine_ids[0])
        assert len(first) == 1 and first[0]["status"] == "delivered"
        assert swarm.drain_outbox(machine_ids[0]) == []

    def test_status_never_moves_backward(self, world):
        store, graph, registry, packages, swarm = world
        concept, ann_ids, machine_ids = setup_selection(
            store, graph, registry, packages, n_anns=1, n_machines=1)
        a = swarm.submit_task([{"op": "detect", "concept": "door"}], ["door"])[0]
        swarm.advance_assignment(a["id"], "delivered")
        swarm.advance_assignment(a["id"], "running")
        with pytest.raises(InvalidTransition):
            swarm.advance_assignment(a["id"], "queued")
        swarm.advance_assignment(a["id"], "done")
        with pytest.raises(InvalidTransition):
            swarm.advance_assignment(a["id"], "failed")

    def test_failed_reachable_from_non_terminal(self, world):
        store, graph, registry, packages, swarm = world
        concept, ann_ids, machine_ids = setup_selection(
            store, graph, registry, packages, n_anns=1, n_machines=1)
        a = swarm.submit_task([{"op": "detect", "concept": "door"}], ["door"])[0]
        swarm.advance_assignment(a["id"], "failed")
        assert store.get("assignment", a["id"])["status"] == "failed"

    @given(st.lists(st.sampled_from(["queued", "delivered", "running", "done", "failed"]),
                    max_size=8))
    @settings(max_examples=100, deadline=None)
    def test_state_machine_property(self, transitions):
        order = ["queued", "delivered", "running", "done", "failed"]
        store = Store(None)
        graph = ConceptGraph(store)
        registry = MachineRegistry(store)
        packages = AnnPackages(store)
        swarm = SwarmController(store)
        setup_selection(store, graph, registry, packages, n_anns=1, n_machines=1)
        a = swarm.submit_task([{"op": "detect", "concept": "door"}], ["door"])[0]
        history = ["queued"]
        for target in transitions:
            try:
                swarm.advance_assignment(a["id"], target)
                history.append(target)
            except InvalidTransition:
                pass
        indices = [order.index(s) for s in history]
        assert indices == sorted(indices)


class TestPlanGoto:
    def test_zero_distance(self):
        p = GeoPoint(10.0, 20.0, 5.0)
        assert plan_goto(p, p, 100.0) == [p]

    def test_one_degree_longitude_three_waypoints(self):
        a = GeoPoint(0.0, 0.0)
        b = GeoPoint(0.0, 1.0)
        d = haversine_m(a, b)
        assert d == pytest.approx(111195, abs=1.0)
        waypoints = plan_goto(a, b, 50000.0)
        assert len(waypoints) == 3
        assert waypoints[-1] == b

    def test_altitude_interpolates_linearly(self):
        a = GeoPoint(0.0, 0.0, 0.0)
        b = GeoPoint(0.0, 1.0, 300.0)
        waypoints = plan_goto(a, b, 50000.0)
        assert waypoints[0].alt == pytest.approx(100.0)
        assert waypoints[1].alt == pytest.approx(200.0)
        assert waypoints[2].alt == 300.0

    @given(st.floats(-80, 80), st.floats(-179, 179), st.floats(-80, 80),
           st.floats(-179, 179), st.floats(1000, 500000))
    @settings(max_examples=100, deadline=None)
    def test_spacing_and_monotonic_approach(self, la1, lo1, la2, lo2, step):
        a, b = GeoPoint(la1, lo1), GeoPoint(la2, lo2)
        waypoints = plan_goto(a, b, step)
        assert waypoints[-1] == b
        prev = a
        prev_togo = haversine_m(a, b)
        for w in waypoints:
            assert haversine_m(prev, w) <= step * (1 + 1e-9)
            togo = haversine_m(w, b)
            assert togo <= prev_togo + 1e-6
            prev, prev_togo = w, togo

    def test_bad_step_rejected(self):
        with pytest.raises(InvariantViolation):
            plan_goto(GeoPoint(0, 0), GeoPoint(1, 1), 0.0)
