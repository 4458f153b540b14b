import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import adjacency_oracle, radio_oracle, route_oracle
from scenarios import load_fixture, positions_from
from sefcsim.core.config import EnergyModel, RadioConfig
from sefcsim.core.exceptions import PreconditionError, UnknownNodeError
from sefcsim.core.models import ClusterForest, Role, UavState, Vec3
from sefcsim.simulation.comms import (
    EnergyLedger,
    RadioOp,
    broadcast_charges,
    compute_adjacency,
    energy_cost,
    greedy_overlay_route,
    plan_route,
    route_packet,
)
from sefcsim.utils.rng import Stream, stream
from strategies import snapshots


def _at(node, x, y=0.0, z=0.0, energy=100.0):
    return UavState(node, Vec3(x, y, z), Vec3.zero(), Vec3.zero(), energy)


def _forest(heads, parent):
    role = {h: Role.CH for h in heads}
    role.update({n: Role.CM for n in parent})
    cluster_of = {}
    for node in role:
        current = node
        while current in parent:
            current = parent[current]
        cluster_of[node] = current
    return ClusterForest(role=role, parent=dict(parent), cluster_of=cluster_of)


def _r1():
    data = load_fixture("r1_two_clusters")
    positions = positions_from(data["positions"])
    states = [UavState(n, p, Vec3.zero(), Vec3.zero(), 100.0) for n, p in positions.items()]
    adjacency = compute_adjacency(states, data["comm_range"])
    parent = {int(k): int(v) for k, v in data["parent"].items()}
    return data, positions, adjacency, _forest(data["heads"], parent), parent


def test_nodes_exactly_at_range_are_adjacent():
    adjacency = compute_adjacency([_at(1, 0.0), _at(2, 400.0)], 400.0)

    assert adjacency == {1: {2}, 2: {1}}


def test_single_node_has_no_neighbors():
    assert compute_adjacency([_at(7, 10.0)], 400.0) == {7: frozenset()}
    assert compute_adjacency([], 400.0) == {}


def test_a1_matches_pairwise_oracle():
    data = load_fixture("a1_adjacency")
    positions = positions_from(data["positions"])
    states = [UavState(n, p, Vec3.zero(), Vec3.zero(), 1.0) for n, p in positions.items()]

    adjacency = compute_adjacency(states, data["comm_range"])

    assert {n: set(ns) for n, ns in adjacency.items()} == adjacency_oracle(positions, data["comm_range"])
    assert 5 in adjacency[0]


@settings(max_examples=300, deadline=None)
@given(states=snapshots(max_size=30), comm_range=st.floats(min_value=1.0, max_value=800.0))
def test_adjacency_is_symmetric_and_matches_brute_force(states, comm_range):
    adjacency = compute_adjacency(states, comm_range)

    expected = adjacency_oracle({s.id: s.position for s in states}, comm_range)
    assert {n: set(ns) for n, ns in adjacency.items()} == expected
    for node, neighbors in adjacency.items():
        assert node not in neighbors
        assert all(node in adjacency[other] for other in neighbors)


def test_energy_cost_examples():
    model = EnergyModel(e_elec=5e-8, e_amp=1e-10)

    assert energy_cost(RadioOp.TX, 0, 250.0, model) == 0.0
    assert energy_cost(RadioOp.RX, 0, 250.0, model) == 0.0
    assert energy_cost(RadioOp.TX, 2000, 100.0, model) == pytest.approx(
        radio_oracle(True, 2000, 100.0, 5e-8, 1e-10)
    )
    assert energy_cost(RadioOp.TX, 2000, 100.0, model) == pytest.approx(2.1e-3)
    assert energy_cost(RadioOp.RX, 2000, 100.0, model) == pytest.approx(1e-4)


def test_broadcast_charges_sender_at_farthest_neighbor():
    model = EnergyModel()
    states = {1: _at(1, 0.0), 2: _at(2, 100.0), 3: _at(3, 300.0)}
    adjacency = compute_adjacency(list(states.values()), 400.0)

    charges = broadcast_charges(states, adjacency, 512, model)

    assert charges[RadioOp.TX][1] == pytest.approx(energy_cost(RadioOp.TX, 512, 300.0, model))
    assert charges[RadioOp.TX][2] == pytest.approx(energy_cost(RadioOp.TX, 512, 200.0, model))
    assert charges[RadioOp.RX][1] == pytest.approx(2 * energy_cost(RadioOp.RX, 512, 0.0, model))
    assert charges[RadioOp.RX][3] == pytest.approx(energy_cost(RadioOp.RX, 512, 0.0, model) * 2)


def test_ledger_never_goes_negative():
    ledger = EnergyLedger({1: 1.0, 2: 5.0})

    assert ledger.charge(1, 3.0, "tx") == 1.0
    ledger.charge(2, 0.5, "idle")

    assert ledger.residual == {1: 0.0, 2: 4.5}
    assert not ledger.alive(1)
    assert ledger.total_charged() == pytest.approx(1.5)
    assert ledger.totals[1] == {"tx": 1.0, "rx": 0.0, "idle": 0.0}


def test_lossless_same_cluster_route():
    states = [_at(0, 0.0), _at(1, 150.0), _at(2, 300.0)]
    adjacency = compute_adjacency(states, 400.0)
    forest = _forest([0], {1: 0, 2: 1})
    radio = RadioConfig(comm_range=400.0, loss_prob=0.0, per_hop_latency=0.002)

    outcome = route_packet(
        2, 0, forest, adjacency, {s.id: s.position for s in states}, radio, EnergyModel(),
        stream(1, Stream.RADIO),
    )

    assert outcome.delivered
    assert outcome.path == (2, 1, 0)
    assert outcome.hops == 2
    assert outcome.retransmissions == 0
    assert outcome.delay == pytest.approx(2 * 0.002, abs=1e-15)


def test_sibling_route_turns_at_the_common_ancestor():
    forest = _forest([0], {1: 0, 2: 1, 3: 1, 4: 0})

    assert plan_route(2, 3, forest, {}, {})[0] == [2, 1, 3]
    assert plan_route(2, 4, forest, {}, {})[0] == [2, 1, 0, 4]


def test_hopeless_links_never_deliver():
    states = [_at(0, 0.0), _at(1, 100.0)]
    adjacency = compute_adjacency(states, 400.0)
    forest = _forest([0], {1: 0})
    radio = RadioConfig(comm_range=400.0, loss_prob=0.999999, max_retransmissions=0)
    rng = stream(3, Stream.RADIO)
    positions = {s.id: s.position for s in states}

    delivered = sum(
        route_packet(1, 0, forest, adjacency, positions, radio, EnergyModel(), rng).delivered
        for _ in range(500)
    )

    assert delivered <= 2


def test_r1_matches_route_oracle():
    data, positions, adjacency, forest, parent = _r1()
    packet = data["packet"]
    radio = RadioConfig(comm_range=data["comm_range"], loss_prob=packet["loss_prob"])

    outcome = route_packet(
        packet["src"], packet["dst"], forest, adjacency, positions, radio, EnergyModel(),
        stream(packet["seed"], Stream.RADIO),
    )
    expected = route_oracle(
        packet["src"], packet["dst"], parent, data["heads"], adjacency,
        radio.per_hop_latency, radio.loss_prob, radio.max_retransmissions,
        stream(packet["seed"], Stream.RADIO),
    )

    assert list(outcome.path) == expected["path"] == data["expected_path"]
    assert outcome.delivered == expected["delivered"]
    assert outcome.hops == expected["hops"]
    assert outcome.retransmissions == expected["retx"]
    assert outcome.delay == pytest.approx(expected["delay"], abs=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_r1_energy_matches_attempts(seed):
    data, positions, adjacency, forest, parent = _r1()
    radio = RadioConfig(comm_range=400.0, loss_prob=0.4)
    model = EnergyModel()

    outcome = route_packet(4, 8, forest, adjacency, positions, radio, model, stream(seed, Stream.RADIO))

    assert math.fsum(outcome.energy_spent.values()) == pytest.approx(
        math.fsum(a.tx_energy + a.rx_energy for a in outcome.attempts)
    )
    assert len(outcome.attempts) == outcome.hops + outcome.retransmissions + (not outcome.delivered)
    assert outcome.delay == pytest.approx(len(outcome.attempts) * radio.per_hop_latency)


def test_overlay_uses_lowest_id_gateway():
    _, positions, adjacency, forest, _ = _r1()

    route, reached = greedy_overlay_route(0, 6, forest, adjacency, positions)

    assert reached
    assert route == [0, 2, 6]


def test_greedy_dead_end_fails():
    # head 5 is farther from 9 than head 0 and nobody bridges 0 and 9
    positions = {0: Vec3(0.0, 0.0, 0.0), 5: Vec3(-300.0, 0.0, 0.0), 9: Vec3(2000.0, 0.0, 0.0)}
    states = [UavState(n, p, Vec3.zero(), Vec3.zero(), 1.0) for n, p in positions.items()]
    adjacency = compute_adjacency(states, 400.0)
    forest = _forest([0, 5, 9], {})

    route, reached = greedy_overlay_route(0, 9, forest, adjacency, positions)
    outcome = route_packet(
        0, 9, forest, adjacency, positions, RadioConfig(comm_range=400.0), EnergyModel(),
        stream(0, Stream.RADIO),
    )

    assert (route, reached) == ([0], False)
    assert not outcome.delivered
    assert outcome.attempts == ()


def test_dead_end_still_charges_the_climb_to_the_head():
    positions = {
        0: Vec3(0.0, 0.0, 0.0),
        1: Vec3(100.0, 0.0, 0.0),
        5: Vec3(-300.0, 0.0, 0.0),
        9: Vec3(2000.0, 0.0, 0.0),
    }
    states = [UavState(n, p, Vec3.zero(), Vec3.zero(), 1.0) for n, p in positions.items()]
    adjacency = compute_adjacency(states, 400.0)
    forest = _forest([0, 5, 9], {1: 0})
    radio = RadioConfig(comm_range=400.0, loss_prob=0.0)

    outcome = route_packet(1, 9, forest, adjacency, positions, radio, EnergyModel(), stream(0, Stream.RADIO))

    assert not outcome.delivered
    assert outcome.path == (1, 0)
    assert [(a.sender, a.receiver, a.success) for a in outcome.attempts] == [(1, 0, True)]
    assert set(outcome.energy_spent) == {0, 1}


def test_broken_tree_link_fails_every_attempt_at_full_range():
    positions = {0: Vec3(0.0, 0.0, 0.0), 1: Vec3(900.0, 0.0, 0.0)}
    forest = _forest([0], {1: 0})
    radio = RadioConfig(comm_range=400.0, loss_prob=0.0, max_retransmissions=2)
    model = EnergyModel()

    outcome = route_packet(1, 0, forest, {0: frozenset(), 1: frozenset()}, positions, radio, model, stream(0, Stream.RADIO))

    assert not outcome.delivered
    assert len(outcome.attempts) == 3
    assert all(a.rx_energy == 0.0 and not a.success for a in outcome.attempts)
    assert outcome.energy_spent == {1: pytest.approx(3 * energy_cost(RadioOp.TX, radio.data_bits, 400.0, model))}


def test_route_preconditions():
    forest = _forest([0], {1: 0})
    positions = {0: Vec3.zero(), 1: Vec3(10.0, 0.0, 0.0)}
    args = (forest, {0: frozenset({1}), 1: frozenset({0})}, positions, RadioConfig(comm_range=400.0), EnergyModel(), stream(0, Stream.RADIO))

    with pytest.raises(PreconditionError):
        route_packet(1, 1, *args)
    with pytest.raises(UnknownNodeError):
        route_packet(1, 42, *args)
