import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ch_duration_oracle, delay_oracle, energy_oracle, switches_oracle
from scenarios import load_fixture
from sefcsim.core.exceptions import PreconditionError
from sefcsim.core.models import (
    DeliveryOutcome,
    EnergyLog,
    MembershipChange,
    Role,
    RoleInterval,
    RunArtifacts,
)
from sefcsim.metrics import (
    avg_ch_duration,
    avg_cm_switches,
    avg_end_to_end_delay,
    avg_energy_consumption,
    delivery_ratio,
    summarize,
)


def _outcome(delivered, delay, hops=1):
    return DeliveryOutcome(delivered=delivered, delay=delay, hops=hops, retransmissions=0)


def _energy(initial, final):
    node_ids = tuple(range(len(initial)))
    return EnergyLog(node_ids=node_ids, initial=tuple(initial), times=(1.0,), residual=(tuple(final),))


def test_no_deliveries_give_no_delay():
    assert avg_end_to_end_delay([]) is None
    assert avg_end_to_end_delay([_outcome(False, 0.01)]) is None
    assert delivery_ratio([]) is None


def test_delay_averages_delivered_packets_only():
    outcomes = [_outcome(True, 0.02), _outcome(True, 0.06), _outcome(False, 0.5)]

    assert avg_end_to_end_delay(outcomes) == pytest.approx(0.04)
    assert delivery_ratio(outcomes) == pytest.approx(2 / 3)


def test_energy_example():
    assert avg_energy_consumption(_energy([10.0, 10.0], [9.0, 7.0]), 2) == pytest.approx(2.0)


def test_energy_needs_a_uav():
    with pytest.raises(PreconditionError):
        avg_energy_consumption(_energy([], []), 0)
    with pytest.raises(PreconditionError):
        avg_cm_switches([], 0)


def test_ch_duration_examples():
    tenures = [RoleInterval(0, Role.CH, 0.0, 10.0), RoleInterval(1, Role.CH, 10.0, 40.0)]

    assert avg_ch_duration(tenures, 60.0) == pytest.approx(20.0)
    assert avg_ch_duration([RoleInterval(0, Role.CH, 0.0, None)], 300.0) == pytest.approx(300.0)
    assert avg_ch_duration([RoleInterval(0, Role.CM, 0.0, None)], 300.0) is None


def test_switch_example():
    changes = [
        MembershipChange(0, None, 0, 0.0),
        MembershipChange(0, 0, 3, 5.0),
        MembershipChange(0, 3, 0, 9.0),
    ]

    assert avg_cm_switches(changes, 4) == pytest.approx(0.5)


def test_l1_deliveries():
    records = load_fixture("l1_deliveries")["outcomes"]
    outcomes = [_outcome(r["delivered"], r["delay"], r["hops"]) for r in records]

    assert avg_end_to_end_delay(outcomes) == pytest.approx(delay_oracle([(r["delivered"], r["delay"]) for r in records]))
    assert avg_end_to_end_delay(outcomes) == pytest.approx(0.009)
    assert delivery_ratio(outcomes) == pytest.approx(0.7)


def test_l2_energy():
    data = load_fixture("l2_energy")
    nodes = data["nodes"]
    initial = [n["initial"] for n in nodes]
    final = [n["final"] for n in nodes]
    log = _energy(initial, final)

    assert avg_energy_consumption(log, data["n_uavs"]) == pytest.approx(energy_oracle(initial, final, data["n_uavs"]))
    assert avg_energy_consumption(log, data["n_uavs"]) == pytest.approx(7.1875)
    for node, consumed in log.consumed().items():
        assert consumed == pytest.approx(sum(nodes[node]["ledger"].values()))


def test_l3_roles():
    data = load_fixture("l3_roles")
    intervals = data["intervals"]
    role_log = [RoleInterval(i["node"], Role(i["role"]), i["t_start"], i["t_end"]) for i in intervals]

    expected = ch_duration_oracle([(i["role"], i["t_start"], i["t_end"]) for i in intervals], data["sim_end"])
    assert avg_ch_duration(role_log, data["sim_end"]) == pytest.approx(expected)
    assert avg_ch_duration(role_log, data["sim_end"]) == pytest.approx(20.25)


def test_l4_membership():
    data = load_fixture("l4_membership")
    changes = data["changes"]
    log = [MembershipChange(c["node"], c["old"], c["new"], c["t"]) for c in changes]

    assert avg_cm_switches(log, data["n_uavs"]) == pytest.approx(
        switches_oracle([(c["old"], c["new"]) for c in changes], data["n_uavs"])
    )
    assert avg_cm_switches(log, data["n_uavs"]) == pytest.approx(1.0)


def test_summarize_collects_every_metric():
    artifacts = RunArtifacts(sim_end=10.0, n_uavs=2)
    artifacts.energy_log = _energy([5.0, 5.0], [4.0, 4.5])
    artifacts.role_log = [RoleInterval(0, Role.CH, 0.0, 10.0), RoleInterval(1, Role.CM, 0.0, 10.0)]
    artifacts.membership_log = [MembershipChange(0, None, 0, 0.0), MembershipChange(1, None, 0, 0.0)]

    summary = summarize(artifacts)

    assert summary.avg_delay is None
    assert summary.delivery_ratio is None
    assert summary.avg_energy == pytest.approx(0.75)
    assert summary.avg_ch_duration == pytest.approx(10.0)
    assert summary.avg_cm_switches == 0.0


delays = st.floats(min_value=0.0, max_value=5.0, allow_nan=False)
times = st.floats(min_value=0.0, max_value=100.0, allow_nan=False)
clusters = st.one_of(st.none(), st.integers(0, 5))


@settings(max_examples=500, deadline=None)
@given(
    outcomes=st.lists(st.tuples(st.booleans(), delays), max_size=40),
    tenures=st.lists(
        st.tuples(st.sampled_from(["CH", "CM", "BKCH"]), times, st.one_of(st.none(), times)),
        max_size=30,
    ),
    changes=st.lists(st.tuples(clusters, st.integers(0, 5)), max_size=30),
    energy=st.lists(st.tuples(times, times), min_size=1, max_size=20),
)
def test_metrics_match_oracles_on_random_logs(outcomes, tenures, changes, energy):
    sim_end = 100.0
    tenures = [(role, start, end if end is None or end >= start else start) for role, start, end in tenures]
    energy = [(max(a, b), min(a, b)) for a, b in energy]
    n_uavs = len(energy)

    delay = avg_end_to_end_delay([_outcome(d, t) for d, t in outcomes])
    duration = avg_ch_duration([RoleInterval(0, Role(r), s, e) for r, s, e in tenures], sim_end)
    switches = avg_cm_switches([MembershipChange(0, old, new, 0.0) for old, new in changes], n_uavs)
    consumed = avg_energy_consumption(_energy(*zip(*energy)), n_uavs)

    expected_delay = delay_oracle(outcomes)
    expected_duration = ch_duration_oracle(tenures, sim_end)
    assert (delay is None) == (expected_delay is None)
    if delay is not None:
        assert delay == pytest.approx(expected_delay, abs=1e-12)
    assert (duration is None) == (expected_duration is None)
    if duration is not None:
        assert duration == pytest.approx(expected_duration, abs=1e-9)
    assert switches == pytest.approx(switches_oracle(changes, n_uavs))
    assert consumed == pytest.approx(energy_oracle(*zip(*energy), n_uavs), abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(data=st.data(), outcomes=st.lists(st.tuples(st.booleans(), delays), min_size=1, max_size=30))
def test_metrics_ignore_log_order(data, outcomes):
    shuffled = data.draw(st.permutations(outcomes))

    original = [_outcome(d, t) for d, t in outcomes]
    reordered = [_outcome(d, t) for d, t in shuffled]

    assert delivery_ratio(original) == delivery_ratio(reordered)
    assert avg_end_to_end_delay(original) == avg_end_to_end_delay(reordered)
