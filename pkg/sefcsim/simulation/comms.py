"""Neighbor discovery, the abstract mesh radio and energy accounting."""

from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from sefcsim.core.config import EnergyModel, RadioConfig
from sefcsim.core.exceptions import PreconditionError, UnknownNodeError
from sefcsim.core.models import ClusterForest, DeliveryOutcome, HopAttempt, Role, UavState, Vec3
from sefcsim.utils.types import Adjacency


class RadioOp(str, Enum):
    TX = "TX"
    RX = "RX"


def compute_adjacency(states: Sequence[UavState], comm_range: float) -> Dict[int, frozenset]:
    """One-hop neighbor sets: i ~ j iff i != j and D(i, j) <= comm_range."""
    positions = np.array([state.position.as_tuple() for state in states], dtype=float)
    return adjacency_from_positions([state.id for state in states], positions, comm_range)


def adjacency_from_positions(
    ids: Sequence[int], positions: np.ndarray, comm_range: float
) -> Dict[int, frozenset]:
    """:func:`compute_adjacency` over an ``(n, 3)`` position array whose rows follow ``ids``."""
    if not len(ids):
        return {}
    delta = positions[:, None, :] - positions[None, :, :]
    distance = np.sqrt(np.sum(delta * delta, axis=-1))
    within = distance <= comm_range
    np.fill_diagonal(within, False)
    return {
        node_id: frozenset(ids[j] for j in np.flatnonzero(within[row]))
        for row, node_id in enumerate(ids)
    }


def energy_cost(kind: RadioOp, bits: float, distance: float, model: EnergyModel) -> float:
    """First-order radio model: TX pays electronics plus d² amplification, RX electronics only."""
    if kind is RadioOp.TX:
        return model.e_elec * bits + model.e_amp * bits * distance * distance
    return model.e_elec * bits


def broadcast_charges(
    states: Mapping[int, UavState],
    adjacency: Adjacency,
    bits: float,
    model: EnergyModel,
) -> Dict[RadioOp, Dict[int, float]]:
    """TX and RX energy of one broadcast by every node in ``states``.

    The sender pays one TX at its farthest-neighbor distance and each neighbor
    pays one RX. Neighbors outside ``states`` neither hear nor pay.
    """
    tx: Dict[int, float] = {node_id: 0.0 for node_id in states}
    rx: Dict[int, float] = {node_id: 0.0 for node_id in states}
    rx_cost = energy_cost(RadioOp.RX, bits, 0.0, model)
    for node_id in sorted(states):
        position = states[node_id].position
        neighbors = [n for n in adjacency.get(node_id, ()) if n in states]
        reach = max((position.distance_to(states[n].position) for n in neighbors), default=0.0)
        tx[node_id] += energy_cost(RadioOp.TX, bits, reach, model)
        for neighbor in neighbors:
            rx[neighbor] += rx_cost
    return {RadioOp.TX: tx, RadioOp.RX: rx}


class EnergyLedger:
    """Residual energy bookkeeping; never lets a residual go below zero."""

    KINDS = ("tx", "rx", "idle")

    def __init__(self, initial: Mapping[int, float]) -> None:
        self.initial: Dict[int, float] = dict(initial)
        self.residual: Dict[int, float] = dict(initial)
        self.totals: Dict[int, Dict[str, float]] = {
            node_id: {kind: 0.0 for kind in self.KINDS} for node_id in initial
        }

    def charge(self, node_id: int, joules: float, kind: str) -> float:
        """Debit up to ``joules``; returns what was actually charged."""
        if joules <= 0.0:
            return 0.0
        charged = min(joules, self.residual[node_id])
        self.residual[node_id] -= charged
        self.totals[node_id][kind] += charged
        return charged

    def charge_map(self, spent: Mapping[int, float], kind: str) -> None:
        for node_id in sorted(spent):
            self.charge(node_id, spent[node_id], kind)

    def charge_attempts(self, attempts: Iterable[HopAttempt]) -> None:
        for attempt in attempts:
            self.charge(attempt.sender, attempt.tx_energy, "tx")
            self.charge(attempt.receiver, attempt.rx_energy, "rx")

    def alive(self, node_id: int) -> bool:
        return self.residual[node_id] > 0.0

    def total_charged(self) -> float:
        return sum(sum(kinds.values()) for kinds in self.totals.values())


def _overlay_neighbors(
    head: int, heads: Sequence[int], forest: ClusterForest, adjacency: Adjacency
) -> List[Tuple[int, List[int]]]:
    """CH-overlay links of ``head``: direct range, or bridged by one gateway member."""
    links = []
    near = adjacency.get(head, frozenset())
    for other in heads:
        if other == head:
            continue
        if other in near:
            links.append((other, [other]))
            continue
        gateways = sorted(
            g
            for g in near & adjacency.get(other, frozenset())
            if forest.role.get(g) is not Role.CH
        )
        if gateways:
            links.append((other, [gateways[0], other]))
    return links


def greedy_overlay_route(
    source_ch: int,
    target_ch: int,
    forest: ClusterForest,
    adjacency: Adjacency,
    positions: Mapping[int, Vec3],
) -> Tuple[List[int], bool]:
    """Greedy geographic forwarding over the CH overlay.

    Returns the node sequence walked from ``source_ch`` and whether it reached
    ``target_ch``; a dead end (no overlay neighbor strictly closer to the
    target) stops the walk.
    """
    route = [source_ch]
    if source_ch == target_ch:
        return route, True
    if source_ch not in positions or target_ch not in positions:
        return route, False
    heads = [h for h in forest.heads if h in positions]
    goal = positions[target_ch]
    current = source_ch
    while current != target_ch:
        best: Optional[Tuple[float, int, List[int]]] = None
        current_distance = positions[current].distance_to(goal)
        for other, hops in _overlay_neighbors(current, heads, forest, adjacency):
            remaining = positions[other].distance_to(goal)
            if remaining >= current_distance:
                continue
            if best is None or (remaining, other) < (best[0], best[1]):
                best = (remaining, other, hops)
        if best is None:
            return route, False
        route.extend(best[2])
        current = best[1]
    return route, True


def _tree_path(src: int, dst: int, forest: ClusterForest) -> List[int]:
    """Path between two members of one cluster through their lowest common ancestor."""
    up_src = forest.chain_to_root(src)
    up_dst = forest.chain_to_root(dst)
    on_dst_side = {node: index for index, node in enumerate(up_dst)}
    for index, node in enumerate(up_src):
        if node in on_dst_side:
            return up_src[: index + 1] + list(reversed(up_dst[: on_dst_side[node]]))
    raise ValueError(f"Nodes {src} and {dst} do not share a cluster root")


def plan_route(
    src: int,
    dst: int,
    forest: ClusterForest,
    adjacency: Adjacency,
    positions: Mapping[int, Vec3],
) -> Tuple[List[int], bool]:
    """Hierarchical route: up to the CH, across the overlay, down to ``dst``."""
    if forest.cluster_of[src] == forest.cluster_of[dst]:
        return _tree_path(src, dst, forest), True
    up = forest.chain_to_root(src)
    across, reached = greedy_overlay_route(
        up[-1], forest.cluster_of[dst], forest, adjacency, positions
    )
    if not reached:
        return up + across[1:], False
    down = list(reversed(forest.chain_to_root(dst)))
    return up + across[1:] + down[1:], True


def route_packet(
    src: int,
    dst: int,
    forest: ClusterForest,
    adjacency: Adjacency,
    positions: Mapping[int, Vec3],
    radio: RadioConfig,
    energy_model: EnergyModel,
    rng: np.random.Generator,
    bits: Optional[int] = None,
) -> DeliveryOutcome:
    """Send one packet hop by hop with independent loss and bounded retries.

    A hop whose link no longer exists (receiver dead or out of range) fails
    every attempt without a loss draw; the sender still pays TX at full range.
    A dead relay on the path drops the packet without transmitting.
    """
    if src == dst:
        raise PreconditionError("route_packet requires src != dst")
    for node_id in (src, dst):
        if node_id not in positions or node_id not in forest.cluster_of:
            raise UnknownNodeError(f"Unknown or dead node id: {node_id}")

    bits = radio.data_bits if bits is None else bits
    path, reachable = plan_route(src, dst, forest, adjacency, positions)
    attempts: List[HopAttempt] = []
    spent: Dict[int, float] = {}
    delay = 0.0
    hops = 0
    retransmissions = 0

    for sender, receiver in zip(path, path[1:]):
        if sender not in positions:
            # a dead relay holds the packet
            reachable = False
            break
        link_up = receiver in adjacency.get(sender, frozenset())
        distance = (
            positions[sender].distance_to(positions[receiver])
            if link_up
            else radio.comm_range
        )
        tx = energy_cost(RadioOp.TX, bits, distance, energy_model)
        rx = energy_cost(RadioOp.RX, bits, distance, energy_model) if link_up else 0.0
        success = False
        for attempt in range(radio.max_retransmissions + 1):
            if attempt > 0:
                retransmissions += 1
            delay += radio.per_hop_latency
            success = link_up and bool(rng.random() >= radio.loss_prob)
            attempts.append(HopAttempt(sender, receiver, distance, success, tx, rx))
            spent[sender] = spent.get(sender, 0.0) + tx
            if rx:
                spent[receiver] = spent.get(receiver, 0.0) + rx
            if success:
                break
        if not success:
            logger.trace("Packet {}->{} dropped at hop {}->{}", src, dst, sender, receiver)
            return DeliveryOutcome(
                delivered=False,
                delay=delay,
                hops=hops,
                retransmissions=retransmissions,
                energy_spent=spent,
                path=tuple(path),
                attempts=tuple(attempts),
            )
        hops += 1

    return DeliveryOutcome(
        delivered=reachable,
        delay=delay,
        hops=hops,
        retransmissions=retransmissions,
        energy_spent=spent,
        path=tuple(path),
        attempts=tuple(attempts),
    )
