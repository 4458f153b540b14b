"""Ground-station-assisted cluster maintenance.

While the ground station is on duty it re-scores the clusters whose head is in
range using only their members, hands the head role to a clearly better
member, and orders re-clustering of clusters whose mean score has collapsed.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Set, Tuple

from loguru import logger

from sefcsim.clustering.sefc import ClusteringParams, elect_bkch, osf, pairwise_diffs
from sefcsim.core.config import GsConfig
from sefcsim.core.exceptions import PreconditionError
from sefcsim.core.models import ClusterForest, NeighborRecord, Role, UavState
from sefcsim.utils.helpers import TOLERANCE
from sefcsim.utils.types import Adjacency


@dataclass(frozen=True)
class HandoverDecision:
    old_ch: int
    new_ch: int
    old_osf: float
    new_osf: float


@dataclass(frozen=True)
class MaintenanceReport:
    """What one ground-station check changed or requested."""

    forest: ClusterForest
    handovers: Tuple[HandoverDecision, ...] = ()
    recluster: FrozenSet[int] = frozenset()
    mean_osf: Mapping[int, float] = field(default_factory=dict)


def gs_on_duty(gs: GsConfig, tick: int, tick_dt: float) -> bool:
    """Deterministic square wave: on for the first ``duty_cycle`` of each period."""
    period_ticks = max(1, int(round(gs.duty_period / tick_dt)))
    on_ticks = int(round(gs.duty_cycle * period_ticks))
    return tick % period_ticks < on_ticks


def nodes_in_gs_range(
    states: Sequence[UavState], gs: GsConfig, tick: int, tick_dt: float
) -> FrozenSet[int]:
    """Nodes within the ground station's range, or none while it is off duty."""
    if not gs_on_duty(gs, tick, tick_dt):
        return frozenset()
    return frozenset(
        state.id for state in states if state.position.distance_to(gs.position) <= gs.range
    )


def reevaluate_cluster_osf(
    cluster_members: Set[int] | FrozenSet[int],
    snapshot: Mapping[int, UavState],
    params: ClusteringParams,
) -> Dict[int, float]:
    """OSF of each member with fellow members as its only, unfiltered, neighbors."""
    scores = {}
    members = sorted(cluster_members)
    for node_id in members:
        state = snapshot[node_id]
        records = [
            NeighborRecord.from_beacon(state, snapshot[other])
            for other in members
            if other != node_id
        ]
        diffs = pairwise_diffs(state, records)
        distances = {r.neighbor_id: r.distance for r in records}
        scores[node_id] = osf(
            frozenset(distances), diffs, distances, params.osf_weights, params.degree_ref
        )
    return scores


def _handover_candidate(backup: Optional[int], osf_map: Mapping[int, float]) -> int:
    """Highest score; on exact ties the BKCH, then the lowest id."""
    top = max(osf_map.values())
    tied = sorted(node for node, score in osf_map.items() if score == top)
    if backup in tied:
        return backup
    return tied[0]


def apply_handover(
    forest: ClusterForest,
    ch_id: int,
    osf_map: Mapping[int, float],
    handover_margin: float,
    adjacency: Adjacency,
) -> Tuple[ClusterForest, Optional[HandoverDecision]]:
    """Move the CH role of cluster ``ch_id`` to a member scoring at least ``(1 + margin)`` times more.

    Membership never changes: the tree edges between the old and the new CH
    are reversed so every parent chain ends at the new head.
    """
    best = _handover_candidate(forest.bkch_of.get(ch_id), osf_map)
    current = osf_map.get(ch_id, 0.0)
    if best == ch_id or osf_map[best] < current * (1.0 + handover_margin) - TOLERANCE:
        return forest, None

    parent = dict(forest.parent)
    path = forest.chain_to_root(best)
    for child, up in zip(path, path[1:]):
        parent[up] = child
    parent.pop(best, None)

    members = forest.members(ch_id)
    cluster_of = dict(forest.cluster_of)
    role = dict(forest.role)
    for member in members:
        cluster_of[member] = best
        if member != best:
            role[member] = Role.CM
    role[best] = Role.CH

    bkch_of = {h: b for h, b in forest.bkch_of.items() if h != ch_id}
    score = {**forest.score, **osf_map}
    one_hop = {m for m in adjacency.get(best, ()) if m in osf_map and cluster_of.get(m) == best}
    backup = elect_bkch(best, one_hop, score)
    if backup is not None:
        bkch_of[best] = backup
        role[backup] = Role.BKCH

    decision = HandoverDecision(ch_id, best, current, osf_map[best])
    logger.debug("Handover {} -> {} ({:.4f} -> {:.4f})", ch_id, best, current, osf_map[best])
    return (
        ClusterForest(
            role=role, parent=parent, cluster_of=cluster_of, bkch_of=bkch_of, score=score
        ),
        decision,
    )


def recluster_decision(osf_map: Mapping[int, float], recluster_threshold: float) -> bool:
    """True iff the mean score is strictly below the threshold."""
    if not osf_map:
        raise PreconditionError("recluster_decision needs a non-empty OSF map")
    mean = math.fsum(osf_map.values()) / len(osf_map)
    return mean < recluster_threshold - TOLERANCE


def run_maintenance(
    forest: ClusterForest,
    alive: Mapping[int, UavState],
    adjacency: Adjacency,
    gs: GsConfig,
    params: ClusteringParams,
    handover_margin: float,
    recluster_threshold: float,
    tick: int,
    tick_dt: float,
) -> MaintenanceReport:
    """One ground-station check over every cluster whose CH is in range."""
    in_range = nodes_in_gs_range(list(alive.values()), gs, tick, tick_dt)
    heads = [h for h in forest.heads if h in in_range]
    if not heads:
        return MaintenanceReport(forest=forest)

    handovers: List[HandoverDecision] = []
    flagged = set()
    means: Dict[int, float] = {}
    for head in heads:
        members = {m for m in forest.members(head) if m in in_range and m in alive}
        scores = reevaluate_cluster_osf(members, alive, params)
        forest, decision = apply_handover(forest, head, scores, handover_margin, adjacency)
        cluster_id = head
        if decision is not None:
            handovers.append(decision)
            cluster_id = decision.new_ch
        means[cluster_id] = math.fsum(scores.values()) / len(scores)
        if recluster_decision(scores, recluster_threshold):
            flagged.add(cluster_id)
    if flagged:
        logger.debug("Ground station requests re-clustering of {}", sorted(flagged))
    return MaintenanceReport(
        forest=forest,
        handovers=tuple(handovers),
        recluster=frozenset(flagged),
        mean_osf=means,
    )
