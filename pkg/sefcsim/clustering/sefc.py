"""Stability-driven multi-hop cluster formation.

One round runs, per node: beacon snapshot, normalized speed/acceleration/energy
differences, the mobility-energy difference (MED) filter, the overall
stability factor (OSF), OSF broadcast, then parent selection. Nodes without a
better-scoring similar neighbor become cluster heads, and every head names its
best-scoring one-hop member as backup.
"""

import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Mapping, Optional, Sequence

from loguru import logger

from sefcsim.core.config import MedWeights, OsfWeights, SimConfig
from sefcsim.core.models import ClusterForest, NeighborRecord, PairwiseDiffs, Role, UavState, Vec3
from sefcsim.utils.helpers import TOLERANCE, argmax_lowest_id, safe_ratio
from sefcsim.utils.types import Adjacency

# A neighbor must beat a node's own OSF by more than this to become its parent.
PARENT_MARGIN = 1e-12


@dataclass(frozen=True)
class ClusteringParams:
    """Protocol knobs of one clustering round."""

    med_weights: MedWeights
    osf_weights: OsfWeights
    med_threshold: float
    direction_cos_threshold: float
    degree_ref: int

    @classmethod
    def from_config(cls, config: SimConfig) -> "ClusteringParams":
        return cls(
            med_weights=config.med_weights,
            osf_weights=config.osf_weights,
            med_threshold=config.med_threshold,
            direction_cos_threshold=config.direction_cos_threshold,
            degree_ref=config.degree_ref,
        )


@dataclass(frozen=True)
class ParentDecision:
    """Outcome of parent selection: a parent id, or ``None`` for self-election."""

    parent: Optional[int] = None

    @property
    def self_ch(self) -> bool:
        return self.parent is None


@dataclass(frozen=True)
class NodeEvaluation:
    """Per-node result of steps ii and iii."""

    node_id: int
    diffs: Mapping[int, PairwiseDiffs]
    meds: Mapping[int, float]
    retained: FrozenSet[int]
    osf: float


def pairwise_diffs(
    self_state: UavState, neighbors: Sequence[NeighborRecord]
) -> Dict[int, PairwiseDiffs]:
    """SD, AD and ED of ``self_state`` against each neighbor, normalized per node.

    ED only counts neighbors with more residual energy; any zero normalizer
    makes the matching ratios 0.
    """
    if not neighbors:
        return {}
    speed = self_state.speed
    accel = self_state.accel_magnitude
    raw = {
        n.neighbor_id: (
            abs(speed - n.speed),
            abs(accel - n.accel_magnitude),
            max(0.0, n.energy - self_state.energy),
        )
        for n in neighbors
    }
    sd_max = max(values[0] for values in raw.values())
    ad_max = max(values[1] for values in raw.values())
    ed_max = max(values[2] for values in raw.values())
    return {
        neighbor_id: PairwiseDiffs(
            sd=safe_ratio(sd, sd_max),
            ad=safe_ratio(ad, ad_max),
            ed=safe_ratio(ed, ed_max),
        )
        for neighbor_id, (sd, ad, ed) in raw.items()
    }


def med(diffs: PairwiseDiffs, w: MedWeights) -> float:
    """MED = c1·SD + c2·AD + c3·(1 − ED)."""
    return w.c1 * diffs.sd + w.c2 * diffs.ad + w.c3 * (1.0 - diffs.ed)


def direction_cosine(a: Vec3, b: Vec3) -> Optional[float]:
    """Cosine of the angle between two headings, ``None`` if either is zero."""
    if a.is_zero() or b.is_zero():
        return None
    return max(-1.0, min(1.0, a.dot(b) / (a.norm() * b.norm())))


def similarity_set(
    self_state: UavState,
    neighbors: Sequence[NeighborRecord],
    meds: Mapping[int, float],
    med_threshold: float,
    direction_cos_threshold: float,
) -> FrozenSet[int]:
    """Neighbors below the MED threshold and inside the heading cone."""
    retained = set()
    for neighbor in neighbors:
        if not meds[neighbor.neighbor_id] < med_threshold - TOLERANCE:
            continue
        cosine = direction_cosine(self_state.velocity, neighbor.velocity)
        if cosine is not None and cosine < direction_cos_threshold - TOLERANCE:
            continue
        retained.add(neighbor.neighbor_id)
    return frozenset(retained)


def osf(
    retained: FrozenSet[int] | set,
    diffs: Mapping[int, PairwiseDiffs],
    distances: Mapping[int, float],
    w: OsfWeights,
    degree_ref: int,
) -> float:
    """Overall stability factor over the retained similarity set (0 when empty)."""
    eligible = sorted(retained)
    degree = len(eligible)
    if degree == 0:
        return 0.0
    d_max = max(distances[j] for j in eligible)
    sd_av = math.fsum(1.0 - diffs[j].sd for j in eligible) / degree
    ad_av = math.fsum(1.0 - diffs[j].ad for j in eligible) / degree
    ed_av = math.fsum(diffs[j].ed for j in eligible) / degree
    d_av = math.fsum(1.0 - safe_ratio(distances[j], d_max) for j in eligible) / degree
    degree_term = min(degree / degree_ref, 1.0)
    return (
        w.alpha * sd_av
        + w.beta * ad_av
        + w.gamma * ed_av
        + w.delta * d_av
        + w.epsilon * degree_term
    )


def select_parent(self_osf: float, candidates: Mapping[int, float]) -> ParentDecision:
    """Highest-OSF candidate strictly above ``self_osf`` (ties → lower id)."""
    better = {
        node_id: score
        for node_id, score in candidates.items()
        if score > self_osf + PARENT_MARGIN
    }
    return ParentDecision(parent=argmax_lowest_id(better))


def elect_bkch(
    ch_id: int, one_hop_members: FrozenSet[int] | set, osfs: Mapping[int, float]
) -> Optional[int]:
    """Backup CH: the one-hop member with the highest score (ties → lower id)."""
    return argmax_lowest_id(
        {member: osfs[member] for member in one_hop_members if member != ch_id}
    )


def evaluate_node(
    state: UavState,
    neighbor_states: Sequence[UavState],
    params: ClusteringParams,
) -> NodeEvaluation:
    """Steps i–iii for one node given the beacons it heard."""
    records = [NeighborRecord.from_beacon(state, other) for other in neighbor_states]
    diffs = pairwise_diffs(state, records)
    meds = {n.neighbor_id: med(diffs[n.neighbor_id], params.med_weights) for n in records}
    retained = similarity_set(
        state, records, meds, params.med_threshold, params.direction_cos_threshold
    )
    distances = {n.neighbor_id: n.distance for n in records}
    score = osf(retained, diffs, distances, params.osf_weights, params.degree_ref)
    return NodeEvaluation(state.id, diffs, meds, retained, score)


def assemble_forest(
    parents: Mapping[int, Optional[int]],
    scores: Mapping[int, float],
    adjacency: Adjacency,
) -> ClusterForest:
    """Roles, cluster roots and backups from per-node parent decisions."""
    parent = {node: p for node, p in parents.items() if p is not None}
    cluster_of: Dict[int, int] = {}
    for node in sorted(parents):
        current = node
        while current in parent:
            current = parent[current]
        cluster_of[node] = current
    role = {node: Role.CM if node in parent else Role.CH for node in parents}

    bkch_of: Dict[int, int] = {}
    for head in sorted(n for n, r in role.items() if r is Role.CH):
        one_hop = {
            m for m in adjacency.get(head, ()) if cluster_of.get(m) == head
        }
        backup = elect_bkch(head, one_hop, scores)
        if backup is not None:
            bkch_of[head] = backup
            role[backup] = Role.BKCH
    return ClusterForest(
        role=role,
        parent=parent,
        cluster_of=cluster_of,
        bkch_of=bkch_of,
        score=dict(scores),
    )


def form_clusters(
    snapshot: Sequence[UavState],
    adjacency: Adjacency,
    params: ClusteringParams,
) -> ClusterForest:
    """Run one full clustering round over ``snapshot``.

    Only nodes present in ``snapshot`` take part, so a sub-snapshot clusters a
    region of the network on its own. Control energy of the two broadcasts is
    charged by the caller through ``comms.broadcast_charges``.
    """
    by_id = {state.id: state for state in snapshot}
    evaluations = {
        node_id: evaluate_node(
            by_id[node_id],
            [by_id[j] for j in sorted(adjacency.get(node_id, ())) if j in by_id],
            params,
        )
        for node_id in sorted(by_id)
    }
    scores = {node_id: ev.osf for node_id, ev in evaluations.items()}
    # OSF broadcast: each node hears its neighbors' scores
    parents = {
        node_id: select_parent(
            ev.osf, {j: scores[j] for j in ev.retained}
        ).parent
        for node_id, ev in evaluations.items()
    }
    forest = assemble_forest(parents, scores, adjacency)
    logger.debug(
        "Clustering round over {} nodes produced {} clusters",
        len(by_id),
        len(forest.heads),
    )
    return forest
