"""One-hop comparison clustering: PICA-lite and OSCA-lite.

PICA-lite scores nodes on relative mobility and residual energy and refuses
heads closer than a safe distance. OSCA-lite ranks nodes on degree and
residual energy and, between rounds, promotes a backup in place of a failed
or departed head.
"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

from loguru import logger

from sefcsim.clustering.sefc import elect_bkch
from sefcsim.core.config import BaselineParams
from sefcsim.core.models import ClusterForest, Role, UavState
from sefcsim.utils.helpers import clamp_unit, safe_ratio
from sefcsim.utils.types import Adjacency


@dataclass(frozen=True)
class Promotion:
    """A backup took over a head that died or left its cluster."""

    old_ch: int
    new_ch: Optional[int]


def _outranks(a: int, b: int, scores: Mapping[int, float]) -> bool:
    return (scores[a], -a) > (scores[b], -b)


def _normalized_energy(node: int, neighbors: Sequence[int], by_id: Mapping[int, UavState]) -> float:
    """Residual energy relative to the richest node of the closed neighborhood."""
    peak = max([by_id[node].energy, *(by_id[n].energy for n in neighbors)])
    return safe_ratio(by_id[node].energy, peak)


def _neighbors(node: int, adjacency: Adjacency, by_id: Mapping[int, UavState]) -> List[int]:
    return sorted(n for n in adjacency.get(node, ()) if n in by_id)


def one_hop_forest(
    candidates: Mapping[int, Sequence[int]],
    scores: Mapping[int, float],
    adjacency: Adjacency,
) -> ClusterForest:
    """Local score maxima head clusters; the rest join their best candidate head.

    ``candidates[n]`` lists the neighbors ``n`` may accept as head. A node with
    no better candidate, or with no candidate that is a head, leads its own
    cluster.
    """
    heads = {
        node
        for node, options in candidates.items()
        if not any(_outranks(other, node, scores) for other in options)
    }
    parent: Dict[int, int] = {}
    for node in sorted(candidates):
        if node in heads:
            continue
        options = [c for c in candidates[node] if c in heads]
        if options:
            parent[node] = max(options, key=lambda c: (scores[c], -c))
        else:
            heads.add(node)
    return _with_backups(heads, parent, scores, adjacency)


def _with_backups(
    heads: Set[int],
    parent: Mapping[int, int],
    scores: Mapping[int, float],
    adjacency: Adjacency,
) -> ClusterForest:
    role = {node: Role.CH for node in heads}
    role.update({node: Role.CM for node in parent})
    cluster_of = {node: node for node in heads}
    cluster_of.update(parent)
    bkch_of: Dict[int, int] = {}
    for head in sorted(heads):
        one_hop = {m for m, p in parent.items() if p == head and m in adjacency.get(head, ())}
        backup = elect_bkch(head, one_hop, scores)
        if backup is not None:
            bkch_of[head] = backup
            role[backup] = Role.BKCH
    return ClusterForest(
        role=role,
        parent=dict(parent),
        cluster_of=cluster_of,
        bkch_of=bkch_of,
        score=dict(scores),
    )


def pica_scores(
    snapshot: Sequence[UavState],
    adjacency: Adjacency,
    params: BaselineParams,
    max_speed: float,
) -> Dict[int, float]:
    """w_m·(1 − relative mobility) + w_e·normalized energy per node."""
    by_id = {state.id: state for state in snapshot}
    scores = {}
    for node in sorted(by_id):
        neighbors = _neighbors(node, adjacency, by_id)
        velocity = by_id[node].velocity
        relative = [(velocity - by_id[n].velocity).norm() / (2.0 * max_speed) for n in neighbors]
        mobility = clamp_unit(sum(relative) / len(relative)) if relative else 0.0
        scores[node] = params.pica_mobility_weight * (
            1.0 - mobility
        ) + params.pica_energy_weight * _normalized_energy(node, neighbors, by_id)
    return scores


def pica_lite_round(
    snapshot: Sequence[UavState],
    adjacency: Adjacency,
    params: BaselineParams,
    max_speed: float,
) -> ClusterForest:
    """One-hop clustering on mobility and energy with a safe-distance veto.

    A neighbor closer than ``safe_distance`` is an unsafe link and never
    counts as a head candidate.
    """
    by_id = {state.id: state for state in snapshot}
    scores = pica_scores(snapshot, adjacency, params, max_speed)
    candidates = {
        node: [
            n
            for n in _neighbors(node, adjacency, by_id)
            if by_id[node].position.distance_to(by_id[n].position) >= params.safe_distance
        ]
        for node in sorted(by_id)
    }
    forest = one_hop_forest(candidates, scores, adjacency)
    logger.debug("PICA-lite round produced {} clusters", len(forest.heads))
    return forest


def osca_priorities(
    snapshot: Sequence[UavState],
    adjacency: Adjacency,
    params: BaselineParams,
    degree_ref: int,
) -> Dict[int, float]:
    """w_d·clamped normalized degree + w_e·normalized energy per node."""
    by_id = {state.id: state for state in snapshot}
    priorities = {}
    for node in sorted(by_id):
        neighbors = _neighbors(node, adjacency, by_id)
        degree = min(len(neighbors) / degree_ref, 1.0)
        priorities[node] = params.osca_degree_weight * degree + params.osca_energy_weight * _normalized_energy(
            node, neighbors, by_id
        )
    return priorities


def osca_lite_round(
    snapshot: Sequence[UavState],
    adjacency: Adjacency,
    params: BaselineParams,
    degree_ref: int,
) -> ClusterForest:
    """One-hop clustering on degree and residual energy."""
    by_id = {state.id: state for state in snapshot}
    priorities = osca_priorities(snapshot, adjacency, params, degree_ref)
    candidates = {node: _neighbors(node, adjacency, by_id) for node in sorted(by_id)}
    forest = one_hop_forest(candidates, priorities, adjacency)
    logger.debug("OSCA-lite round produced {} clusters", len(forest.heads))
    return forest


def osca_repair(
    forest: ClusterForest,
    alive: Mapping[int, UavState],
    adjacency: Adjacency,
) -> Tuple[ClusterForest, List[Promotion]]:
    """Promote backups of heads that died or lost contact with every member.

    Members in range of the promoted backup stay in the cluster; the others
    join the best head in range or lead their own cluster. The promoted head
    then names a new backup. Nodes already dead are dropped.
    """
    role = {n: r for n, r in forest.role.items() if n in alive}
    parent = {n: p for n, p in forest.parent.items() if n in alive}
    cluster_of = {n: c for n, c in forest.cluster_of.items() if n in alive}
    bkch_of = dict(forest.bkch_of)
    scores = forest.score
    promotions: List[Promotion] = []

    def become_head(node: int) -> None:
        role[node] = Role.CH
        parent.pop(node, None)
        cluster_of[node] = node

    def rejoin(node: int) -> None:
        options = [
            h for h in adjacency.get(node, ()) if h in alive and role.get(h) is Role.CH
        ]
        if options:
            head = max(options, key=lambda h: (scores.get(h, 0.0), -h))
            role[node] = Role.CM
            parent[node] = head
            cluster_of[node] = head
        else:
            become_head(node)

    for head in forest.heads:
        members = [m for m in forest.members(head) if m != head and m in alive]
        head_alive = head in alive
        if head_alive and (
            not members or any(m in adjacency.get(head, ()) for m in members)
        ):
            continue
        backup = bkch_of.pop(head, None)
        if head_alive:
            become_head(head)
        if backup is None or backup not in alive:
            promotions.append(Promotion(head, None))
            for member in members:
                rejoin(member)
            continue
        become_head(backup)
        promotions.append(Promotion(head, backup))
        staying = set()
        for member in members:
            if member == backup:
                continue
            if member in adjacency.get(backup, ()):
                role[member] = Role.CM
                parent[member] = backup
                cluster_of[member] = backup
                staying.add(member)
            else:
                rejoin(member)
        successor = elect_bkch(backup, staying, scores)
        if successor is not None:
            bkch_of[backup] = successor
            role[successor] = Role.BKCH

    if promotions:
        logger.debug("OSCA-lite repaired {} clusters", len(promotions))
    bkch_of = {h: b for h, b in bkch_of.items() if role.get(h) is Role.CH and b in alive}
    return (
        ClusterForest(
            role=role,
            parent=parent,
            cluster_of=cluster_of,
            bkch_of=bkch_of,
            score={n: s for n, s in scores.items() if n in alive},
        ),
        promotions,
    )
