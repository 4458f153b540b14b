"""Structural checks and surgery on cluster forests."""

from typing import Dict, Iterable, List, Optional

from sefcsim.core.exceptions import SimulationError
from sefcsim.core.models import ClusterForest, Role
from sefcsim.utils.types import Adjacency


def forest_violations(
    forest: ClusterForest,
    adjacency: Optional[Adjacency] = None,
    *,
    check_osf_order: bool = True,
    max_depth: Optional[int] = None,
) -> List[str]:
    """Every broken ClusterForest invariant, as human-readable strings.

    ``check_osf_order`` enforces strictly increasing scores along parent
    edges, which holds for freshly formed forests but not after a handover
    reversed part of a tree.
    """
    problems: List[str] = []
    limit = len(forest.role)
    for node, role in sorted(forest.role.items()):
        has_parent = node in forest.parent
        if role is Role.CH and has_parent:
            problems.append(f"CH {node} has a parent")
        if role is not Role.CH and not has_parent:
            problems.append(f"{role.value} {node} has no parent")
        chain = [node]
        current = node
        while current in forest.parent and len(chain) <= limit + 1:
            current = forest.parent[current]
            chain.append(current)
        if current in forest.parent:
            problems.append(f"parent chain from {node} does not terminate")
            continue
        if forest.role.get(current) is not Role.CH:
            problems.append(f"chain from {node} ends at non-CH {current}")
        if forest.cluster_of.get(node) != current:
            problems.append(
                f"cluster_of[{node}]={forest.cluster_of.get(node)} but root is {current}"
            )
        if max_depth is not None and len(chain) - 1 > max_depth:
            problems.append(f"node {node} is {len(chain) - 1} hops from its CH")

    if check_osf_order:
        for child, parent in sorted(forest.parent.items()):
            if not forest.score.get(parent, 0.0) > forest.score.get(child, 0.0):
                problems.append(f"score does not increase along {child}->{parent}")

    backups = set()
    for head, backup in sorted(forest.bkch_of.items()):
        if forest.role.get(head) is not Role.CH:
            problems.append(f"bkch_of key {head} is not a CH")
        if forest.role.get(backup) is not Role.BKCH:
            problems.append(f"backup {backup} of {head} lacks the BKCH role")
        if forest.cluster_of.get(backup) != head:
            problems.append(f"backup {backup} is outside cluster {head}")
        if adjacency is not None and backup not in adjacency.get(head, ()):
            problems.append(f"backup {backup} is not a one-hop neighbor of {head}")
        backups.add(backup)
    stray = sorted(n for n, r in forest.role.items() if r is Role.BKCH and n not in backups)
    for node in stray:
        problems.append(f"BKCH {node} backs no cluster head")
    return problems


def validate_forest(
    forest: ClusterForest,
    adjacency: Optional[Adjacency] = None,
    *,
    check_osf_order: bool = True,
    max_depth: Optional[int] = None,
) -> ClusterForest:
    """Return ``forest`` unchanged or raise listing every violation."""
    problems = forest_violations(
        forest, adjacency, check_osf_order=check_osf_order, max_depth=max_depth
    )
    if problems:
        raise SimulationError("Invalid cluster forest: " + "; ".join(problems))
    return forest


def splice_forest(
    base: ClusterForest, patch: ClusterForest, replaced: Iterable[int]
) -> ClusterForest:
    """Replace the ``replaced`` nodes of ``base`` by the clusters in ``patch``.

    ``replaced`` must be a union of whole clusters of ``base``; nodes listed
    there but absent from ``patch`` (dead ones) are dropped.
    """
    dropped = set(replaced)
    kept = base.restricted_to(n for n in base.role if n not in dropped)
    role: Dict = {**kept.role, **patch.role}
    parent: Dict = {**kept.parent, **patch.parent}
    cluster_of: Dict = {**kept.cluster_of, **patch.cluster_of}
    bkch_of: Dict = {**kept.bkch_of, **patch.bkch_of}
    score: Dict = {**kept.score, **patch.score}
    return ClusterForest(
        role=role, parent=parent, cluster_of=cluster_of, bkch_of=bkch_of, score=score
    )
