"""
Cluster formation and upkeep.

Structure:
- sefc.py: MED filtering, OSF scoring, parent selection and backup election
- maintenance.py: Ground-station re-evaluation, handover and re-clustering
- baselines.py: PICA-lite and OSCA-lite one-hop comparators
- forest.py: Forest validation and splicing
"""

from .baselines import osca_lite_round, osca_repair, pica_lite_round
from .maintenance import run_maintenance
from .sefc import ClusteringParams, form_clusters

__all__ = [
    "ClusteringParams",
    "form_clusters",
    "run_maintenance",
    "pica_lite_round",
    "osca_lite_round",
    "osca_repair",
]
