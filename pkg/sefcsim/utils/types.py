from typing import Any, Dict, FrozenSet, Mapping

DictStrAny = Dict[str, Any]

# One-hop neighbor sets keyed by node id; symmetric and irreflexive.
Adjacency = Mapping[int, FrozenSet[int]]
