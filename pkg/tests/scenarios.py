"""Loaders for the YAML scenarios under tests/fixtures."""

from pathlib import Path
from typing import Any, Dict, List, Mapping

import yaml

from sefcsim.core.models import UavState, Vec3

FIXTURES = Path(__file__).resolve().parent / "fixtures"


def load_fixture(name: str) -> Dict[str, Any]:
    return yaml.safe_load((FIXTURES / f"{name}.yaml").read_text(encoding="utf-8"))


def state_from(record: Mapping[str, Any]) -> UavState:
    return UavState(
        id=int(record["id"]),
        position=Vec3.of(record["position"]),
        velocity=Vec3.of(record.get("velocity", (0.0, 0.0, 0.0))),
        acceleration=Vec3.of(record.get("acceleration", (0.0, 0.0, 0.0))),
        energy=float(record.get("energy", 400.0)),
    )


def states_from(records: List[Mapping[str, Any]]) -> List[UavState]:
    return [state_from(record) for record in records]


def positions_from(mapping: Mapping[Any, Any]) -> Dict[int, Vec3]:
    return {int(node): Vec3.of(point) for node, point in mapping.items()}
