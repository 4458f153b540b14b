"""Constant-rate unicast flows between uniformly drawn alive endpoints."""

from typing import AbstractSet, List, MutableSequence, Tuple

import numpy as np

from sefcsim.core.config import TrafficSpec
from sefcsim.utils.helpers import ticks_for

Packet = Tuple[int, int]


def _draw_endpoints(alive: List[int], rng: np.random.Generator) -> Packet:
    src = alive[int(rng.integers(len(alive)))]
    others = [node for node in alive if node != src]
    dst = others[int(rng.integers(len(others)))]
    return src, dst


def generate_traffic(
    spec: TrafficSpec,
    tick: int,
    alive: AbstractSet[int],
    rng: np.random.Generator,
    tick_dt: float,
    flows: MutableSequence[Packet],
) -> List[Packet]:
    """Packets due this tick, one per flow.

    ``flows`` holds each flow's current endpoints and is updated in place: a
    flow draws its endpoints on first emission and redraws them whenever
    either endpoint has died. Draws happen only on emission ticks and with at
    least two alive nodes, so the schedule depends on nothing else.
    """
    if tick % ticks_for(spec.packet_interval, tick_dt) != 0 or len(alive) < 2:
        return []
    candidates = sorted(alive)
    packets = []
    for index in range(spec.flows):
        if index == len(flows):
            flows.append(_draw_endpoints(candidates, rng))
        else:
            src, dst = flows[index]
            if src not in alive or dst not in alive:
                flows[index] = _draw_endpoints(candidates, rng)
        packets.append(flows[index])
    return packets


class TrafficGenerator:
    """Holds flow state for one run."""

    def __init__(self, spec: TrafficSpec, tick_dt: float, rng: np.random.Generator) -> None:
        self.spec = spec
        self.tick_dt = tick_dt
        self.rng = rng
        self.flows: List[Packet] = []

    def packets_due(self, tick: int, alive: AbstractSet[int]) -> List[Packet]:
        return generate_traffic(self.spec, tick, alive, self.rng, self.tick_dt, self.flows)
