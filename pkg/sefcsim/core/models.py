"""Immutable value records shared by every simulator module."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field


@dataclass(frozen=True, slots=True)
class Vec3:
    """A 3D vector: position (m), velocity (m/s) or acceleration (m/s²)."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"Vec3 components must be finite, got {self!r}")

    @classmethod
    def zero(cls) -> "Vec3":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def of(cls, values: Iterable[float]) -> "Vec3":
        x, y, z = (float(value) for value in values)
        return cls(x, y, z)

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __mul__(self, factor: float) -> "Vec3":
        return Vec3(self.x * factor, self.y * factor, self.z * factor)

    __rmul__ = __mul__

    def __truediv__(self, divisor: float) -> "Vec3":
        return Vec3(self.x / divisor, self.y / divisor, self.z / divisor)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def distance_to(self, other: "Vec3") -> float:
        """3D Euclidean distance D(i, j)."""
        dx = self.x - other.x
        dy = self.y - other.y
        dz = self.z - other.z
        return math.sqrt(dx * dx + dy * dy + dz * dz)

    def is_zero(self) -> bool:
        return self.x == 0.0 and self.y == 0.0 and self.z == 0.0

    def unit(self) -> "Vec3":
        """Unit vector in the same direction; the zero vector maps to itself."""
        length = self.norm()
        if length == 0.0:
            return Vec3.zero()
        return self / length

    def clamp_norm(self, limit: float) -> "Vec3":
        """Scale down to ``limit`` magnitude, preserving direction."""
        length = self.norm()
        if length <= limit or length == 0.0:
            return self
        return self * (limit / length)

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True, slots=True)
class UavState:
    """Identity, kinematics and residual energy of one UAV at a tick.

    Attributes:
        id: Network-wide unique node id.
        position: Position inside the arena (m).
        velocity: Velocity vector (m/s).
        acceleration: Acceleration vector (m/s²).
        energy: Residual energy (J), never negative.
        waypoint: Current Random Waypoint destination, unused by Gauss-Markov.
        pause_remaining: Seconds left in a Random Waypoint pause.
        leg_speed: Cruise speed of the current Random Waypoint leg.
    """

    id: int
    position: Vec3
    velocity: Vec3
    acceleration: Vec3
    energy: float
    waypoint: Optional[Vec3] = None
    pause_remaining: float = 0.0
    leg_speed: float = 0.0

    def __post_init__(self) -> None:
        if self.energy < 0.0:
            raise ValueError(f"UAV {self.id} energy must be >= 0, got {self.energy}")

    @property
    def speed(self) -> float:
        """S(i): speed magnitude."""
        return self.velocity.norm()

    @property
    def accel_magnitude(self) -> float:
        """A(i): acceleration magnitude."""
        return self.acceleration.norm()

    @property
    def alive(self) -> bool:
        return self.energy > 0.0


class Role(str, Enum):
    """Cluster role of a node."""

    CH = "CH"
    CM = "CM"
    BKCH = "BKCH"


@dataclass(frozen=True, slots=True)
class NeighborRecord:
    """What a node learned about a one-hop neighbor from its beacon."""

    neighbor_id: int
    position: Vec3
    velocity: Vec3
    acceleration: Vec3
    energy: float
    distance: float
    osf: Optional[float] = None

    @classmethod
    def from_beacon(cls, receiver: UavState, sender: UavState) -> "NeighborRecord":
        return cls(
            neighbor_id=sender.id,
            position=sender.position,
            velocity=sender.velocity,
            acceleration=sender.acceleration,
            energy=sender.energy,
            distance=receiver.position.distance_to(sender.position),
        )

    @property
    def speed(self) -> float:
        return self.velocity.norm()

    @property
    def accel_magnitude(self) -> float:
        return self.acceleration.norm()


@dataclass(frozen=True, slots=True)
class PairwiseDiffs:
    """Normalized speed, acceleration and energy-surplus differences, each in [0, 1]."""

    sd: float
    ad: float
    ed: float


@dataclass(frozen=True)
class ClusterForest:
    """Parent-pointer forest produced by one clustering round.

    Attributes:
        role: Role of every node in the forest.
        parent: Parent pointer of every non-CH node.
        cluster_of: Root CH of every node (a CH maps to itself).
        bkch_of: Backup CH per cluster head, when one exists.
        score: Election score per node (OSF for SEFC, the baseline score
            otherwise).
    """

    role: Mapping[int, Role]
    parent: Mapping[int, int]
    cluster_of: Mapping[int, int]
    bkch_of: Mapping[int, int] = field(default_factory=dict)
    score: Mapping[int, float] = field(default_factory=dict)

    @property
    def nodes(self) -> List[int]:
        return sorted(self.role)

    @property
    def heads(self) -> List[int]:
        return sorted(node for node, role in self.role.items() if role is Role.CH)

    def members(self, ch_id: int) -> List[int]:
        """All nodes whose cluster root is ``ch_id``, the CH included."""
        return sorted(node for node, root in self.cluster_of.items() if root == ch_id)

    def chain_to_root(self, node_id: int) -> List[int]:
        """Nodes from ``node_id`` up to its CH, both ends included."""
        chain = [node_id]
        current = node_id
        for _ in range(len(self.role) + 1):
            if current not in self.parent:
                return chain
            current = self.parent[current]
            chain.append(current)
        raise ValueError(f"Parent chain from {node_id} does not terminate")

    def restricted_to(self, nodes: Iterable[int]) -> "ClusterForest":
        keep = set(nodes)
        return ClusterForest(
            role={n: r for n, r in self.role.items() if n in keep},
            parent={n: p for n, p in self.parent.items() if n in keep},
            cluster_of={n: c for n, c in self.cluster_of.items() if n in keep},
            bkch_of={c: b for c, b in self.bkch_of.items() if c in keep},
            score={n: s for n, s in self.score.items() if n in keep},
        )


@dataclass(frozen=True, slots=True)
class HopAttempt:
    """One transmission attempt of a packet over one hop."""

    sender: int
    receiver: int
    distance: float
    success: bool
    tx_energy: float
    rx_energy: float


@dataclass(frozen=True)
class DeliveryOutcome:
    """Result of routing one packet through the cluster hierarchy."""

    delivered: bool
    delay: float
    hops: int
    retransmissions: int
    energy_spent: Mapping[int, float] = field(default_factory=dict)
    path: Tuple[int, ...] = ()
    attempts: Tuple[HopAttempt, ...] = ()


@dataclass(frozen=True, slots=True)
class DeliveryRecord:
    tick: int
    t: float
    src: int
    dst: int
    outcome: DeliveryOutcome


@dataclass(frozen=True, slots=True)
class RoleInterval:
    """A contiguous interval during which ``node`` held ``role``."""

    node: int
    role: Role
    t_start: float
    t_end: Optional[float]

    def duration(self, sim_end: float) -> float:
        end = sim_end if self.t_end is None else self.t_end
        return max(0.0, end - self.t_start)


@dataclass(frozen=True, slots=True)
class MembershipChange:
    """A node's cluster root changed (``old_cluster`` is None on first assignment)."""

    node: int
    old_cluster: Optional[int]
    new_cluster: int
    t: float

    @property
    def is_switch(self) -> bool:
        return self.old_cluster is not None and self.old_cluster != self.new_cluster


@dataclass(frozen=True, slots=True)
class HandoverEvent:
    tick: int
    t: float
    old_ch: int
    new_ch: int
    old_osf: float
    new_osf: float


@dataclass(frozen=True, slots=True)
class ReclusterEvent:
    tick: int
    t: float
    clusters: Tuple[int, ...]
    mean_osf: float


@dataclass(frozen=True, slots=True)
class OrphanEvent:
    tick: int
    t: float
    node: int
    parent: int


@dataclass(frozen=True, slots=True)
class DeathEvent:
    tick: int
    t: float
    node: int


@dataclass(frozen=True)
class EnergyLog:
    """Residual energy time series, one column per node id.

    Attributes:
        node_ids: Node ids in column order.
        initial: Initial residual energy per column.
        times: Sample timestamps (end of each tick).
        residual: One tuple of residual energies per sample.
        ledger: Total joules charged per node, split by kind
            (``tx``, ``rx``, ``idle``).
    """

    node_ids: Tuple[int, ...]
    initial: Tuple[float, ...]
    times: Tuple[float, ...] = ()
    residual: Tuple[Tuple[float, ...], ...] = ()
    ledger: Mapping[int, Mapping[str, float]] = field(default_factory=dict)

    @property
    def final(self) -> Tuple[float, ...]:
        return self.residual[-1] if self.residual else self.initial

    def consumed(self) -> Dict[int, float]:
        """Cumulative consumption per node: initial minus final residual."""
        return {
            node: initial - final
            for node, initial, final in zip(self.node_ids, self.initial, self.final)
        }


class MetricsSummary(BaseModel):
    """The four summary metrics of one run plus the delivery ratio."""

    model_config = ConfigDict(frozen=True)

    avg_delay: Optional[float] = Field(
        default=None, ge=0, description="Mean end-to-end delay over delivered packets (s)"
    )
    avg_energy: Optional[float] = Field(
        default=None, ge=0, description="Mean consumed energy per UAV (J)"
    )
    avg_ch_duration: Optional[float] = Field(
        default=None, ge=0, description="Mean cluster-head tenure (s)"
    )
    avg_cm_switches: Optional[float] = Field(
        default=None, ge=0, description="Cluster switches per UAV"
    )
    delivery_ratio: Optional[float] = Field(
        default=None, ge=0, le=1, description="Delivered over generated packets"
    )


@dataclass
class RunArtifacts:
    """Everything one simulation run produced.

    Logs are time ordered. ``role_log`` intervals never overlap per node; an
    interval still open at the end of the run has ``t_end`` set to
    ``sim_end``.
    """

    sim_end: float
    n_uavs: int
    delivery_log: List[DeliveryRecord] = field(default_factory=list)
    energy_log: Optional[EnergyLog] = None
    role_log: List[RoleInterval] = field(default_factory=list)
    membership_log: List[MembershipChange] = field(default_factory=list)
    handover_log: List[HandoverEvent] = field(default_factory=list)
    recluster_log: List[ReclusterEvent] = field(default_factory=list)
    orphan_log: List[OrphanEvent] = field(default_factory=list)
    death_log: List[DeathEvent] = field(default_factory=list)
    packets_generated: int = 0
    summary: MetricsSummary = field(default_factory=MetricsSummary)

    def __repr__(self) -> str:
        return (
            f"RunArtifacts(sim_end={self.sim_end}, "
            f"deliveries={len(self.delivery_log)}, "
            f"ch_tenures={sum(i.role is Role.CH for i in self.role_log)})"
        )
