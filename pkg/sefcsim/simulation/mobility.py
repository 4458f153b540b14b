"""3D kinematics under Gauss-Markov or Random Waypoint mobility.

The whole swarm lives in a :class:`Fleet` of ``(n, 3)`` arrays and is advanced
one tick at a time in a single vectorized step; each UAV still draws its noise
from its own stream.
"""

import math
from typing import Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from sefcsim.core.config import Arena, MobilityModel, MobilitySpec, SimConfig
from sefcsim.core.exceptions import DegenerateStepError
from sefcsim.core.models import UavState, Vec3

# Distance (m) under which a Random Waypoint leg counts as arrived.
ARRIVAL_RADIUS = 1.0

Kinematic = TypeVar("Kinematic", Vec3, np.ndarray)


def derive_acceleration(v_prev: Kinematic, v_next: Kinematic, dt: float) -> Kinematic:
    """Finite-difference acceleration ``(v_next - v_prev) / dt``, for one vector or a stack."""
    if dt <= 0:
        raise DegenerateStepError(f"dt must be > 0 to derive acceleration, got {dt}")
    return (v_next - v_prev) / dt


def _norms(vectors: np.ndarray) -> np.ndarray:
    x, y, z = vectors[:, 0], vectors[:, 1], vectors[:, 2]
    return np.sqrt(x * x + y * y + z * z)


def _clamp_norms(vectors: np.ndarray, limit: float) -> np.ndarray:
    """Scale rows longer than ``limit`` down to it, preserving direction."""
    norms = _norms(vectors)
    over = norms > limit
    scale = np.ones_like(norms)
    scale[over] = limit / norms[over]
    return vectors * scale[:, None]


def _apply_caps(
    velocity: np.ndarray, desired: np.ndarray, spec: MobilitySpec, dt: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Clamp speed, then acceleration, preserving direction in both cases."""
    v_next = _clamp_norms(desired, spec.max_speed)
    acceleration = derive_acceleration(velocity, v_next, dt)
    over = _norms(acceleration) > spec.max_accel
    if over.any():
        capped = _clamp_norms(acceleration[over], spec.max_accel)
        # stays inside the speed ball: v and the clamped target both lie in it
        v_next[over] = _clamp_norms(velocity[over] + capped * dt, spec.max_speed)
        acceleration[over] = derive_acceleration(velocity[over], v_next[over], dt)
    return v_next, acceleration


def _advance(
    position: np.ndarray,
    velocity: np.ndarray,
    acceleration: np.ndarray,
    arena: Arena,
    dt: float,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Move by ``velocity * dt`` with specular reflection at the arena faces."""
    upper = np.asarray(arena.upper, dtype=float)
    moved = position + velocity * dt
    below = moved < 0.0
    above = moved > upper
    moved = np.where(below, -moved, np.where(above, 2.0 * upper - moved, moved))
    bounced = below | above
    return (
        np.clip(moved, 0.0, upper),
        np.where(bounced, -velocity, velocity),
        np.where(bounced, -acceleration, acceleration),
    )


def gauss_markov_velocity(velocity: np.ndarray, spec: MobilitySpec, noise: np.ndarray) -> np.ndarray:
    """v' = αv + (1 − α)μ + σ√(1 − α²)w with μ the mean speed along each current heading."""
    alpha = spec.gm_alpha
    norms = _norms(velocity)[:, None]
    heading = np.divide(velocity, norms, out=np.zeros_like(velocity), where=norms > 0.0)
    spread = spec.gm_sigma * math.sqrt(max(0.0, 1.0 - alpha * alpha))
    return velocity * alpha + heading * spec.gm_mean_speed * (1.0 - alpha) + noise * spread


def _draw_waypoint(arena: Arena, spec: MobilitySpec, rng: np.random.Generator) -> Tuple[np.ndarray, float]:
    point = rng.uniform(0.0, arena.upper)
    low = min(spec.rwp_min_speed, spec.max_speed)
    return point, float(rng.uniform(low, spec.max_speed))


class Fleet:
    """Kinematic state of every UAV, one array row per node in id order.

    Residual energy is not kept here; :meth:`state` takes it from the caller.
    Rows of dead UAVs are simply no longer stepped.
    """

    def __init__(self, states: Sequence[UavState]) -> None:
        self.ids: Tuple[int, ...] = tuple(state.id for state in states)
        self.row = {node: index for index, node in enumerate(self.ids)}
        self.position = self._stack(state.position for state in states)
        self.velocity = self._stack(state.velocity for state in states)
        self.acceleration = self._stack(state.acceleration for state in states)
        self.waypoint = self._stack(state.waypoint for state in states)
        self.leg_speed = np.array([state.leg_speed for state in states], dtype=float)
        self.pause = np.array([state.pause_remaining for state in states], dtype=float)

    @staticmethod
    def _stack(vectors: Iterable[Optional[Vec3]]) -> np.ndarray:
        rows = [v.as_tuple() if v is not None else (math.nan,) * 3 for v in vectors]
        return np.array(rows, dtype=float).reshape(-1, 3)

    def state(self, node: int, energy: float) -> UavState:
        """The immutable record of ``node`` with the given residual energy."""
        index = self.row[node]
        waypoint = self.waypoint[index]
        return UavState(
            id=node,
            position=Vec3.of(self.position[index]),
            velocity=Vec3.of(self.velocity[index]),
            acceleration=Vec3.of(self.acceleration[index]),
            energy=energy,
            waypoint=None if math.isnan(waypoint[0]) else Vec3.of(waypoint),
            pause_remaining=float(self.pause[index]),
            leg_speed=float(self.leg_speed[index]),
        )

    def positions(self, nodes: Sequence[int]) -> np.ndarray:
        return self.position[[self.row[node] for node in nodes]].reshape(-1, 3)

    def step(
        self,
        nodes: Sequence[int],
        spec: MobilitySpec,
        dt: float,
        rngs: Sequence[np.random.Generator],
        arena: Arena,
    ) -> None:
        """Advance ``nodes`` by ``dt`` seconds, ``rngs[k]`` being the stream of ``nodes[k]``.

        Every stepped UAV respects the speed and acceleration caps and stays
        inside the arena. On an axis where it bounced off a face, velocity and
        acceleration are both mirrored.
        """
        if dt < 0:
            raise DegenerateStepError(f"dt must be >= 0, got {dt}")
        if dt == 0 or not nodes:
            return
        rows = np.array([self.row[node] for node in nodes], dtype=int)
        velocity = self.velocity[rows]
        if spec.model is MobilityModel.GAUSS_MARKOV:
            noise = np.array([rng.standard_normal(3) for rng in rngs], dtype=float)
            desired = gauss_markov_velocity(velocity, spec, noise)
        else:
            desired = np.array(
                [self._waypoint_velocity(row, spec, arena, dt, rng) for row, rng in zip(rows, rngs)],
                dtype=float,
            )
        v_next, acceleration = _apply_caps(velocity, desired, spec, dt)
        position, v_next, acceleration = _advance(self.position[rows], v_next, acceleration, arena, dt)
        self.position[rows] = position
        self.velocity[rows] = v_next
        self.acceleration[rows] = acceleration

    def _waypoint_velocity(
        self, row: int, spec: MobilitySpec, arena: Arena, dt: float, rng: np.random.Generator
    ) -> np.ndarray:
        if math.isnan(self.waypoint[row, 0]):
            self.waypoint[row], self.leg_speed[row] = _draw_waypoint(arena, spec, rng)
        if self.pause[row] > 0.0:
            self.pause[row] = max(0.0, self.pause[row] - dt)
            return np.zeros(3)
        to_waypoint = self.waypoint[row] - self.position[row]
        distance = float(_norms(to_waypoint[None, :])[0])
        speed = float(_norms(self.velocity[row][None, :])[0])
        if distance <= max(ARRIVAL_RADIUS, speed * dt):
            self.pause[row] = spec.rwp_pause
            self.waypoint[row], self.leg_speed[row] = _draw_waypoint(arena, spec, rng)
            return np.zeros(3)
        return to_waypoint / distance * min(float(self.leg_speed[row]), distance / dt)


def step_kinematics(
    state: UavState,
    spec: MobilitySpec,
    dt: float,
    rng: np.random.Generator,
    arena: Arena,
) -> UavState:
    """Advance one UAV by ``dt`` seconds; the single-UAV form of :meth:`Fleet.step`."""
    if dt == 0:
        return state
    fleet = Fleet([state])
    fleet.step([state.id], spec, dt, [rng], arena)
    return fleet.state(state.id, state.energy)


def _random_heading(rng: np.random.Generator) -> Vec3:
    heading = Vec3.of(rng.standard_normal(3)).unit()
    return heading if not heading.is_zero() else Vec3(1.0, 0.0, 0.0)


def initial_states(config: SimConfig, rng: np.random.Generator) -> List[UavState]:
    """Place ``n_uavs`` UAVs uniformly in the arena with random headings and energy."""
    spec = config.mobility
    energy = config.energy_model
    states = []
    for node_id in range(config.n_uavs):
        position = Vec3.of(rng.uniform(0.0, config.arena.upper))
        heading = _random_heading(rng)
        residual = float(rng.uniform(energy.initial_energy_min, energy.initial_energy_max))
        if spec.model is MobilityModel.GAUSS_MARKOV:
            velocity = heading * min(spec.gm_mean_speed, spec.max_speed)
        else:
            velocity = Vec3.zero()
        states.append(
            UavState(
                id=node_id,
                position=position,
                velocity=velocity,
                acceleration=Vec3.zero(),
                energy=residual,
            )
        )
    return states
