"""Deterministic time-stepped simulation loop.

Every tick runs the same phases in a fixed order: mobility, idle drain,
adjacency, clustering (full rounds on the clustering interval, otherwise any
partial re-clustering the ground station requested), ground-station
maintenance (SEFC), inter-round repair (OSCA-lite), traffic and finally
observation of roles, memberships, orphans and energy. The order is part of
the simulator's contract.
"""

import math
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from loguru import logger

from sefcsim.clustering.baselines import osca_lite_round, osca_repair, pica_lite_round
from sefcsim.clustering.forest import splice_forest, validate_forest
from sefcsim.clustering.maintenance import run_maintenance
from sefcsim.clustering.sefc import ClusteringParams, form_clusters
from sefcsim.core.config import Algorithm, SimConfig
from sefcsim.core.models import (
    ClusterForest,
    DeathEvent,
    DeliveryRecord,
    EnergyLog,
    HandoverEvent,
    MembershipChange,
    MetricsSummary,
    OrphanEvent,
    ReclusterEvent,
    Role,
    RoleInterval,
    RunArtifacts,
    UavState,
    Vec3,
)
from sefcsim.metrics import summarize
from sefcsim.simulation.comms import (
    EnergyLedger,
    adjacency_from_positions,
    broadcast_charges,
    route_packet,
)
from sefcsim.simulation.mobility import Fleet, initial_states
from sefcsim.simulation.trace import TraceType, TraceWriter
from sefcsim.simulation.traffic import TrafficGenerator
from sefcsim.utils.helpers import ticks_for
from sefcsim.utils.rng import Stream, stream

# Control messages per clustering round: SEFC sends a beacon and an OSF
# broadcast, the baselines a single scoring beacon.
CONTROL_BROADCASTS = {
    Algorithm.SEFC: 2,
    Algorithm.PICA_LITE: 1,
    Algorithm.OSCA_LITE: 1,
}


class RoleTracker:
    """Turns per-tick role observations into non-overlapping tenures."""

    def __init__(self) -> None:
        self._open: Dict[int, Tuple[Role, float]] = {}
        self._closed: List[RoleInterval] = []

    def observe(self, node: int, role: Role, t: float) -> bool:
        """Record ``role`` at ``t``; True when it differs from the open tenure."""
        current = self._open.get(node)
        if current is not None and current[0] is role:
            return False
        self.close(node, t)
        self._open[node] = (role, t)
        return True

    def close(self, node: int, t: float) -> None:
        current = self._open.pop(node, None)
        if current is not None:
            self._closed.append(RoleInterval(node, current[0], current[1], t))

    def finish(self, sim_end: float) -> List[RoleInterval]:
        for node in sorted(self._open):
            self.close(node, sim_end)
        return sorted(self._closed, key=lambda i: (i.t_start, i.node, i.t_end))


class Simulation:
    """One seeded run of the configured clustering algorithm.

    Args:
        config: A validated configuration.
        trace: Open trace writer receiving every event, if any.
        check_forests: Validate the cluster forest after every change and
            raise ``SimulationError`` on the first broken invariant.
    """

    def __init__(
        self,
        config: SimConfig,
        trace: Optional[TraceWriter] = None,
        check_forests: bool = False,
    ) -> None:
        self.config = config
        self.trace = trace
        self.check_forests = check_forests
        self.dt = config.tick_dt
        self.n_ticks = ticks_for(config.sim_duration, self.dt)
        self.sim_end = self.n_ticks * self.dt
        self.cluster_ticks = ticks_for(config.clustering_interval, self.dt)
        self.check_ticks = ticks_for(config.gs.check_interval, self.dt)
        self.params = ClusteringParams.from_config(config)

        initial = initial_states(config, stream(config.seed, Stream.INIT))
        self.node_ids: Tuple[int, ...] = tuple(state.id for state in initial)
        self.fleet = Fleet(initial)
        self.alive: Set[int] = set(self.node_ids)
        self.ledger = EnergyLedger({state.id: state.energy for state in initial})
        self.mobility_rngs = [stream(config.seed, Stream.MOBILITY, node) for node in self.node_ids]
        self.traffic = TrafficGenerator(
            config.traffic, self.dt, stream(config.seed, Stream.TRAFFIC)
        )
        self.radio_rng = stream(config.seed, Stream.RADIO)

        self.forest = ClusterForest(role={}, parent={}, cluster_of={})
        self.adjacency: Dict[int, FrozenSet[int]] = {}
        self.pending_recluster: FrozenSet[int] = frozenset()
        self.roles = RoleTracker()
        self.cluster_seen: Dict[int, int] = {}
        self.orphaned: Set[int] = set()
        self.artifacts = RunArtifacts(sim_end=self.sim_end, n_uavs=config.n_uavs)
        self._times: List[float] = []
        self._residuals: List[Tuple[float, ...]] = []

    def run(self) -> RunArtifacts:
        logger.info(
            "Starting {} run: {} UAVs, {} ticks, seed {}",
            self.config.algorithm.value,
            self.config.n_uavs,
            self.n_ticks,
            self.config.seed,
        )
        for tick in range(self.n_ticks):
            self.step(tick)
        return self._finish()

    def step(self, tick: int) -> None:
        """Advance the network by one tick."""
        t = tick * self.dt
        algorithm = self.config.algorithm
        self._move()
        self._drain_idle(tick, t)
        living = sorted(self.alive)
        self.adjacency = adjacency_from_positions(
            living, self.fleet.positions(living), self.config.comm_range
        )

        on_round = tick % self.cluster_ticks == 0
        if on_round:
            self._clustering_round(tick, t)
        elif self.pending_recluster:
            self._partial_recluster(tick, t)

        if algorithm is Algorithm.SEFC and tick % self.check_ticks == 0:
            self._maintenance(tick, t)
        if algorithm is Algorithm.OSCA_LITE and not on_round:
            self._osca_repair(tick, t)

        self._route_traffic(tick, t)
        self._observe(tick, t)

    def _state(self, node: int) -> UavState:
        return self.fleet.state(node, self.ledger.residual[node])

    def _alive_states(self) -> List[UavState]:
        return [self._state(node) for node in sorted(self.alive)]

    def _alive_snapshot(self) -> Dict[int, UavState]:
        return {node: self._state(node) for node in sorted(self.alive)}

    def _emit(self, type: TraceType, tick: int, t: float, **payload) -> None:
        if self.trace is not None:
            self.trace.emit(type, tick, t, **payload)

    def _move(self) -> None:
        living = sorted(self.alive)
        self.fleet.step(
            living,
            self.config.mobility,
            self.dt,
            [self.mobility_rngs[self.fleet.row[node]] for node in living],
            self.config.arena,
        )

    def _drain_idle(self, tick: int, t: float) -> None:
        idle = self.config.energy_model.idle_power * self.dt
        living = sorted(self.alive)
        for node in living:
            self.ledger.charge(node, idle, "idle")
        self._bury_drained(living, tick, t)

    def _bury_drained(self, charged: Iterable[int], tick: int, t: float) -> List[int]:
        """Bury the alive nodes among ``charged`` whose residual reached zero."""
        buried = sorted(
            node for node in set(charged) if node in self.alive and not self.ledger.alive(node)
        )
        for node in buried:
            self._bury(node, tick, t)
        return buried

    def _bury(self, node: int, tick: int, t: float) -> None:
        self.alive.discard(node)
        self.orphaned.discard(node)
        self.roles.close(node, t)
        self.adjacency = {
            other: neighbors - {node}
            for other, neighbors in self.adjacency.items()
            if other != node
        }
        self.artifacts.death_log.append(DeathEvent(tick, t, node))
        self._emit("death", tick, t, node=node)
        logger.debug("UAV {} died at t={:.3f}", node, t)
        if not self.alive:
            logger.warning("No UAV left alive at t={:.3f}", t)

    def _charge_control(self, snapshot: List[UavState], broadcasts: int, tick: int, t: float) -> None:
        charges = broadcast_charges(
            {state.id: state for state in snapshot},
            self.adjacency,
            self.config.radio.beacon_bits,
            self.config.energy_model,
        )
        for _ in range(broadcasts):
            for kind, spent in charges.items():
                self.ledger.charge_map(spent, kind.value.lower())
        self._bury_drained([state.id for state in snapshot], tick, t)

    def _check(self, forest: ClusterForest, fresh: bool) -> None:
        if not self.check_forests:
            return
        sefc = self.config.algorithm is Algorithm.SEFC
        validate_forest(
            forest,
            self.adjacency if fresh else None,
            check_osf_order=fresh and sefc,
            max_depth=None if sefc else 1,
        )

    def _clustering_round(self, tick: int, t: float) -> None:
        snapshot = self._alive_states()
        algorithm = self.config.algorithm
        if algorithm is Algorithm.SEFC:
            forest = form_clusters(snapshot, self.adjacency, self.params)
        elif algorithm is Algorithm.PICA_LITE:
            forest = pica_lite_round(
                snapshot, self.adjacency, self.config.baselines, self.config.mobility.max_speed
            )
        else:
            forest = osca_lite_round(
                snapshot, self.adjacency, self.config.baselines, self.config.degree_ref
            )
        self._check(forest, fresh=True)
        self.forest = forest
        self.pending_recluster = frozenset()
        self._emit(
            "round",
            tick,
            t,
            algorithm=algorithm.value,
            nodes=len(snapshot),
            clusters=len(forest.heads),
            partial=False,
        )
        self._charge_control(snapshot, CONTROL_BROADCASTS[algorithm], tick, t)

    def _partial_recluster(self, tick: int, t: float) -> None:
        flagged = self.pending_recluster
        self.pending_recluster = frozenset()
        replaced = {node for node, root in self.forest.cluster_of.items() if root in flagged}
        snapshot = [self._state(node) for node in sorted(replaced) if node in self.alive]
        patch = form_clusters(snapshot, self.adjacency, self.params)
        self._check(patch, fresh=True)
        self.forest = splice_forest(self.forest, patch, replaced)
        self._check(self.forest, fresh=False)
        self._emit(
            "round",
            tick,
            t,
            algorithm=self.config.algorithm.value,
            nodes=len(snapshot),
            clusters=len(patch.heads),
            partial=True,
        )
        self._charge_control(snapshot, CONTROL_BROADCASTS[Algorithm.SEFC], tick, t)

    def _maintenance(self, tick: int, t: float) -> None:
        config = self.config
        report = run_maintenance(
            self.forest,
            self._alive_snapshot(),
            self.adjacency,
            config.gs,
            self.params,
            config.handover_margin,
            config.recluster_threshold,
            tick,
            self.dt,
        )
        self.forest = report.forest
        for decision in report.handovers:
            self._log_handover(
                HandoverEvent(
                    tick, t, decision.old_ch, decision.new_ch, decision.old_osf, decision.new_osf
                )
            )
        if report.handovers:
            self._check(self.forest, fresh=False)
        if report.recluster:
            clusters = tuple(sorted(report.recluster))
            mean = math.fsum(report.mean_osf[c] for c in clusters) / len(clusters)
            event = ReclusterEvent(tick, t, clusters, mean)
            self.artifacts.recluster_log.append(event)
            self._emit("recluster", tick, t, clusters=list(clusters), mean_osf=mean)
            self.pending_recluster = frozenset(report.recluster)

    def _osca_repair(self, tick: int, t: float) -> None:
        before = self.forest
        self.forest, promotions = osca_repair(
            before, self._alive_snapshot(), self.adjacency
        )
        for promotion in promotions:
            if promotion.new_ch is None:
                continue
            self._log_handover(
                HandoverEvent(
                    tick,
                    t,
                    promotion.old_ch,
                    promotion.new_ch,
                    before.score.get(promotion.old_ch, 0.0),
                    before.score.get(promotion.new_ch, 0.0),
                )
            )
        if promotions:
            self._check(self.forest, fresh=False)

    def _log_handover(self, event: HandoverEvent) -> None:
        self.artifacts.handover_log.append(event)
        self._emit(
            "handover",
            event.tick,
            event.t,
            old_ch=event.old_ch,
            new_ch=event.new_ch,
            old_osf=event.old_osf,
            new_osf=event.new_osf,
        )

    def _route_traffic(self, tick: int, t: float) -> None:
        config = self.config
        packets = self.traffic.packets_due(tick, frozenset(self.alive))
        if not packets:
            return
        positions: Dict[int, Vec3] = {
            node: Vec3.of(self.fleet.position[self.fleet.row[node]]) for node in sorted(self.alive)
        }
        for src, dst in packets:
            if src not in self.alive or dst not in self.alive:
                continue
            outcome = route_packet(
                src,
                dst,
                self.forest,
                self.adjacency,
                positions,
                config.radio,
                config.energy_model,
                self.radio_rng,
                bits=config.payload_bits,
            )
            self.ledger.charge_attempts(outcome.attempts)
            self.artifacts.delivery_log.append(DeliveryRecord(tick, t, src, dst, outcome))
            self.artifacts.packets_generated += 1
            self._emit(
                "delivery",
                tick,
                t,
                src=src,
                dst=dst,
                delivered=outcome.delivered,
                delay=outcome.delay,
                hops=outcome.hops,
                retransmissions=outcome.retransmissions,
            )
            for node in self._bury_drained(outcome.energy_spent, tick, t):
                positions.pop(node, None)

    def _observe(self, tick: int, t: float) -> None:
        forest = self.forest
        for node in sorted(self.alive):
            role = forest.role.get(node)
            if role is None:
                continue
            if self.roles.observe(node, role, t):
                self._emit("role", tick, t, node=node, role=role.value)

            cluster = forest.cluster_of[node]
            previous = self.cluster_seen.get(node)
            if previous != cluster:
                self.artifacts.membership_log.append(MembershipChange(node, previous, cluster, t))
                self._emit("membership", tick, t, node=node, old=previous, new=cluster)
                self.cluster_seen[node] = cluster

            parent = forest.parent.get(node)
            orphan = parent is not None and (
                parent not in self.alive or parent not in self.adjacency.get(node, ())
            )
            if orphan and node not in self.orphaned:
                self.orphaned.add(node)
                self.artifacts.orphan_log.append(OrphanEvent(tick, t, node, parent))
                self._emit("orphan", tick, t, node=node, parent=parent)
            elif not orphan:
                self.orphaned.discard(node)

        self._times.append(t + self.dt)
        self._residuals.append(tuple(self.ledger.residual[node] for node in self.node_ids))

    def _finish(self) -> RunArtifacts:
        artifacts = self.artifacts
        artifacts.role_log = self.roles.finish(self.sim_end)
        artifacts.energy_log = EnergyLog(
            node_ids=self.node_ids,
            initial=tuple(self.ledger.initial[node] for node in self.node_ids),
            times=tuple(self._times),
            residual=tuple(self._residuals),
            ledger={node: dict(kinds) for node, kinds in self.ledger.totals.items()},
        )
        artifacts.summary = summarize(artifacts) if self.n_ticks > 0 else MetricsSummary()
        first_death = artifacts.death_log[0].t if artifacts.death_log else None
        self._emit(
            "summary",
            self.n_ticks,
            self.sim_end,
            packets_generated=artifacts.packets_generated,
            first_death_t=first_death,
            **artifacts.summary.model_dump(),
        )
        logger.info(
            "Finished {} run: {} packets, {} handovers, {} deaths",
            self.config.algorithm.value,
            artifacts.packets_generated,
            len(artifacts.handover_log),
            len(artifacts.death_log),
        )
        return artifacts


def run_simulation(
    config: SimConfig,
    trace_path: Optional[str | Path] = None,
    check_forests: bool = False,
) -> RunArtifacts:
    """Run one simulation; output is a pure function of ``config``.

    Args:
        config: A validated configuration (seed included).
        trace_path: Where to write the newline-delimited JSON event trace.
        check_forests: Validate every cluster forest the run produces.
    """
    if trace_path is None:
        return Simulation(config, check_forests=check_forests).run()
    with TraceWriter(trace_path) as trace:
        return Simulation(config, trace=trace, check_forests=check_forests).run()
