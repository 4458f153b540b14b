"""Summary metrics computed from a run's event logs."""

import math
from typing import Iterable, Optional, Sequence

from sefcsim.core.exceptions import PreconditionError
from sefcsim.core.models import (
    DeliveryOutcome,
    DeliveryRecord,
    EnergyLog,
    MembershipChange,
    MetricsSummary,
    Role,
    RoleInterval,
    RunArtifacts,
)
from sefcsim.utils.helpers import mean_or_none


def _outcomes(delivery_log: Iterable[DeliveryRecord | DeliveryOutcome]) -> Iterable[DeliveryOutcome]:
    for entry in delivery_log:
        yield entry.outcome if isinstance(entry, DeliveryRecord) else entry


def _require_uavs(n_uavs: int) -> None:
    if n_uavs < 1:
        raise PreconditionError(f"n_uavs must be >= 1, got {n_uavs}")


def avg_end_to_end_delay(
    delivery_log: Iterable[DeliveryRecord | DeliveryOutcome],
) -> Optional[float]:
    """Mean delay over delivered packets; ``None`` when nothing was delivered."""
    return mean_or_none(o.delay for o in _outcomes(delivery_log) if o.delivered)


def delivery_ratio(
    delivery_log: Sequence[DeliveryRecord | DeliveryOutcome],
) -> Optional[float]:
    """Delivered over generated packets; ``None`` when none were generated."""
    if not delivery_log:
        return None
    delivered = sum(1 for o in _outcomes(delivery_log) if o.delivered)
    return delivered / len(delivery_log)


def avg_energy_consumption(energy_log: EnergyLog, n_uavs: int) -> float:
    """Total consumed energy divided by the number of UAVs.

    A dead node counts with its whole initial energy consumed.
    """
    _require_uavs(n_uavs)
    return math.fsum(energy_log.consumed().values()) / n_uavs


def avg_ch_duration(role_log: Iterable[RoleInterval], sim_end: float) -> Optional[float]:
    """Mean CH tenure; tenures still open are closed at ``sim_end``."""
    return mean_or_none(
        interval.duration(sim_end) for interval in role_log if interval.role is Role.CH
    )


def avg_cm_switches(membership_log: Iterable[MembershipChange], n_uavs: int) -> float:
    """Cluster switches per UAV.

    A first assignment is not a switch; a handover that renames a cluster's
    root is one for every member.
    """
    _require_uavs(n_uavs)
    return sum(1 for change in membership_log if change.is_switch) / n_uavs


def summarize(artifacts: RunArtifacts) -> MetricsSummary:
    """All summary metrics of a finished run."""
    energy = (
        avg_energy_consumption(artifacts.energy_log, artifacts.n_uavs)
        if artifacts.energy_log is not None
        else None
    )
    return MetricsSummary(
        avg_delay=avg_end_to_end_delay(artifacts.delivery_log),
        avg_energy=energy,
        avg_ch_duration=avg_ch_duration(artifacts.role_log, artifacts.sim_end),
        avg_cm_switches=avg_cm_switches(artifacts.membership_log, artifacts.n_uavs),
        delivery_ratio=delivery_ratio(artifacts.delivery_log),
    )
