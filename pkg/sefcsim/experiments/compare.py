"""Percent differences of SEFC against each baseline, per sweep cell."""

import math
from pathlib import Path
from typing import Optional

import pandas as pd

from sefcsim.core.config import Algorithm
from sefcsim.core.exceptions import ComparisonError
from sefcsim.experiments.sweep import METRIC_COLUMNS

# metric column -> True when a lower value is better
COMPARED_METRICS = {
    "avg_delay_s": True,
    "avg_energy_j": True,
    "avg_ch_duration_s": False,
    "avg_cm_switches": True,
}


def percent_difference(sefc: float, baseline: float, lower_is_better: bool) -> Optional[float]:
    """Reduction (or improvement) of SEFC relative to the baseline, in percent.

    Positive always means SEFC is better. ``None`` when the baseline is zero
    and SEFC is not, or when either value is missing.
    """
    if sefc is None or baseline is None or math.isnan(sefc) or math.isnan(baseline):
        return None
    if baseline == 0.0:
        return 0.0 if sefc == 0.0 else None
    change = (baseline - sefc) if lower_is_better else (sefc - baseline)
    return 100.0 * change / baseline


def load_metrics(path: str | Path) -> pd.DataFrame:
    csv_path = Path(path)
    if not csv_path.is_file():
        raise FileNotFoundError(f"Metrics file not found: {csv_path}")
    try:
        frame = pd.read_csv(csv_path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as error:
        raise ComparisonError(f"Cannot read {csv_path}: {error}") from error
    missing = [column for column in METRIC_COLUMNS if column not in frame.columns]
    if missing:
        raise ComparisonError(f"{csv_path} lacks columns: {', '.join(missing)}")
    return frame


def sweep_axis(frame: pd.DataFrame) -> str:
    """The column that varies across cells (``n_uavs`` unless only speed varies)."""
    if frame["n_uavs"].nunique() == 1 and frame["max_speed"].nunique() > 1:
        return "max_speed"
    return "n_uavs"


def compare_metrics(frame: pd.DataFrame) -> pd.DataFrame:
    """One row per (baseline, axis value) with SEFC's percent difference per metric."""
    if frame["algorithm"].isna().any():
        raise ComparisonError("algorithm column has missing values")
    axis = sweep_axis(frame)
    means = frame.groupby(["algorithm", axis], sort=True)[list(COMPARED_METRICS)].mean()
    algorithms = set(frame["algorithm"])
    if Algorithm.SEFC.value not in algorithms:
        raise ComparisonError("metrics contain no SEFC rows")
    baselines = sorted(algorithms - {Algorithm.SEFC.value})
    if not baselines:
        raise ComparisonError("metrics contain no baseline rows to compare against")

    sefc = means.loc[Algorithm.SEFC.value]
    rows = []
    for baseline in baselines:
        other = means.loc[baseline]
        for value in sorted(set(sefc.index) & set(other.index)):
            row = {"baseline": baseline, axis: value}
            for metric, lower_is_better in COMPARED_METRICS.items():
                row[f"{metric}_pct"] = percent_difference(
                    float(sefc.at[value, metric]), float(other.at[value, metric]), lower_is_better
                )
            rows.append(row)
    if not rows:
        raise ComparisonError("SEFC and the baselines share no sweep cell")
    return pd.DataFrame(rows, columns=["baseline", axis, *(f"{m}_pct" for m in COMPARED_METRICS)])


def render_comparison(table: pd.DataFrame) -> str:
    return table.to_markdown(index=False, floatfmt=".2f")
