"""Parallel sweep execution and CSV output."""

from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import Any, Dict, List

import pandas as pd
from loguru import logger
from tqdm import tqdm

from sefcsim.core.config import SimConfig, validate_config
from sefcsim.core.exceptions import SweepError
from sefcsim.core.models import MetricsSummary
from sefcsim.experiments.presets import SweepCell, SweepSpec
from sefcsim.simulation.engine import run_simulation
from sefcsim.utils.helpers import handle_errors
from sefcsim.utils.types import DictStrAny

METRIC_COLUMNS = [
    "algorithm",
    "seed",
    "n_uavs",
    "max_speed",
    "avg_delay_s",
    "delivery_ratio",
    "avg_energy_j",
    "avg_ch_duration_s",
    "avg_cm_switches",
]
VALUE_COLUMNS = METRIC_COLUMNS[4:]


def metrics_row(config: SimConfig, summary: MetricsSummary) -> Dict[str, Any]:
    """One CSV row in SI units; absent metrics stay ``None``."""
    return {
        "algorithm": config.algorithm.value,
        "seed": config.seed,
        "n_uavs": config.n_uavs,
        "max_speed": config.mobility.max_speed,
        "avg_delay_s": summary.avg_delay,
        "delivery_ratio": summary.delivery_ratio,
        "avg_energy_j": summary.avg_energy,
        "avg_ch_duration_s": summary.avg_ch_duration,
        "avg_cm_switches": summary.avg_cm_switches,
    }


def metrics_frame(rows: List[DictStrAny]) -> pd.DataFrame:
    return pd.DataFrame(rows, columns=METRIC_COLUMNS)


@handle_errors("Sweep cell failed", error_type=SweepError)
def execute_cell(config_data: DictStrAny) -> Dict[str, Any]:
    """Run one cell from its plain-data config (picklable for worker processes)."""
    config = validate_config(config_data)
    artifacts = run_simulation(config)
    if artifacts.summary.avg_delay is None:
        logger.warning(
            "No packet delivered for {} seed {}", config.algorithm.value, config.seed
        )
    return metrics_row(config, artifacts.summary)


def _run_cells(configs: Dict[SweepCell, DictStrAny], workers: int) -> Dict[SweepCell, Dict]:
    rows: Dict[SweepCell, Dict] = {}
    with tqdm(total=len(configs), desc="Running sweep", unit="run") as progress:
        if workers == 1:
            for cell, data in configs.items():
                try:
                    rows[cell] = execute_cell(data)
                except SweepError as error:
                    raise SweepError(f"{cell.describe()}: {error}") from error
                progress.update(1)
            return rows
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(execute_cell, data): cell for cell, data in configs.items()}
            for future in as_completed(futures):
                cell = futures[future]
                try:
                    rows[cell] = future.result()
                except Exception as error:
                    for pending in futures:
                        pending.cancel()
                    raise SweepError(f"{cell.describe()}: {error}") from error
                progress.update(1)
    return rows


def run_sweep(spec: SweepSpec, workers: int = 1) -> pd.DataFrame:
    """Run every cell of ``spec`` and return rows sorted by (algorithm, axis value, seed).

    The ordering never depends on completion order or worker count.
    """
    if workers < 1:
        raise SweepError("workers must be >= 1")
    base = spec.base_simconfig()
    cells = spec.cells()
    configs = {cell: spec.cell_config(base, cell).model_dump(mode="json") for cell in cells}
    logger.info("Sweep {}: {} runs on {} workers", spec.name, len(cells), workers)
    rows = _run_cells(configs, workers)
    frame = metrics_frame([rows[cell] for cell in cells])
    return frame.sort_values(
        ["algorithm", spec.axis.column, "seed"], kind="mergesort"
    ).reset_index(drop=True)


def aggregate(frame: pd.DataFrame, axis_column: str) -> pd.DataFrame:
    """Mean and standard deviation of every metric per (algorithm, axis value) cell."""
    grouped = frame.groupby(["algorithm", axis_column], sort=True)[VALUE_COLUMNS]
    stats = grouped.agg(["mean", "std"])
    stats.columns = [f"{metric}_{stat}" for metric, stat in stats.columns]
    return stats.reset_index()


def write_sweep(frame: pd.DataFrame, spec: SweepSpec, out_dir: str | Path) -> Dict[str, Path]:
    """Write ``metrics.csv`` and ``aggregate_<axis>.csv`` into ``out_dir``."""
    target = Path(out_dir)
    metrics_path = target / "metrics.csv"
    aggregate_path = target / f"aggregate_{spec.axis.column}.csv"
    try:
        target.mkdir(parents=True, exist_ok=True)
        frame.to_csv(metrics_path, index=False, lineterminator="\n")
        aggregate(frame, spec.axis.column).to_csv(
            aggregate_path, index=False, lineterminator="\n"
        )
    except OSError as error:
        raise SweepError(f"Cannot write sweep output to {target}: {error}") from error
    logger.info("Wrote {} rows to {}", len(frame), metrics_path)
    return {"metrics": metrics_path, "aggregate": aggregate_path}
