"""Sweep grids and the named experiment presets."""

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from sefcsim.core.config import (
    Algorithm,
    SimConfig,
    default_config,
    merge_overrides,
    translate_validation_error,
)
from sefcsim.core.exceptions import ConfigFileNotFoundError, ConfigParseError


class SweepAxis(str, Enum):
    """The configuration parameter a sweep varies."""

    N_UAVS = "N_UAVS"
    MAX_SPEED = "MAX_SPEED"

    @property
    def column(self) -> str:
        return "n_uavs" if self is SweepAxis.N_UAVS else "max_speed"


class SweepCell(BaseModel):
    """One (algorithm, axis value, seed) simulation of a sweep."""

    model_config = ConfigDict(frozen=True)

    algorithm: Algorithm
    value: float
    seed: int

    def describe(self) -> str:
        return f"algorithm={self.algorithm.value} value={self.value:g} seed={self.seed}"


class SweepSpec(BaseModel):
    """A grid of runs: every algorithm × axis value × seed.

    Attributes:
        name: Label used in logs.
        axis: Which parameter varies.
        values: Axis values, strictly increasing.
        seeds: Master seeds run for every cell.
        algorithms: Algorithms compared.
        base: Config overrides applied on top of the base config.
        base_config: Optional YAML config the grid starts from.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "sweep"
    axis: SweepAxis
    values: Tuple[float, ...]
    seeds: Tuple[int, ...]
    algorithms: Tuple[Algorithm, ...] = tuple(Algorithm)
    base: Dict[str, Any] = Field(default_factory=dict)
    base_config: Optional[Path] = None

    @model_validator(mode="after")
    def check_grid(self) -> "SweepSpec":
        if not self.values:
            raise ValueError("values must not be empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("values must be strictly increasing")
        if self.axis is SweepAxis.N_UAVS and any(v != int(v) or v < 1 for v in self.values):
            raise ValueError("N_UAVS values must be positive integers")
        if self.axis is SweepAxis.MAX_SPEED and any(v <= 0 for v in self.values):
            raise ValueError("MAX_SPEED values must be > 0")
        if not self.seeds:
            raise ValueError("seeds must not be empty")
        if not self.algorithms or len(set(self.algorithms)) != len(self.algorithms):
            raise ValueError("algorithms must be non-empty and unique")
        return self

    @classmethod
    def from_yaml(cls, path: str | Path) -> "SweepSpec":
        """Load a sweep file; a relative ``base_config`` resolves next to it."""
        sweep_path = Path(path).expanduser()
        if not sweep_path.is_file():
            raise ConfigFileNotFoundError(f"Sweep file not found: {sweep_path}")
        try:
            data = yaml.safe_load(sweep_path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as error:
            raise ConfigParseError(f"Malformed YAML in {sweep_path}: {error}") from error
        if not isinstance(data, dict):
            raise ConfigParseError(f"Sweep file {sweep_path} must hold a mapping")
        base_config = data.get("base_config")
        if base_config is not None and not Path(base_config).is_absolute():
            data["base_config"] = sweep_path.parent / base_config
        try:
            return cls.model_validate(data)
        except ValidationError as error:
            raise translate_validation_error(error) from error

    def base_simconfig(self) -> SimConfig:
        """The validated config every cell starts from."""
        if self.base_config is not None:
            config = SimConfig.from_yaml(self.base_config)
        else:
            config = default_config()
        return merge_overrides(config, self.base) if self.base else config

    def cells(self) -> List[SweepCell]:
        return [
            SweepCell(algorithm=algorithm, value=value, seed=seed)
            for algorithm in self.algorithms
            for value in self.values
            for seed in self.seeds
        ]

    def cell_config(self, base: SimConfig, cell: SweepCell) -> SimConfig:
        """The config of one cell, reconstructible from (base, value, seed).

        On the speed axis the Gauss-Markov mean speed and noise scale keep
        their ratio to the maximum speed.
        """
        overrides: Dict[str, Any] = {"algorithm": cell.algorithm, "seed": cell.seed}
        if self.axis is SweepAxis.N_UAVS:
            overrides["n_uavs"] = int(cell.value)
        else:
            scale = cell.value / base.mobility.max_speed
            overrides["mobility"] = {
                "max_speed": cell.value,
                "gm_mean_speed": base.mobility.gm_mean_speed * scale,
                "gm_sigma": base.mobility.gm_sigma * scale,
            }
        return merge_overrides(base, overrides)


PRESET_SEEDS = tuple(range(20))

PRESETS: Dict[str, SweepSpec] = {
    "fig2": SweepSpec(
        name="fig2",
        axis=SweepAxis.N_UAVS,
        values=(40, 60, 80, 100, 120, 140),
        seeds=PRESET_SEEDS,
        base={"mobility": {"max_speed": 60.0}},
    ),
    "fig3": SweepSpec(
        name="fig3",
        axis=SweepAxis.N_UAVS,
        values=(40, 60, 80, 100, 120, 140),
        seeds=PRESET_SEEDS,
        base={"mobility": {"max_speed": 60.0}},
    ),
    "fig4": SweepSpec(
        name="fig4",
        axis=SweepAxis.MAX_SPEED,
        values=(10.0, 20.0, 30.0, 40.0, 50.0, 60.0),
        seeds=PRESET_SEEDS,
        base={"n_uavs": 100},
    ),
    "fig5": SweepSpec(
        name="fig5",
        axis=SweepAxis.MAX_SPEED,
        values=(10.0, 20.0, 30.0, 40.0, 50.0, 60.0),
        seeds=PRESET_SEEDS,
        base={"n_uavs": 100},
    ),
}


def load_sweep(target: str | Path) -> SweepSpec:
    """A sweep file path, or the name of a preset."""
    path = Path(target)
    if path.is_file():
        return SweepSpec.from_yaml(path)
    if str(target) in PRESETS:
        return PRESETS[str(target)]
    raise ConfigFileNotFoundError(
        f"No sweep file or preset named {target!r} (presets: {', '.join(sorted(PRESETS))})"
    )
