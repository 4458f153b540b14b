"""Pydantic Settings configuration for simulation runs."""

import math
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Optional, Tuple, Type

import yaml
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    YamlConfigSettingsSource,
)

from sefcsim.core.exceptions import (
    ConfigFileNotFoundError,
    ConfigParseError,
    ConfigValidationError,
    ConfigViolation,
)
from sefcsim.core.models import Vec3
from sefcsim.utils.helpers import TOLERANCE
from sefcsim.utils.types import DictStrAny


class Algorithm(str, Enum):
    """Clustering algorithm driven by a run."""

    SEFC = "SEFC"
    PICA_LITE = "PICA_LITE"
    OSCA_LITE = "OSCA_LITE"


class MobilityModel(str, Enum):
    GAUSS_MARKOV = "GAUSS_MARKOV"
    RANDOM_WAYPOINT = "RANDOM_WAYPOINT"


class ConfigRecord(BaseModel):
    """Frozen configuration record rejecting unknown keys."""

    model_config = ConfigDict(frozen=True, extra="forbid")


def _check_simplex(values: Tuple[float, ...]) -> None:
    if any(value < 0.0 for value in values):
        raise ValueError(f"weights must be non-negative (got {values})")
    total = math.fsum(values)
    if abs(total - 1.0) > TOLERANCE:
        raise ValueError(f"weights must sum to 1 (sum {total:g})")


def _coerce_vec3(value: Any) -> Any:
    if isinstance(value, (list, tuple)) and len(value) == 3:
        return {"x": value[0], "y": value[1], "z": value[2]}
    return value


class MedWeights(ConfigRecord):
    """Coefficients of the mobility-energy difference."""

    c1: float = 0.4
    c2: float = 0.3
    c3: float = 0.3

    @model_validator(mode="after")
    def check_simplex(self) -> "MedWeights":
        _check_simplex((self.c1, self.c2, self.c3))
        return self


class OsfWeights(ConfigRecord):
    """Coefficients of the overall stability factor."""

    alpha: float = 0.25
    beta: float = 0.15
    gamma: float = 0.25
    delta: float = 0.20
    epsilon: float = 0.15

    @model_validator(mode="after")
    def check_simplex(self) -> "OsfWeights":
        _check_simplex((self.alpha, self.beta, self.gamma, self.delta, self.epsilon))
        return self


class Arena(ConfigRecord):
    """Axis-aligned box anchored at the origin (m)."""

    size_x: float = Field(default=2000.0, gt=0)
    size_y: float = Field(default=2000.0, gt=0)
    size_z: float = Field(default=500.0, gt=0)

    @property
    def upper(self) -> Tuple[float, float, float]:
        return (self.size_x, self.size_y, self.size_z)


class MobilitySpec(ConfigRecord):
    model: MobilityModel = MobilityModel.GAUSS_MARKOV
    max_speed: float = Field(default=60.0, gt=0, description="m/s")
    max_accel: float = Field(default=10.0, gt=0, description="m/s²")
    gm_alpha: float = Field(default=0.85, ge=0, le=1)
    gm_mean_speed: float = Field(default=30.0, ge=0, description="m/s")
    gm_sigma: float = Field(default=5.0, ge=0, description="m/s")
    rwp_pause: float = Field(default=2.0, ge=0, description="s")
    rwp_min_speed: float = Field(default=1.0, gt=0, description="m/s")


class RadioConfig(ConfigRecord):
    """Abstract mesh radio: range, per-hop latency and loss."""

    comm_range: Optional[float] = Field(default=None, gt=0, description="m")
    per_hop_latency: float = Field(default=0.002, ge=0, description="s")
    loss_prob: float = Field(default=0.05, ge=0, lt=1)
    max_retransmissions: int = Field(default=3, ge=0)
    beacon_bits: int = Field(default=512, ge=0)
    data_bits: int = Field(default=4000, ge=0)


class EnergyModel(ConfigRecord):
    """First-order radio energy model plus idle drain."""

    e_elec: float = Field(default=5e-8, ge=0, description="J/bit")
    e_amp: float = Field(default=1e-10, ge=0, description="J/bit/m²")
    idle_power: float = Field(default=0.1, ge=0, description="W")
    initial_energy_min: float = Field(default=400.0, gt=0, description="J")
    initial_energy_max: float = Field(default=500.0, gt=0, description="J")

    @model_validator(mode="after")
    def check_energy_range(self) -> "EnergyModel":
        if self.initial_energy_max < self.initial_energy_min:
            raise ValueError("initial_energy_max must be >= initial_energy_min")
        return self


class TrafficSpec(ConfigRecord):
    flows: int = Field(default=10, ge=0)
    packet_interval: float = Field(default=1.0, gt=0, description="s")
    payload_bits: Optional[int] = Field(default=None, ge=0)


class GsConfig(ConfigRecord):
    """Single ground station with a deterministic duty cycle."""

    position: Vec3 = Field(default_factory=lambda: Vec3(1000.0, 1000.0, 0.0))
    range: float = Field(default=800.0, gt=0, description="m")
    duty_cycle: float = Field(default=0.5, ge=0, le=1)
    check_interval: float = Field(default=2.0, gt=0, description="s")
    duty_period: float = Field(default=60.0, gt=0, description="s")

    @field_validator("position", mode="before")
    @classmethod
    def accept_sequences(cls, value: Any) -> Any:
        return _coerce_vec3(value)


class BaselineParams(ConfigRecord):
    """Weights of the simplified comparison algorithms."""

    safe_distance: float = Field(default=30.0, ge=0, description="m")
    pica_mobility_weight: float = 0.5
    pica_energy_weight: float = 0.5
    osca_degree_weight: float = 0.5
    osca_energy_weight: float = 0.5

    @model_validator(mode="after")
    def check_simplexes(self) -> "BaselineParams":
        _check_simplex((self.pica_mobility_weight, self.pica_energy_weight))
        _check_simplex((self.osca_degree_weight, self.osca_energy_weight))
        return self


class SimConfig(BaseSettings):
    """Frozen configuration of one simulation run.

    Source priority is constructor values, environment variables, then YAML.
    Environment names use the ``SEFCSIM_`` prefix and ``__`` for nesting.
    """

    n_uavs: int = 60
    arena: Arena = Field(default_factory=Arena)
    sim_duration: float = Field(default=300.0, description="s")
    tick_dt: float = Field(default=0.1, description="s")
    comm_range: float = Field(default=400.0, description="m")
    med_weights: MedWeights = Field(default_factory=MedWeights)
    osf_weights: OsfWeights = Field(default_factory=OsfWeights)
    med_threshold: float = 0.5
    direction_cos_threshold: float = 0.707
    degree_ref: int = 10
    clustering_interval: float = Field(default=5.0, description="s")
    mobility: MobilitySpec = Field(default_factory=MobilitySpec)
    radio: RadioConfig = Field(default_factory=RadioConfig)
    energy_model: EnergyModel = Field(default_factory=EnergyModel)
    traffic: TrafficSpec = Field(default_factory=TrafficSpec)
    gs: GsConfig = Field(default_factory=GsConfig)
    baselines: BaselineParams = Field(default_factory=BaselineParams)
    handover_margin: float = 0.10
    recluster_threshold: float = 0.3
    algorithm: Algorithm = Algorithm.SEFC
    seed: int = 0

    model_config = SettingsConfigDict(
        frozen=True,
        extra="forbid",
        env_prefix="SEFCSIM_",
        env_nested_delimiter="__",
        yaml_file=None,
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        """Constructor values over environment over YAML."""
        return (
            init_settings,
            env_settings,
            YamlConfigSettingsSource(settings_cls),
        )

    @model_validator(mode="before")
    @classmethod
    def inherit_radio_range(cls, data: Any) -> Any:
        """Let ``radio.comm_range`` default to the top-level ``comm_range``."""
        if not isinstance(data, dict):
            return data
        top = data.get("comm_range", cls.model_fields["comm_range"].default)
        radio = data.get("radio")
        if radio is None:
            data = {**data, "radio": {"comm_range": top}}
        elif isinstance(radio, Mapping) and radio.get("comm_range") is None:
            data = {**data, "radio": {**radio, "comm_range": top}}
        elif isinstance(radio, RadioConfig) and radio.comm_range is None:
            data = {**data, "radio": radio.model_copy(update={"comm_range": top})}
        return data

    @field_validator("n_uavs")
    @classmethod
    def check_n_uavs(cls, value: int) -> int:
        if value < 1:
            raise ValueError("at least one UAV required")
        return value

    @field_validator("sim_duration")
    @classmethod
    def check_duration(cls, value: float) -> float:
        if not math.isfinite(value) or value < 0:
            raise ValueError("sim_duration must be finite and >= 0")
        return value

    @field_validator("tick_dt")
    @classmethod
    def check_tick(cls, value: float) -> float:
        if not math.isfinite(value) or value <= 0:
            raise ValueError("tick_dt must be > 0")
        return value

    @field_validator("comm_range")
    @classmethod
    def check_range(cls, value: float) -> float:
        if value <= 0:
            raise ValueError("comm_range must be > 0")
        return value

    @field_validator("med_threshold")
    @classmethod
    def check_med_threshold(cls, value: float) -> float:
        if not 0.0 < value <= 1.0 + TOLERANCE:
            raise ValueError("med_threshold must lie in (0, 1]")
        return value

    @field_validator("direction_cos_threshold")
    @classmethod
    def check_direction(cls, value: float) -> float:
        if not -1.0 <= value <= 1.0:
            raise ValueError("direction_cos_threshold must lie in [-1, 1]")
        return value

    @field_validator("degree_ref")
    @classmethod
    def check_degree_ref(cls, value: int) -> int:
        if value < 1:
            raise ValueError("degree_ref must be >= 1")
        return value

    @field_validator("handover_margin", "recluster_threshold")
    @classmethod
    def check_non_negative(cls, value: float) -> float:
        if value < 0:
            raise ValueError("must be >= 0")
        return value

    @field_validator("seed")
    @classmethod
    def check_seed(cls, value: int) -> int:
        if not 0 <= value < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        return value

    @model_validator(mode="after")
    def check_cross_field(self) -> "SimConfig":
        if self.clustering_interval < self.tick_dt - TOLERANCE:
            raise ValueError("clustering_interval must be >= tick_dt")
        if self.traffic.packet_interval < self.tick_dt - TOLERANCE:
            raise ValueError("traffic.packet_interval must be >= tick_dt")
        if self.gs.check_interval < self.tick_dt - TOLERANCE:
            raise ValueError("gs.check_interval must be >= tick_dt")
        if abs(self.radio.comm_range - self.comm_range) > TOLERANCE:
            raise ValueError("radio.comm_range must equal comm_range")
        return self

    @property
    def payload_bits(self) -> int:
        """Data packet size: the traffic payload, else the radio default."""
        if self.traffic.payload_bits is not None:
            return self.traffic.payload_bits
        return self.radio.data_bits

    @classmethod
    def from_yaml(cls, path: str | Path, **overrides: Any) -> "SimConfig":
        """Load and validate a YAML config with optional highest-priority overrides."""
        yaml_path = Path(path).expanduser()
        if not yaml_path.is_file():
            raise ConfigFileNotFoundError(f"Configuration file not found: {yaml_path}")
        try:
            data = yaml.safe_load(yaml_path.read_text(encoding="utf-8"))
        except yaml.YAMLError as error:
            raise ConfigParseError(f"Malformed YAML in {yaml_path}: {error}") from error
        if data is not None and not isinstance(data, dict):
            raise ConfigParseError(f"Configuration file {yaml_path} must hold a mapping")

        class YamlSimConfig(cls):
            model_config = SettingsConfigDict(
                **{**cls.model_config, "yaml_file": yaml_path}
            )

        try:
            loaded = YamlSimConfig(**overrides)
        except ValidationError as error:
            raise translate_validation_error(error) from error
        return validate_config(loaded.model_dump())


def translate_validation_error(error: ValidationError) -> ConfigParseError | ConfigValidationError:
    """Turn pydantic errors into parse errors (unknown keys) or named violations."""
    violations = []
    for detail in error.errors():
        location = ".".join(str(part) for part in detail["loc"]) or "<root>"
        if detail["type"] == "extra_forbidden":
            return ConfigParseError(f"Unknown configuration key: {location}", key=location)
        message = detail["msg"]
        if message.startswith("Value error, "):
            message = message[len("Value error, ") :]
        violations.append(
            ConfigViolation(field=location, value=detail.get("input"), message=message)
        )
    return ConfigValidationError(tuple(violations))


def validate_config(raw: SimConfig | Mapping[str, Any]) -> SimConfig:
    """Return a validated config, raising one named violation per broken invariant.

    Validation never consults the environment or files, so it is idempotent:
    ``validate_config(validate_config(c)) == validate_config(c)``.
    """
    data = raw.model_dump() if isinstance(raw, SimConfig) else dict(raw)
    try:
        return SimConfig.model_validate(data)
    except ValidationError as error:
        raise translate_validation_error(error) from error


def default_config(**overrides: Any) -> SimConfig:
    """The documented default configuration, optionally overridden."""
    return validate_config(overrides)


def merge_overrides(base: SimConfig, overrides: Mapping[str, Any]) -> SimConfig:
    """Deep-merge nested overrides into ``base`` and re-validate."""

    def merge(target: DictStrAny, updates: Mapping[str, Any]) -> DictStrAny:
        merged = dict(target)
        for key, value in updates.items():
            if isinstance(value, Mapping) and isinstance(merged.get(key), dict):
                merged[key] = merge(merged[key], value)
            else:
                merged[key] = value
        return merged

    return validate_config(merge(base.model_dump(), overrides))


def dump_config_yaml(config: SimConfig) -> str:
    """Render a config as YAML whose keys mirror the field names."""
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False)
