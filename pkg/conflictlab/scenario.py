"""
Scenario configuration for ConflictLab.

A scenario is a single YAML file. Every constant has an explicit default and
unknown keys are rejected, so a typo never silently falls back to a default.
"""

import logging
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .exceptions import ConfigInvalidError
from .models import (
    CIO_RANGE_DB, H_RANGE_DB, TTT_VALUES_MS, TX_POWER_RANGE_DBM,
    KpiId, ParamId, RewardConfig,
)

logger = logging.getLogger(__name__)

HEX_CELL_COUNTS = (1, 7, 19, 37)
KNOWN_XAPPS = ("mro", "mlb", "stealth")


class StrictModel(BaseModel):
    """Base for scenario sections: unknown keys are errors."""
    model_config = ConfigDict(extra="forbid")


class TopologyConfig(StrictModel):
    """Cell layout."""
    layout: Literal["hex", "line"] = "hex"
    cell_count: int = Field(default=19, gt=0)
    spacing_m: float = Field(default=800.0, gt=0)
    capacity: int = Field(default=12, gt=0)
    tx_power_dbm: float = 30.0
    capacity_overrides: Dict[int, int] = Field(default_factory=dict)
    tx_power_overrides: Dict[int, float] = Field(default_factory=dict)
    neighbor_distance_factor: float = Field(default=1.5, gt=0)

    @model_validator(mode="after")
    def _check_layout(self):
        if self.layout == "hex" and self.cell_count not in HEX_CELL_COUNTS:
            raise ValueError(f"hex layout supports {HEX_CELL_COUNTS} cells, got {self.cell_count}")
        for cell in list(self.capacity_overrides) + list(self.tx_power_overrides):
            if not 0 <= cell < self.cell_count:
                raise ValueError(f"override references unknown cell {cell}")
        return self


class MobilityConfig(StrictModel):
    """UE population and movement."""
    ue_count: int = Field(default=150, ge=0)
    mode: Literal["random_waypoint", "scripted"] = "random_waypoint"
    speed_min_mps: float = Field(default=3.0, ge=0)
    speed_max_mps: float = Field(default=15.0, ge=0)
    scripted_paths: List[List[Tuple[float, float]]] = Field(default_factory=list)
    scripted_speed_mps: float = Field(default=10.0, ge=0)

    @model_validator(mode="after")
    def _check_mode(self):
        if self.speed_max_mps < self.speed_min_mps:
            raise ValueError("speed_max_mps must be >= speed_min_mps")
        if self.mode == "scripted":
            if len(self.scripted_paths) != self.ue_count:
                raise ValueError("scripted mode needs exactly one path per UE")
            if any(len(path) == 0 for path in self.scripted_paths):
                raise ValueError("scripted paths must contain at least one waypoint")
        return self


class RadioConfig(StrictModel):
    """Propagation and radio-link-failure constants."""
    pl0_db: float = 30.0
    d0_m: float = Field(default=1.0, gt=0)
    exponent: float = Field(default=3.5, gt=0)
    d_min_m: float = Field(default=1.0, gt=0)
    shadowing_sigma_db: float = Field(default=4.0, ge=0)
    shadowing_rho: float = Field(default=0.9, ge=0, le=1)
    rlf_floor_dbm: float = -100.0
    t_rlf_ms: int = Field(default=300, ge=0)


class HandoverConfig(StrictModel):
    """Initial handover parameters and classification windows."""
    default_h_db: float = 3.0
    default_ttt_ms: int = 100
    default_cio_db: float = 0.0
    t_pp_ms: int = Field(default=2000, ge=0)
    t_early_ms: int = Field(default=500, ge=0)

    @model_validator(mode="after")
    def _check_ranges(self):
        if not H_RANGE_DB[0] <= self.default_h_db <= H_RANGE_DB[1]:
            raise ValueError("default_h_db out of range")
        if self.default_ttt_ms not in TTT_VALUES_MS:
            raise ValueError(f"default_ttt_ms must be one of {TTT_VALUES_MS}")
        if not CIO_RANGE_DB[0] <= self.default_cio_db <= CIO_RANGE_DB[1]:
            raise ValueError("default_cio_db out of range")
        return self


class TimingConfig(StrictModel):
    """Clock settings."""
    tick_ms: int = Field(default=100, gt=0)
    horizon_ticks: int = 10000
    kpi_window_ticks: int = Field(default=50, gt=0)

    @model_validator(mode="after")
    def _check_horizon(self):
        if self.horizon_ticks <= 0:
            raise ValueError("horizon_ticks must be positive")
        if self.horizon_ticks % self.kpi_window_ticks:
            raise ValueError("horizon_ticks must be a multiple of kpi_window_ticks")
        return self

    @property
    def window_count(self) -> int:
        return self.horizon_ticks // self.kpi_window_ticks


class MlbPolicy(StrictModel):
    """Mobility load balancing control law."""
    enabled: bool = False
    load_imbalance_threshold: float = Field(default=0.2, ge=0)
    cio_step_db: float = Field(default=1.0, gt=0)


class MroPolicy(StrictModel):
    """Mobility robustness optimisation control law."""
    enabled: bool = False
    pingpong_rate_threshold: float = Field(default=2.0, ge=0)
    rlf_threshold: float = Field(default=0.0, ge=0)
    h_step_db: float = Field(default=0.5, gt=0)
    ttt_step: int = Field(default=1, gt=0)


class StealthPolicy(StrictModel):
    """Power xApp that under-declares its impact."""
    enabled: bool = False
    victim_cell: int = 0
    power_step_db: float = Field(default=10.0, gt=0)
    trigger_every_windows: int = Field(default=50, gt=0)


class InjectorPolicy(StrictModel):
    """Scripted writer used to inject same-parameter contention."""
    enabled: bool = True
    xapp_id: str = Field(default="injector", min_length=1)
    param_id: ParamId = ParamId.CIO
    target: str = "0->1"
    values: List[float] = Field(default_factory=lambda: [3.0, -3.0])
    every_windows: int = Field(default=1, gt=0)
    declared_impacts: List[KpiId] = Field(default_factory=lambda: [KpiId.HO_COUNT])


class PolicyConfig(StrictModel):
    """Per-xApp enable flags and control-law constants."""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    mlb: MlbPolicy = Field(default_factory=MlbPolicy)
    # "mro" would shadow type.mro on the model class
    mro_policy: MroPolicy = Field(default_factory=MroPolicy, alias="mro")
    stealth: StealthPolicy = Field(default_factory=StealthPolicy)
    injectors: List[InjectorPolicy] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_injector_ids(self):
        ids = [i.xapp_id for i in self.injectors]
        if len(set(ids)) != len(ids):
            raise ValueError("injector xapp_ids must be unique")
        clashes = sorted(set(ids) & set(KNOWN_XAPPS))
        if clashes:
            raise ValueError(f"injector xapp_ids clash with built-in xApps: {clashes}")
        return self

    def enabled_names(self) -> List[str]:
        """Enabled xApps in registration order: built-ins first, then injectors."""
        names = [name for name in KNOWN_XAPPS if self.policy(name).enabled]
        return names + [i.xapp_id for i in self.injectors if i.enabled]

    def policy(self, name: str):
        """Control-law section of a built-in xApp."""
        return self.mro_policy if name == "mro" else getattr(self, name)

    def all_names(self) -> List[str]:
        return list(KNOWN_XAPPS) + [i.xapp_id for i in self.injectors]


class DetectionConfig(StrictModel):
    """KPIMON/AD/CD constants."""
    enabled: bool = True
    baseline_window: int = Field(default=20, gt=1)
    k: float = Field(default=3.0, gt=0)
    lag_max: int = Field(default=10, ge=0)
    tau: float = Field(default=0.6, ge=-1, le=1)
    rebaseline_after: int = Field(default=5, gt=0)
    action_lookback_windows: int = Field(default=2, gt=0)
    correlation_span: int = Field(default=100, gt=2)
    monitored_kpis: List[KpiId] = Field(
        default_factory=lambda: [
            KpiId.MEAN_LOAD, KpiId.CALL_BLOCKS, KpiId.RLF_COUNT,
            KpiId.HO_COUNT, KpiId.PINGPONG_COUNT,
        ]
    )


class MitigationConfig(StrictModel):
    """CM constants."""
    cm_enabled: bool = False
    cooldown_windows: int = Field(default=10, gt=0)
    tau_hard: float = Field(default=0.8, ge=-1, le=1)
    priorities: Union[Literal["learn"], List[str], None] = None

    @field_validator("priorities")
    @classmethod
    def _check_priorities(cls, v):
        if isinstance(v, list) and len(set(v)) != len(v):
            raise ValueError("priorities must not repeat an xApp")
        return v


class LearningConfig(StrictModel):
    """Bandit settings for priority learning."""
    episodes: int = Field(default=200, gt=0)
    epsilon: float = Field(default=0.1, ge=0, le=1)
    episode_horizon_ticks: int = Field(default=3000, gt=0)
    seed_schedule: Optional[List[int]] = None
    learner_seed: int = 0

    def seeds(self, base_seed: int) -> List[int]:
        """Per-episode seeds; an explicit schedule is cycled."""
        if self.seed_schedule:
            return [self.seed_schedule[i % len(self.seed_schedule)] for i in range(self.episodes)]
        return [base_seed + i for i in range(self.episodes)]


class ScenarioConfig(StrictModel):
    """Complete experiment description."""
    name: str = "scenario"
    seed: int = 42
    topology: TopologyConfig = Field(default_factory=TopologyConfig)
    mobility: MobilityConfig = Field(default_factory=MobilityConfig)
    radio: RadioConfig = Field(default_factory=RadioConfig)
    handover: HandoverConfig = Field(default_factory=HandoverConfig)
    timing: TimingConfig = Field(default_factory=TimingConfig)
    xapps: PolicyConfig = Field(default_factory=PolicyConfig)
    detection: DetectionConfig = Field(default_factory=DetectionConfig)
    mitigation: MitigationConfig = Field(default_factory=MitigationConfig)
    learning: LearningConfig = Field(default_factory=LearningConfig)
    reward: RewardConfig = Field(default_factory=RewardConfig)

    @model_validator(mode="after")
    def _check_cross_fields(self):
        cells = self.topology.cell_count
        if self.detection.enabled:
            needed = 2 * self.detection.baseline_window * self.timing.kpi_window_ticks
            if self.timing.horizon_ticks < needed:
                raise ValueError(
                    f"horizon_ticks must be >= {needed} (2 x baseline_window x kpi_window_ticks) "
                    f"when detection is enabled"
                )
        if self.xapps.stealth.enabled and not 0 <= self.xapps.stealth.victim_cell < cells:
            raise ValueError(f"stealth victim_cell {self.xapps.stealth.victim_cell} does not exist")
        for injector in self.xapps.injectors:
            for cell in _target_cells(injector.target):
                if not 0 <= cell < cells:
                    raise ValueError(f"injector {injector.xapp_id} target references unknown cell {cell}")
        for tx in [self.topology.tx_power_dbm, *self.topology.tx_power_overrides.values()]:
            if not TX_POWER_RANGE_DBM[0] <= tx <= TX_POWER_RANGE_DBM[1]:
                raise ValueError(f"tx power {tx} dBm out of range {TX_POWER_RANGE_DBM}")
        if isinstance(self.mitigation.priorities, list):
            unknown = [name for name in self.mitigation.priorities if name not in self.xapps.all_names()]
            if unknown:
                raise ValueError(f"unknown xApps in priorities: {unknown}")
        if self.mitigation.priorities == "learn":
            if self.learning.episode_horizon_ticks % self.timing.kpi_window_ticks:
                raise ValueError("learning.episode_horizon_ticks must be a multiple of kpi_window_ticks")
        return self

    def with_seed(self, seed: Optional[int]) -> "ScenarioConfig":
        if seed is None:
            return self
        return self.model_copy(update={"seed": seed})


def _target_cells(target: str) -> List[int]:
    try:
        return [int(part) for part in target.split("->")]
    except ValueError:
        raise ValueError(f"malformed target: {target!r}")


def format_validation_errors(error: ValidationError) -> List[str]:
    """One human-readable line per validation error."""
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{location}: {item['msg']}")
    return lines


def parse_scenario(data: Optional[dict]) -> ScenarioConfig:
    """Validate an already-parsed mapping."""
    try:
        return ScenarioConfig.model_validate(data or {})
    except ValidationError as e:
        errors = format_validation_errors(e)
        raise ConfigInvalidError(f"scenario is invalid ({len(errors)} errors)", errors) from e


def load_scenario(path: Union[str, Path], seed: Optional[int] = None) -> ScenarioConfig:
    """
    Load and validate a scenario file.

    Args:
        path: YAML scenario file
        seed: Optional seed override

    Returns:
        Validated ScenarioConfig

    Raises:
        ConfigInvalidError: When the file does not parse or validate.
        OSError: When the file cannot be read.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigInvalidError(f"{path}: not valid YAML", [str(e)]) from e
    if data is not None and not isinstance(data, dict):
        raise ConfigInvalidError(f"{path}: top level must be a mapping", ["<root>: expected a mapping"])

    scenario = parse_scenario(data).with_seed(seed)
    logger.info(f"Loaded scenario '{scenario.name}' from {path} (seed {scenario.seed})")
    return scenario
