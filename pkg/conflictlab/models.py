"""
Data models for ConflictLab.

Defines the core data structures shared by the simulator, the RIC platform,
the xApps and the detection/mitigation pipeline.
"""

import math
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

# Cell id used for "no cell" in event records (outage side of an RLF / re-attach).
NO_CELL = -1

H_RANGE_DB: Tuple[float, float] = (0.0, 10.0)
CIO_RANGE_DB: Tuple[float, float] = (-6.0, 6.0)
TX_POWER_RANGE_DBM: Tuple[float, float] = (10.0, 46.0)
TTT_VALUES_MS: Tuple[int, ...] = (
    0, 40, 64, 80, 100, 128, 160, 256, 320, 480, 512, 640, 1024, 1280, 2560, 5120,
)


class ParamId(str, Enum):
    """Writable RAN parameters."""
    H = "H"
    TTT = "TTT"
    CIO = "CIO"
    TX_POWER = "TX_POWER"


class KpiId(str, Enum):
    """KPIs produced per cell and window."""
    MEAN_LOAD = "mean_load"
    CALL_BLOCKS = "call_blocks"
    RLF_COUNT = "rlf_count"
    HO_COUNT = "ho_count"
    PINGPONG_COUNT = "pingpong_count"
    TOO_EARLY_COUNT = "too_early_count"
    TOO_LATE_COUNT = "too_late_count"


class EventKind(str, Enum):
    """Kinds of simulator events."""
    HANDOVER = "Handover"
    PING_PONG_HANDOVER = "PingPongHandover"
    TOO_LATE_HO = "TooLateHo"
    TOO_EARLY_HO = "TooEarlyHo"
    RLF = "Rlf"
    CALL_BLOCK = "CallBlock"


HANDOVER_KINDS = frozenset({EventKind.HANDOVER, EventKind.PING_PONG_HANDOVER})


class HandoverClass(str, Enum):
    """Classification of an executed handover."""
    NORMAL = "Normal"
    PING_PONG = "PingPong"
    TOO_EARLY = "TooEarly"


class ChangeResult(str, Enum):
    """Result of a parameter write against the simulator."""
    APPLIED = "applied"
    OUT_OF_RANGE = "rejected(out_of_range)"
    UNKNOWN_TARGET = "rejected(unknown_target)"


class ActionOutcome(str, Enum):
    """Outcome recorded in the xNIB for a submitted action."""
    APPLIED = "Applied"
    BLOCKED_BY_PRIORITY = "BlockedByPriority"
    REJECTED = "Rejected"


class ConflictType(str, Enum):
    """Conflict classes between xApps."""
    DIRECT = "Direct"
    INDIRECT = "Indirect"
    IMPLICIT = "Implicit"


class Direction(str, Enum):
    """Direction of a KPI anomaly."""
    DEGRADATION = "degradation"
    IMPROVEMENT = "improvement"


# Radio plane

class CellState(BaseModel):
    """A cell (gNB) as seen at a tick boundary."""
    model_config = ConfigDict(frozen=True)

    cell_id: int
    position: Tuple[float, float]
    tx_power: float
    capacity: int = Field(gt=0)
    connected_ues: FrozenSet[int] = Field(default_factory=frozenset)

    @computed_field
    @property
    def load(self) -> float:
        return len(self.connected_ues) / self.capacity

    @model_validator(mode="after")
    def _check_capacity(self):
        if len(self.connected_ues) > self.capacity:
            raise ValueError(
                f"cell {self.cell_id} has {len(self.connected_ues)} UEs over capacity {self.capacity}"
            )
        return self


class UeState(BaseModel):
    """A UE as seen at a tick boundary."""
    ue_id: int
    position: Tuple[float, float]
    velocity: Tuple[float, float] = (0.0, 0.0)
    serving_cell: Optional[int] = None  # None means outage
    rsrp_map: Dict[int, float] = Field(default_factory=dict)
    a3_timer: Dict[int, int] = Field(default_factory=dict)
    last_serving: Optional[Tuple[int, int]] = None  # (cell_id, handover_tick)
    rlf_timer: int = 0


class HandoverParams(BaseModel):
    """
    The contested control surface: hysteresis and TTT per cell, CIO per ordered pair.

    Missing entries fall back to the defaults.
    """
    model_config = ConfigDict(frozen=True)

    hysteresis_h: Dict[int, float] = Field(default_factory=dict)
    ttt: Dict[int, int] = Field(default_factory=dict)
    cio: Dict[Tuple[int, int], float] = Field(default_factory=dict)
    default_h: float = 3.0
    default_ttt: int = 100
    default_cio: float = 0.0

    @field_validator("hysteresis_h")
    @classmethod
    def _check_h(cls, v: Dict[int, float]) -> Dict[int, float]:
        for cell, value in v.items():
            if not H_RANGE_DB[0] <= value <= H_RANGE_DB[1]:
                raise ValueError(f"hysteresis for cell {cell} out of range: {value}")
        return v

    @field_validator("ttt")
    @classmethod
    def _check_ttt(cls, v: Dict[int, int]) -> Dict[int, int]:
        for cell, value in v.items():
            if value not in TTT_VALUES_MS:
                raise ValueError(f"TTT for cell {cell} not in the allowed set: {value}")
        return v

    @field_validator("cio")
    @classmethod
    def _check_cio(cls, v: Dict[Tuple[int, int], float]) -> Dict[Tuple[int, int], float]:
        for pair, value in v.items():
            if not CIO_RANGE_DB[0] <= value <= CIO_RANGE_DB[1]:
                raise ValueError(f"CIO for pair {pair} out of range: {value}")
        return v

    def h_for(self, cell: int) -> float:
        return self.hysteresis_h.get(cell, self.default_h)

    def ttt_for(self, cell: int) -> int:
        return self.ttt.get(cell, self.default_ttt)

    def cio_for(self, serving: int, neighbor: int) -> float:
        return self.cio.get((serving, neighbor), self.default_cio)


class ParameterSnapshot(BaseModel):
    """Read-only view of every writable parameter, handed to xApps each window."""
    model_config = ConfigDict(frozen=True)

    handover: HandoverParams
    tx_power: Dict[int, float] = Field(default_factory=dict)


class KpiSample(BaseModel):
    """Per-cell KPIs aggregated over one window."""
    model_config = ConfigDict(frozen=True)

    window_end_tick: int
    cell_id: int
    mean_load: float = Field(ge=0.0, le=1.0)
    call_blocks: int = Field(default=0, ge=0)
    rlf_count: int = Field(default=0, ge=0)
    ho_count: int = Field(default=0, ge=0)
    pingpong_count: int = Field(default=0, ge=0)
    too_early_count: int = Field(default=0, ge=0)
    too_late_count: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_pingpong_subset(self):
        if self.pingpong_count > self.ho_count:
            raise ValueError("pingpong_count cannot exceed ho_count")
        return self

    def value(self, kpi: KpiId) -> float:
        return float(getattr(self, kpi.value))


class SimEvent(BaseModel):
    """One simulator event."""
    model_config = ConfigDict(frozen=True)

    tick: int
    kind: EventKind
    ue_id: int
    from_cell: int = NO_CELL
    to_cell: int = NO_CELL


# RIC plane

class XAppDescriptor(BaseModel):
    """Self-declared contract of an xApp."""
    model_config = ConfigDict(frozen=True)

    xapp_id: str = Field(min_length=1)
    declared_params: FrozenSet[ParamId]
    declared_impacts: FrozenSet[KpiId] = Field(default_factory=frozenset)
    priority: Optional[int] = None

    @field_validator("declared_params")
    @classmethod
    def _params_not_empty(cls, v: FrozenSet[ParamId]) -> FrozenSet[ParamId]:
        if not v:
            raise ValueError("declared_params must not be empty")
        return v


class ActionRecord(BaseModel):
    """One xNIB ledger entry."""
    model_config = ConfigDict(frozen=True)

    tick: int
    xapp_id: str
    target: str
    param_id: ParamId
    old_value: Optional[float] = None
    new_value: float
    outcome: ActionOutcome


class ProposedAction(BaseModel):
    """A parameter write an xApp wants to submit."""
    model_config = ConfigDict(frozen=True)

    target: str
    param_id: ParamId
    value: float


class KpiWindow(BaseModel):
    """All cell samples of one completed KPI window."""
    model_config = ConfigDict(frozen=True)

    window_index: int
    window_end_tick: int
    samples: Tuple[KpiSample, ...]

    def by_cell(self) -> Dict[int, KpiSample]:
        return {s.cell_id: s for s in self.samples}


# Detection

class AnomalyFlag(BaseModel):
    """A KPI sample that deviates from its rolling baseline."""
    model_config = ConfigDict(frozen=True)

    window_end_tick: int
    cell_id: int
    kpi_id: KpiId
    value: float
    baseline_mean: float
    baseline_std: float
    z_score: float
    direction: Direction
    onset: bool = False


ParameterRef = Tuple[str, ParamId]


class ConflictReport(BaseModel):
    """A classified conflict between xApps."""
    model_config = ConfigDict(frozen=True)

    detected_at_tick: int
    conflict_type: ConflictType
    xapps: Tuple[str, ...]
    parameters: Dict[str, Tuple[ParameterRef, ...]] = Field(default_factory=dict)
    impacted_kpis: Tuple[KpiId, ...] = ()
    evidence: Dict[str, float] = Field(default_factory=dict)
    anomaly_refs: Tuple[Tuple[int, KpiId], ...] = ()

    @field_validator("evidence")
    @classmethod
    def _check_evidence(cls, v: Dict[str, float]) -> Dict[str, float]:
        for xapp_id, score in v.items():
            if not -1.0 <= score <= 1.0 or math.isnan(score):
                raise ValueError(f"evidence for {xapp_id} must be in [-1, 1]: {score}")
        return v

    def sort_key(self) -> Tuple[int, str, Tuple[str, ...]]:
        order = {ConflictType.DIRECT: "0", ConflictType.INDIRECT: "1", ConflictType.IMPLICIT: "2"}
        return (self.detected_at_tick, order[self.conflict_type], self.xapps)

    def to_export(self) -> Dict:
        """Dictionary in the conflicts.jsonl layout."""
        return {
            "detected_at_tick": self.detected_at_tick,
            "conflict_type": self.conflict_type.value,
            "xapps": list(self.xapps),
            "parameters": {
                xapp_id: [[target, param.value] for target, param in refs]
                for xapp_id, refs in self.parameters.items()
            },
            "impacted_kpis": [k.value for k in self.impacted_kpis],
            "evidence": dict(self.evidence),
        }


# Mitigation

class BlockRule(BaseModel):
    """An active block on (xApp, target pattern, parameter)."""
    model_config = ConfigDict(frozen=True)

    xapp_id: str
    target_pattern: str  # exact target or "*"
    param_id: ParamId
    expires_at_tick: int

    def covers(self, xapp_id: str, target: str, param_id: ParamId) -> bool:
        return (
            self.xapp_id == xapp_id
            and self.param_id == param_id
            and self.target_pattern in ("*", target)
        )


class PriorityPolicy(BaseModel):
    """Priority ordering plus the currently active blocks."""
    model_config = ConfigDict(frozen=True)

    ordering: Tuple[str, ...]
    active_blocks: Tuple[BlockRule, ...] = ()

    def rank(self, xapp_id: str) -> int:
        """Position in the ordering; lower is higher precedence."""
        try:
            return self.ordering.index(xapp_id)
        except ValueError:
            return len(self.ordering)

    def pruned(self, tick: int) -> "PriorityPolicy":
        """Drop blocks that expired before ``tick``."""
        alive = tuple(b for b in self.active_blocks if b.expires_at_tick >= tick)
        if len(alive) == len(self.active_blocks):
            return self
        return self.model_copy(update={"active_blocks": alive})


class RewardConfig(BaseModel):
    """Weights of the episode reward."""
    model_config = ConfigDict(extra="forbid")

    w_load: float = Field(default=1.0, ge=0.0)
    w_rlf: float = Field(default=1.0, ge=0.0)
    w_pp: float = Field(default=1.0, ge=0.0)

    @model_validator(mode="after")
    def _check_weights(self):
        if self.w_load <= 0 and self.w_rlf <= 0 and self.w_pp <= 0:
            raise ValueError("at least one reward weight must be positive")
        return self


class EpisodeAggregate(BaseModel):
    """KPI aggregate of one run, the input of the reward."""
    load_stddev: float = 0.0
    rlf_rate: float = 0.0
    pingpong_rate: float = 0.0


class LearnedPolicy(BaseModel):
    """Exported result of priority learning."""
    ordering: List[str]
    arm_values: Dict[str, float] = Field(default_factory=dict)
    episodes: int = 0


class RewardTraceRow(BaseModel):
    """One learning episode."""
    episode: int
    arm: str
    reward: float
