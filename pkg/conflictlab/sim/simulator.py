"""
Deterministic discrete-time RAN simulator.

Per tick: apply pending parameter writes, move UEs, recompute RSRP, re-attach
UEs left in outage, check radio-link failures, run A3 handovers, update loads.
Identical (scenario, seed) pairs produce identical event streams.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..exceptions import UnknownParameterError
from ..models import (
    CIO_RANGE_DB, H_RANGE_DB, NO_CELL, TTT_VALUES_MS, TX_POWER_RANGE_DBM,
    CellState, ChangeResult, EventKind, HandoverParams, ParameterSnapshot,
    ParamId, SimEvent, UeState,
)
from ..scenario import ScenarioConfig
from .handover import is_pingpong
from .mobility import MobilityModel, RandomWaypointMobility, ScriptedMobility
from .radio import ShadowingField, rsrp_matrix
from .topology import bounding_box, build_neighbors, build_positions

logger = logging.getLogger(__name__)

CELL_PARAMS = frozenset({ParamId.H, ParamId.TTT, ParamId.TX_POWER})


def format_target(cell: int, neighbor: Optional[int] = None) -> str:
    """Canonical target string: "3" for a cell, "3->5" for an ordered pair."""
    return str(cell) if neighbor is None else f"{cell}->{neighbor}"


def parse_target(target: str) -> Tuple[int, ...]:
    """Inverse of format_target; raises ValueError on malformed input."""
    return tuple(int(part) for part in str(target).split("->"))


def _read_only(array: np.ndarray) -> np.ndarray:
    copy = np.array(array, copy=True)
    copy.setflags(write=False)
    return copy


@dataclass(frozen=True)
class SimSnapshot:
    """Immutable copy of the simulator state at a tick boundary."""
    tick: int
    tick_ms: int
    cell_positions: np.ndarray
    tx_power: np.ndarray
    capacity: np.ndarray
    ue_positions: np.ndarray
    ue_velocities: np.ndarray
    serving: np.ndarray
    rsrp: np.ndarray
    hysteresis: np.ndarray
    ttt: np.ndarray
    cio: np.ndarray
    a3_timer: np.ndarray
    rlf_timer: np.ndarray
    last_cell: np.ndarray
    last_ho_tick: np.ndarray

    @property
    def loads(self) -> np.ndarray:
        connected = np.bincount(self.serving[self.serving >= 0], minlength=len(self.capacity))
        return connected / self.capacity

    @property
    def outage_count(self) -> int:
        return int((self.serving == NO_CELL).sum())

    def cell_states(self) -> List[CellState]:
        return [
            CellState(
                cell_id=cell,
                position=(float(self.cell_positions[cell, 0]), float(self.cell_positions[cell, 1])),
                tx_power=float(self.tx_power[cell]),
                capacity=int(self.capacity[cell]),
                connected_ues=frozenset(int(u) for u in np.nonzero(self.serving == cell)[0]),
            )
            for cell in range(len(self.capacity))
        ]

    def ue_states(self) -> List[UeState]:
        states = []
        for ue in range(len(self.serving)):
            serving = int(self.serving[ue])
            last = None
            if self.last_cell[ue] != NO_CELL:
                last = (int(self.last_cell[ue]), int(self.last_ho_tick[ue]))
            states.append(UeState(
                ue_id=ue,
                position=(float(self.ue_positions[ue, 0]), float(self.ue_positions[ue, 1])),
                velocity=(float(self.ue_velocities[ue, 0]), float(self.ue_velocities[ue, 1])),
                serving_cell=None if serving == NO_CELL else serving,
                rsrp_map={c: float(v) for c, v in enumerate(self.rsrp[ue])},
                a3_timer={c: int(v) for c, v in enumerate(self.a3_timer[ue]) if v},
                last_serving=last,
                rlf_timer=int(self.rlf_timer[ue]),
            ))
        return states

    def handover_params(self) -> HandoverParams:
        cells = range(len(self.capacity))
        return HandoverParams(
            hysteresis_h={c: float(self.hysteresis[c]) for c in cells},
            ttt={c: int(self.ttt[c]) for c in cells},
            cio={(s, n): float(self.cio[s, n]) for s in cells for n in cells if s != n},
        )


class Simulator:
    """Multi-cell handover simulator."""

    def __init__(self, scenario: ScenarioConfig, seed: Optional[int] = None):
        """Build the topology, place UEs and attach them to their strongest cell."""
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.radio = scenario.radio
        self.tick_ms = scenario.timing.tick_ms
        self.t_pp_ms = scenario.handover.t_pp_ms
        self.t_early_ms = scenario.handover.t_early_ms

        mobility_seq, shadowing_seq = np.random.SeedSequence(self.seed).spawn(2)

        topology = scenario.topology
        self.cell_positions = build_positions(topology)
        self.cell_count = len(self.cell_positions)
        self.neighbors: Dict[int, List[int]] = build_neighbors(
            self.cell_positions, topology.neighbor_distance_factor * topology.spacing_m
        )
        self.capacity = np.array(
            [topology.capacity_overrides.get(c, topology.capacity) for c in range(self.cell_count)],
            dtype=int,
        )
        self.tx_power = np.array(
            [topology.tx_power_overrides.get(c, topology.tx_power_dbm) for c in range(self.cell_count)],
            dtype=float,
        )

        handover = scenario.handover
        self.hysteresis = np.full(self.cell_count, handover.default_h_db, dtype=float)
        self.ttt = np.full(self.cell_count, handover.default_ttt_ms, dtype=int)
        self.cio = np.full((self.cell_count, self.cell_count), handover.default_cio_db, dtype=float)
        np.fill_diagonal(self.cio, 0.0)

        self.box = bounding_box(self.cell_positions, topology.spacing_m)
        self.mobility = self._build_mobility(np.random.default_rng(mobility_seq))
        self.ue_count = self.mobility.ue_count

        self.shadowing = ShadowingField(
            self.ue_count, self.cell_count, self.radio, np.random.default_rng(shadowing_seq)
        )

        self.serving = np.full(self.ue_count, NO_CELL, dtype=int)
        self.connected = np.zeros(self.cell_count, dtype=int)
        self.a3_timer = np.zeros((self.ue_count, self.cell_count), dtype=int)
        self.rlf_timer = np.zeros(self.ue_count, dtype=int)
        self.last_cell = np.full(self.ue_count, NO_CELL, dtype=int)
        self.last_ho_tick = np.full(self.ue_count, -1, dtype=int)
        self.last_ho_target = np.full(self.ue_count, NO_CELL, dtype=int)
        self.failed_cell = np.full(self.ue_count, NO_CELL, dtype=int)
        self.failed_too_early = np.zeros(self.ue_count, dtype=bool)

        self.tick = 0
        self._pending: Dict[Tuple[ParamId, Tuple[int, ...]], float] = {}

        self.rsrp = rsrp_matrix(
            self.mobility.positions, self.cell_positions, self.tx_power, self.radio, self.shadowing.values
        )
        self._initial_attach()
        logger.debug(
            f"Simulator ready: {self.cell_count} cells, {self.ue_count} UEs, seed {self.seed}"
        )

    def _build_mobility(self, rng: np.random.Generator) -> MobilityModel:
        mobility = self.scenario.mobility
        if mobility.mode == "scripted":
            return ScriptedMobility(mobility.scripted_paths, mobility.scripted_speed_mps)
        return RandomWaypointMobility(
            mobility.ue_count, self.box, (mobility.speed_min_mps, mobility.speed_max_mps), rng
        )

    def _initial_attach(self) -> None:
        cell_ids = np.arange(self.cell_count)
        for ue in range(self.ue_count):
            for cell in np.lexsort((cell_ids, -self.rsrp[ue])):
                if self.connected[cell] < self.capacity[cell]:
                    self._attach(ue, int(cell))
                    break

    def _attach(self, ue: int, cell: int) -> None:
        self.serving[ue] = cell
        self.connected[cell] += 1
        self.a3_timer[ue] = 0
        self.rlf_timer[ue] = 0

    def _detach(self, ue: int) -> None:
        self.connected[self.serving[ue]] -= 1
        self.serving[ue] = NO_CELL
        self.a3_timer[ue] = 0
        self.rlf_timer[ue] = 0

    # Tick processing

    def step(self) -> List[SimEvent]:
        """
        Advance one tick.

        Returns:
            Events of the tick: re-attach outcomes, RLFs, then handovers, each in UE order
        """
        now = self.tick + 1
        self._apply_pending()

        self.mobility.advance(self.tick_ms / 1000.0)
        shadowing = self.shadowing.advance()
        self.rsrp = rsrp_matrix(
            self.mobility.positions, self.cell_positions, self.tx_power, self.radio, shadowing
        )

        events: List[SimEvent] = []
        events.extend(self._reattach(now))
        events.extend(self._check_rlf(now))
        events.extend(self._evaluate_handovers(now))

        self.tick = now
        return events

    def _reattach(self, now: int) -> List[SimEvent]:
        events = []
        for ue in np.nonzero(self.serving == NO_CELL)[0]:
            ue = int(ue)
            cell = int(np.argmax(self.rsrp[ue]))
            if self.connected[cell] >= self.capacity[cell]:
                events.append(SimEvent(tick=now, kind=EventKind.CALL_BLOCK, ue_id=ue,
                                       from_cell=NO_CELL, to_cell=cell))
                continue
            self._attach(ue, cell)
            failed = int(self.failed_cell[ue])
            if failed != NO_CELL and not self.failed_too_early[ue] and cell != failed:
                events.append(SimEvent(tick=now, kind=EventKind.TOO_LATE_HO, ue_id=ue,
                                       from_cell=failed, to_cell=cell))
            self.failed_cell[ue] = NO_CELL
            self.failed_too_early[ue] = False
        return events

    def _check_rlf(self, now: int) -> List[SimEvent]:
        attached = np.nonzero(self.serving >= 0)[0]
        if attached.size == 0:
            return []
        serving_rsrp = self.rsrp[attached, self.serving[attached]]
        below = serving_rsrp < self.radio.rlf_floor_dbm
        self.rlf_timer[attached] = np.where(below, self.rlf_timer[attached] + self.tick_ms, 0)
        failing = attached[below & (self.rlf_timer[attached] >= self.radio.t_rlf_ms)]

        events = []
        for ue in failing:
            ue = int(ue)
            cell = int(self.serving[ue])
            events.append(SimEvent(tick=now, kind=EventKind.RLF, ue_id=ue,
                                   from_cell=cell, to_cell=NO_CELL))
            too_early = (
                self.last_ho_target[ue] == cell
                and (now - self.last_ho_tick[ue]) * self.tick_ms <= self.t_early_ms
            )
            if too_early:
                events.append(SimEvent(tick=now, kind=EventKind.TOO_EARLY_HO, ue_id=ue,
                                       from_cell=int(self.last_cell[ue]), to_cell=cell))
                self.last_ho_target[ue] = NO_CELL
            self._detach(ue)
            self.failed_cell[ue] = cell
            self.failed_too_early[ue] = too_early
        return events

    def _evaluate_handovers(self, now: int) -> List[SimEvent]:
        attached = np.nonzero(self.serving >= 0)[0]
        if attached.size == 0:
            return []
        rows = np.arange(attached.size)
        serving = self.serving[attached]
        rsrp = self.rsrp[attached]

        threshold = rsrp[rows, serving] + self.hysteresis[serving]
        entering = rsrp + self.cio[serving] > threshold[:, None]
        entering[rows, serving] = False

        ttt = self.ttt[serving][:, None]
        elapsed = self.a3_timer[attached] + self.tick_ms
        firing = entering & (elapsed >= ttt)
        self.a3_timer[attached] = np.where(entering, np.minimum(elapsed, ttt), 0)

        events = []
        for row in np.nonzero(firing.any(axis=1))[0]:
            ue = int(attached[row])
            source = int(serving[row])
            target = int(np.argmax(np.where(firing[row], rsrp[row], -np.inf)))

            if self.connected[target] >= self.capacity[target]:
                events.append(SimEvent(tick=now, kind=EventKind.CALL_BLOCK, ue_id=ue,
                                       from_cell=source, to_cell=target))
                self.a3_timer[ue, target] = 0
                continue

            last = None
            if self.last_cell[ue] != NO_CELL:
                last = (int(self.last_cell[ue]), int(self.last_ho_tick[ue]))
            pingpong = is_pingpong(last, target, now, self.t_pp_ms, self.tick_ms)
            kind = EventKind.PING_PONG_HANDOVER if pingpong else EventKind.HANDOVER
            events.append(SimEvent(tick=now, kind=kind, ue_id=ue, from_cell=source, to_cell=target))

            self._detach(ue)
            self._attach(ue, target)
            self.last_cell[ue] = source
            self.last_ho_tick[ue] = now
            self.last_ho_target[ue] = target
        return events

    # Parameter surface

    def _resolve_target(self, param_id: ParamId, target: str) -> Optional[Tuple[int, ...]]:
        try:
            key = parse_target(target)
        except ValueError:
            return None
        if any(not 0 <= cell < self.cell_count for cell in key):
            return None
        if param_id in CELL_PARAMS:
            return key if len(key) == 1 else None
        if len(key) == 2 and key[0] != key[1]:
            return key
        return None

    @staticmethod
    def _in_range(param_id: ParamId, value: float) -> bool:
        if param_id == ParamId.H:
            return H_RANGE_DB[0] <= value <= H_RANGE_DB[1]
        if param_id == ParamId.CIO:
            return CIO_RANGE_DB[0] <= value <= CIO_RANGE_DB[1]
        if param_id == ParamId.TTT:
            return value in TTT_VALUES_MS
        return TX_POWER_RANGE_DBM[0] <= value <= TX_POWER_RANGE_DBM[1]

    def _committed(self, param_id: ParamId, key: Tuple[int, ...]) -> float:
        if param_id == ParamId.H:
            return float(self.hysteresis[key[0]])
        if param_id == ParamId.TTT:
            return float(self.ttt[key[0]])
        if param_id == ParamId.TX_POWER:
            return float(self.tx_power[key[0]])
        return float(self.cio[key[0], key[1]])

    def apply_param_change(self, target: str, param_id, value: float) -> ChangeResult:
        """
        Queue a parameter write for the next tick boundary.

        Args:
            target: "c" for H/TTT/TX_POWER, "s->n" for CIO
            param_id: ParamId or its string value
            value: New value

        Returns:
            ChangeResult.APPLIED, OUT_OF_RANGE or UNKNOWN_TARGET

        Raises:
            UnknownParameterError: When param_id is not a known parameter.
        """
        try:
            param_id = ParamId(param_id)
        except ValueError:
            raise UnknownParameterError(f"Unknown parameter: {param_id}")

        key = self._resolve_target(param_id, target)
        if key is None:
            return ChangeResult.UNKNOWN_TARGET
        if not self._in_range(param_id, value):
            return ChangeResult.OUT_OF_RANGE
        self._pending[(param_id, key)] = float(value)
        return ChangeResult.APPLIED

    def param_value(self, target: str, param_id) -> Optional[float]:
        """Value a write would replace: the pending one if queued, else the committed one."""
        param_id = ParamId(param_id)
        key = self._resolve_target(param_id, target)
        if key is None:
            return None
        return self._pending.get((param_id, key), self._committed(param_id, key))

    def _apply_pending(self) -> None:
        for (param_id, key), value in self._pending.items():
            if param_id == ParamId.H:
                self.hysteresis[key[0]] = value
            elif param_id == ParamId.TTT:
                self.ttt[key[0]] = int(value)
            elif param_id == ParamId.TX_POWER:
                self.tx_power[key[0]] = value
            else:
                self.cio[key[0], key[1]] = value
        self._pending.clear()

    # Views

    def loads(self) -> np.ndarray:
        return self.connected / self.capacity

    def parameter_snapshot(self) -> ParameterSnapshot:
        """Current parameters with queued writes overlaid."""
        hysteresis = self.hysteresis.copy()
        ttt = self.ttt.copy()
        cio = self.cio.copy()
        tx_power = self.tx_power.copy()
        for (param_id, key), value in self._pending.items():
            if param_id == ParamId.H:
                hysteresis[key[0]] = value
            elif param_id == ParamId.TTT:
                ttt[key[0]] = int(value)
            elif param_id == ParamId.TX_POWER:
                tx_power[key[0]] = value
            else:
                cio[key[0], key[1]] = value
        cells = range(self.cell_count)
        return ParameterSnapshot(
            handover=HandoverParams(
                hysteresis_h={c: float(hysteresis[c]) for c in cells},
                ttt={c: int(ttt[c]) for c in cells},
                cio={(s, n): float(cio[s, n]) for s in cells for n in cells if s != n},
            ),
            tx_power={c: float(tx_power[c]) for c in cells},
        )

    def snapshot(self) -> SimSnapshot:
        return SimSnapshot(
            tick=self.tick,
            tick_ms=self.tick_ms,
            cell_positions=_read_only(self.cell_positions),
            tx_power=_read_only(self.tx_power),
            capacity=_read_only(self.capacity),
            ue_positions=_read_only(self.mobility.positions),
            ue_velocities=_read_only(self.mobility.velocities),
            serving=_read_only(self.serving),
            rsrp=_read_only(self.rsrp),
            hysteresis=_read_only(self.hysteresis),
            ttt=_read_only(self.ttt),
            cio=_read_only(self.cio),
            a3_timer=_read_only(self.a3_timer),
            rlf_timer=_read_only(self.rlf_timer),
            last_cell=_read_only(self.last_cell),
            last_ho_tick=_read_only(self.last_ho_tick),
        )
