"""
Experiment engine: wires the simulator, the RIC, the xApps and the
detection/mitigation pipeline into one seeded run.

Per KPI window: the simulator advances ``kpi_window_ticks`` ticks, KPIMON
aggregates the window and publishes it on the KPI bus, AD and CD analyse it,
CM updates its blocks, then every xApp decides and submits at the window's
closing tick. Submitted writes take effect from the next tick.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .detect.anomaly import AnomalyDetector
from .detect.conflicts import ConflictDetector
from .mitigate.learner import EpisodeEvaluator, learn_priorities
from .mitigate.priority import Mitigator
from .mitigate.reward import aggregate_episode, compute_reward
from .models import (
    AnomalyFlag, ConflictReport, ConflictType, EpisodeAggregate, EventKind, KpiId,
    KpiWindow, LearnedPolicy, PriorityPolicy, RewardTraceRow, SimEvent,
)
from .ric.platform import RicPlatform
from .ric.xnib import XNIB
from .scenario import ScenarioConfig
from .sim.kpi import collect_kpis
from .sim.simulator import Simulator
from .xapps import build_xapps

logger = logging.getLogger(__name__)

COUNT_KPIS = (
    KpiId.CALL_BLOCKS, KpiId.RLF_COUNT, KpiId.HO_COUNT, KpiId.PINGPONG_COUNT,
    KpiId.TOO_EARLY_COUNT, KpiId.TOO_LATE_COUNT,
)


def _open_ledger(xnib_path: str) -> XNIB:
    """Open an empty ledger; a file that already holds records is refused."""
    if xnib_path != ":memory:":
        Path(xnib_path).parent.mkdir(parents=True, exist_ok=True)
    xnib = XNIB(xnib_path).initialize()
    if len(xnib):
        count = len(xnib)
        xnib.close()
        raise FileExistsError(f"xNIB file {xnib_path} already holds {count} records")
    return xnib


def late_load_stddev(windows: Sequence[KpiWindow], fraction: float = 0.25) -> float:
    """Mean cross-cell load standard deviation over the last ``fraction`` of the windows."""
    if not windows:
        return 0.0
    tail = windows[-max(1, int(round(len(windows) * fraction))):]
    return float(np.mean([np.std([s.mean_load for s in w.samples]) for w in tail]))


@dataclass
class RunResult:
    """Everything a run produced."""
    scenario: ScenarioConfig
    seed: int
    events: List[SimEvent]
    windows: List[KpiWindow]
    flags: List[AnomalyFlag]
    conflicts: List[ConflictReport]
    xnib: XNIB
    ordering: Tuple[str, ...] = ()
    final_policy: Optional[PriorityPolicy] = None
    baseline: Optional[EpisodeAggregate] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def aggregate(self) -> EpisodeAggregate:
        return aggregate_episode(self.windows)

    @property
    def reward(self) -> Optional[float]:
        if self.baseline is None:
            return None
        return compute_reward(self.aggregate, self.baseline, self.scenario.reward)

    def kpi_totals(self) -> Dict[str, float]:
        samples = [s for w in self.windows for s in w.samples]
        totals: Dict[str, float] = {k.value: int(sum(s.value(k) for s in samples)) for k in COUNT_KPIS}
        totals[KpiId.MEAN_LOAD.value] = float(np.mean([s.mean_load for s in samples])) if samples else 0.0
        return totals

    def event_counts(self) -> Dict[str, int]:
        counts = Counter(e.kind.value for e in self.events)
        return {kind.value: counts.get(kind.value, 0) for kind in EventKind}

    def conflict_counts(self) -> Dict[str, int]:
        counts = Counter(r.conflict_type.value for r in self.conflicts)
        return {t.value: counts.get(t.value, 0) for t in ConflictType}

    def summary(self) -> Dict[str, Any]:
        """Content of summary.json."""
        aggregate = self.aggregate
        return {
            "scenario": self.scenario.name,
            "seed": self.seed,
            "ticks": self.windows[-1].window_end_tick if self.windows else 0,
            "windows": len(self.windows),
            "totals": self.kpi_totals(),
            "event_counts": self.event_counts(),
            "conflict_counts": self.conflict_counts(),
            "anomaly_count": len(self.flags),
            "ledger": self.xnib.get_stats(),
            "priority_ordering": list(self.ordering),
            "aggregate": aggregate.model_dump(),
            "late_load_stddev": late_load_stddev(self.windows),
            "baseline": self.baseline.model_dump() if self.baseline else None,
            "reward": self.reward,
            "config": self.scenario.model_dump(mode="json", by_alias=True),
            **self.extra,
        }


class ExperimentEngine:
    """One seeded run of a scenario."""

    def __init__(
        self,
        scenario: ScenarioConfig,
        seed: Optional[int] = None,
        ordering: Optional[Sequence[str]] = None,
        xapps_enabled: bool = True,
        detection_enabled: Optional[bool] = None,
        cm_enabled: Optional[bool] = None,
        horizon_ticks: Optional[int] = None,
        xnib_path: str = ":memory:",
    ):
        self.scenario = scenario
        self.seed = scenario.seed if seed is None else seed
        self.window_ticks = scenario.timing.kpi_window_ticks
        self.horizon_ticks = scenario.timing.horizon_ticks if horizon_ticks is None else horizon_ticks
        if self.horizon_ticks <= 0 or self.horizon_ticks % self.window_ticks:
            raise ValueError(f"horizon {self.horizon_ticks} is not a positive multiple of {self.window_ticks}")
        self.detection_enabled = scenario.detection.enabled if detection_enabled is None else detection_enabled
        self.cm_enabled = scenario.mitigation.cm_enabled if cm_enabled is None else cm_enabled

        self.simulator = Simulator(scenario, self.seed)
        self.xnib = _open_ledger(xnib_path)
        self.platform = RicPlatform(self.simulator, self.xnib)

        self.xapps = build_xapps(scenario, self.simulator.neighbors) if xapps_enabled else []
        self.handles = {x.xapp_id: self.platform.register_xapp(x.descriptor) for x in self.xapps}
        self.ordering = self._resolve_ordering(ordering)

        self.anomaly_detector = AnomalyDetector(scenario.detection)
        self.conflict_detector = ConflictDetector(
            scenario.detection, self.window_ticks, self.platform.registry, self.xnib, self.anomaly_detector,
        )
        self.mitigator: Optional[Mitigator] = None
        if self.cm_enabled:
            self.mitigator = Mitigator(
                self.ordering,
                scenario.mitigation.cooldown_windows * self.window_ticks,
                scenario.mitigation.tau_hard,
            )
            self.platform.set_gate(self.mitigator)

        self.events: List[SimEvent] = []
        self.windows: List[KpiWindow] = []
        self.flags: List[AnomalyFlag] = []
        self.conflicts: List[ConflictReport] = []
        if self.detection_enabled:
            self.platform.bus.subscribe(self._on_window)

    def _resolve_ordering(self, ordering: Optional[Sequence[str]]) -> Tuple[str, ...]:
        registered = self.platform.registry.ids()
        if ordering is None:
            priorities = self.scenario.mitigation.priorities
            if isinstance(priorities, list):
                ordering = priorities
            else:
                return self.platform.registry.default_ordering()
        chosen = [x for x in ordering if x in registered]
        skipped = [x for x in ordering if x not in registered]
        if skipped:
            logger.warning(f"Priorities name xApps that are not enabled: {skipped}")
        return tuple(chosen + [x for x in self.platform.registry.default_ordering() if x not in chosen])

    def _on_window(self, sequence: int, window: KpiWindow) -> None:
        flags = self.anomaly_detector.observe_window(window)
        self.flags.extend(flags)
        reports = self.conflict_detector.analyze_window(window.window_index, flags)
        self.conflicts.extend(reports)
        if self.mitigator is not None and reports:
            self.mitigator.handle(reports, window.window_end_tick)

    def _run_window(self, index: int, loads: np.ndarray) -> KpiWindow:
        window_events: List[SimEvent] = []
        for i in range(self.window_ticks):
            window_events.extend(self.simulator.step())
            loads[i] = self.simulator.loads()
        samples = collect_kpis(window_events, loads, self.simulator.tick, self.simulator.loads())
        self.events.extend(window_events)
        return KpiWindow(window_index=index, window_end_tick=self.simulator.tick, samples=tuple(samples))

    def _run_xapps(self, window: KpiWindow) -> None:
        for xapp in self.xapps:
            for action in xapp.decide(window, self.platform.parameter_snapshot()):
                self.platform.submit_action(self.handles[xapp.xapp_id], action.target, action.param_id, action.value)

    def run(self) -> RunResult:
        """Run to the horizon."""
        window_count = self.horizon_ticks // self.window_ticks
        logger.debug(
            f"Running '{self.scenario.name}' seed {self.seed}: {window_count} windows, "
            f"xApps={[x.xapp_id for x in self.xapps]}, detection={self.detection_enabled}, cm={self.cm_enabled}"
        )
        loads = np.zeros((self.window_ticks, self.simulator.cell_count))
        for index in range(window_count):
            window = self._run_window(index, loads)
            self.windows.append(window)
            self.platform.bus.publish(window)
            self._run_xapps(window)

        return RunResult(
            scenario=self.scenario,
            seed=self.seed,
            events=self.events,
            windows=self.windows,
            flags=self.flags,
            conflicts=sorted(self.conflicts, key=lambda r: r.sort_key()),
            xnib=self.xnib,
            ordering=self.ordering,
            final_policy=self.mitigator.policy if self.mitigator else None,
        )


def run_baseline(scenario: ScenarioConfig, seed: Optional[int] = None,
                 horizon_ticks: Optional[int] = None) -> EpisodeAggregate:
    """Aggregate of the seed-matched run without xApps."""
    engine = ExperimentEngine(
        scenario, seed, xapps_enabled=False, detection_enabled=False, cm_enabled=False, horizon_ticks=horizon_ticks,
    )
    result = engine.run()
    engine.xnib.close()
    return result.aggregate


def run_experiment(scenario: ScenarioConfig, seed: Optional[int] = None,
                   with_baseline: bool = True, xnib_path: str = ":memory:") -> RunResult:
    """
    Run a scenario and, optionally, its seed-matched no-xApp baseline.

    Args:
        scenario: Validated scenario
        seed: Seed override
        with_baseline: Also run the baseline so the reward can be computed
        xnib_path: SQLite file for the run's ledger; the baseline always stays in memory

    Returns:
        RunResult with the baseline aggregate attached
    """
    engine = ExperimentEngine(scenario, seed, xnib_path=xnib_path)
    logger.info(f"Run start: '{scenario.name}' seed {engine.seed}, xApps {list(engine.handles)}")
    result = engine.run()
    if with_baseline:
        result.baseline = run_baseline(scenario, engine.seed)
    logger.info(
        f"Run end: {len(result.events)} events, {len(result.xnib)} ledger records, "
        f"{len(result.conflicts)} conflicts"
    )
    return result


class EpisodeEvaluatorFactory:
    """Builds the learning evaluator; baselines are cached per episode seed."""

    def __init__(self, scenario: ScenarioConfig):
        self.scenario = scenario
        self.horizon_ticks = scenario.learning.episode_horizon_ticks
        self._baselines: Dict[int, EpisodeAggregate] = {}

    def baseline(self, seed: int) -> EpisodeAggregate:
        if seed not in self._baselines:
            self._baselines[seed] = run_baseline(self.scenario, seed, self.horizon_ticks)
        return self._baselines[seed]

    def __call__(self, ordering: Tuple[str, ...], seed: int) -> float:
        engine = ExperimentEngine(
            self.scenario, seed, ordering=ordering, cm_enabled=True, horizon_ticks=self.horizon_ticks,
        )
        result = engine.run()
        engine.xnib.close()
        return compute_reward(result.aggregate, self.baseline(seed), self.scenario.reward)


def run_learning(
    scenario: ScenarioConfig,
    evaluator: Optional[EpisodeEvaluator] = None,
    progress: bool = False,
) -> Tuple[PriorityPolicy, LearnedPolicy, List[RewardTraceRow]]:
    """
    Learn a priority ordering over the scenario's enabled xApps.

    Raises:
        TooManyXAppsError: With more than five enabled xApps.
    """
    xapp_ids = scenario.xapps.enabled_names()
    learning = scenario.learning
    seeds = learning.seeds(scenario.seed)
    logger.info(f"Learning priorities for {xapp_ids} over {len(seeds)} episodes (epsilon {learning.epsilon})")
    return learn_priorities(
        xapp_ids,
        evaluator or EpisodeEvaluatorFactory(scenario),
        seeds,
        epsilon=learning.epsilon,
        learner_seed=learning.learner_seed,
        progress=progress,
    )
