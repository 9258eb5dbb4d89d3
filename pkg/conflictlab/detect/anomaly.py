"""
Anomaly detection (the AD role): rolling mean/std baselines per (cell, KPI).

A sample is flagged when |value - mean| / std exceeds k over a baseline of
the last ``baseline_window`` unflagged samples. Flagged samples stay out of the
baseline unless ``rebaseline_after`` consecutive flags show a level shift, in
which case the flagged run becomes the new baseline.
"""

import logging
import math
from collections import deque
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from ..models import AnomalyFlag, Direction, KpiId, KpiSample, KpiWindow
from ..scenario import DetectionConfig

logger = logging.getLogger(__name__)

# +1: higher is worse. mean_load is judged on its cross-cell imbalance, so the
# transformed value is also "higher is worse".
KPI_POLARITY: Dict[KpiId, int] = {
    KpiId.MEAN_LOAD: 1,
    KpiId.CALL_BLOCKS: 1,
    KpiId.RLF_COUNT: 1,
    KpiId.HO_COUNT: 1,
    KpiId.PINGPONG_COUNT: 1,
    KpiId.TOO_EARLY_COUNT: 1,
    KpiId.TOO_LATE_COUNT: 1,
}


def z_score(value: float, mean: float, std: float) -> float:
    """|value - mean| / std, 0 when value equals mean, +inf for a zero std otherwise."""
    if std > 0:
        return abs(value - mean) / std
    return 0.0 if value == mean else math.inf


class RollingBaseline:
    """Baseline of one (cell, KPI) series."""

    def __init__(self, window: int, rebaseline_after: int):
        self.window = window
        self.rebaseline_after = rebaseline_after
        self.samples: deque = deque(maxlen=window)
        self.flagged_run: List[float] = []
        self.warmed_up = False

    @property
    def ready(self) -> bool:
        return self.warmed_up

    def stats(self) -> Tuple[float, float]:
        values = np.fromiter(self.samples, dtype=float)
        return float(values.mean()), float(values.std(ddof=1))

    def accept(self, value: float) -> None:
        self.samples.append(value)
        self.flagged_run.clear()
        if len(self.samples) >= self.window:
            self.warmed_up = True

    def reject(self, value: float) -> bool:
        """Keep a flagged sample out of the baseline; True when the baseline was replaced."""
        self.flagged_run.append(value)
        if len(self.flagged_run) < self.rebaseline_after:
            return False
        self.samples.clear()
        self.samples.extend(self.flagged_run)
        self.flagged_run.clear()
        return True


def flag_series(
    values: Iterable[float],
    baseline_window: int = 20,
    k: float = 3.0,
    rebaseline_after: int = 5,
) -> List[Optional[float]]:
    """
    Run the rolling detector over a plain series.

    Returns:
        For every value, its z-score if flagged, else None
    """
    baseline = RollingBaseline(baseline_window, max(rebaseline_after, 2))
    results: List[Optional[float]] = []
    for value in values:
        if not baseline.ready:
            baseline.accept(value)
            results.append(None)
            continue
        mean, std = baseline.stats()
        z = z_score(value, mean, std)
        if z > k:
            baseline.reject(value)
            results.append(z)
        else:
            baseline.accept(value)
            results.append(None)
    return results


class AnomalyDetector:
    """
    Per-(cell, KPI) detector fed one KPI window at a time.

    Also keeps the degradation-onset history used by implicit conflict
    detection: an onset is a degradation flag whose previous window was not one.
    """

    def __init__(self, config: DetectionConfig):
        self.config = config
        self.kpis: Tuple[KpiId, ...] = tuple(config.monitored_kpis)
        self._baselines: Dict[Tuple[int, KpiId], RollingBaseline] = {}
        self._degraded: Dict[Tuple[int, KpiId], bool] = {}
        self._onsets: Dict[Tuple[int, KpiId], Set[int]] = {}
        self.windows_seen = 0
        self.flag_count = 0

    def _baseline(self, key: Tuple[int, KpiId]) -> RollingBaseline:
        if key not in self._baselines:
            # ddof=1 needs two samples in a replaced baseline
            self._baselines[key] = RollingBaseline(
                self.config.baseline_window, max(self.config.rebaseline_after, 2)
            )
        return self._baselines[key]

    @staticmethod
    def monitored_values(window: KpiWindow, kpi: KpiId) -> Dict[int, float]:
        """Per-cell values the detector scores for ``kpi``."""
        values = {s.cell_id: s.value(kpi) for s in window.samples}
        if kpi == KpiId.MEAN_LOAD and values:
            mean = sum(values.values()) / len(values)
            values = {cell: abs(load - mean) for cell, load in values.items()}
        return values

    def observe_window(self, window: KpiWindow) -> List[AnomalyFlag]:
        """Score every monitored (cell, KPI) of the window and update the baselines."""
        flags = []
        for kpi in self.kpis:
            for cell, value in sorted(self.monitored_values(window, kpi).items()):
                flag = self._observe(window, cell, kpi, value)
                if flag is not None:
                    flags.append(flag)
        self.windows_seen += 1
        self.flag_count += len(flags)
        if flags:
            logger.debug(
                f"Window {window.window_index}: {len(flags)} anomaly flags "
                f"({sum(f.onset for f in flags)} onsets)"
            )
        return flags

    def _observe(self, window: KpiWindow, cell: int, kpi: KpiId, value: float) -> Optional[AnomalyFlag]:
        key = (cell, kpi)
        baseline = self._baseline(key)
        if not baseline.ready:
            baseline.accept(value)
            return None

        mean, std = baseline.stats()
        z = z_score(value, mean, std)
        if z <= self.config.k:
            baseline.accept(value)
            self._degraded[key] = False
            return None

        worse = (value - mean) * KPI_POLARITY[kpi] > 0
        direction = Direction.DEGRADATION if worse else Direction.IMPROVEMENT
        onset = worse and not self._degraded.get(key, False)
        self._degraded[key] = worse
        if onset:
            self._onsets.setdefault(key, set()).add(window.window_index)
        if baseline.reject(value):
            logger.debug(f"Level shift adopted for cell {cell} {kpi.value} at window {window.window_index}")

        return AnomalyFlag(
            window_end_tick=window.window_end_tick,
            cell_id=cell,
            kpi_id=kpi,
            value=value,
            baseline_mean=mean,
            baseline_std=std,
            z_score=z,
            direction=direction,
            onset=onset,
        )

    def onset_series(self, cell: int, kpi: KpiId, last_window: int, span: int) -> np.ndarray:
        """Binary degradation-onset series for windows last_window-span+1 .. last_window."""
        onsets = self._onsets.get((cell, kpi), set())
        first = last_window - span + 1
        return np.array([1.0 if w in onsets else 0.0 for w in range(first, last_window + 1)])


def detect_anomaly(
    samples: Sequence[KpiSample],
    baseline_window: int = 20,
    k: float = 3.0,
    rebaseline_after: int = 5,
    kpis: Optional[Sequence[KpiId]] = None,
) -> List[AnomalyFlag]:
    """
    Run anomaly detection over a stream of samples.

    Samples are grouped into windows by window_end_tick, in ascending order.

    Args:
        samples: KPI samples of any number of cells and windows
        baseline_window: Unflagged samples required before flagging starts
        k: Threshold on the z-score
        rebaseline_after: Consecutive flags that trigger a level-shift adoption
        kpis: KPIs to monitor; defaults to the detection defaults

    Returns:
        Flags in window order
    """
    overrides = {"baseline_window": baseline_window, "k": k, "rebaseline_after": rebaseline_after}
    if kpis is not None:
        overrides["monitored_kpis"] = list(kpis)
    detector = AnomalyDetector(DetectionConfig(**overrides))

    by_tick: Dict[int, List[KpiSample]] = {}
    for sample in samples:
        by_tick.setdefault(sample.window_end_tick, []).append(sample)

    flags: List[AnomalyFlag] = []
    for index, tick in enumerate(sorted(by_tick)):
        window = KpiWindow(
            window_index=index,
            window_end_tick=tick,
            samples=tuple(sorted(by_tick[tick], key=lambda s: s.cell_id)),
        )
        flags.extend(detector.observe_window(window))
    return flags
