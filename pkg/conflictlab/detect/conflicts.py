"""
Conflict detection (the CD role).

Direct conflicts come from the ledger alone; indirect and implicit conflicts
are triggered by degradation anomalies. The three classes partition:

* Direct: some pair of implicated xApps shares a (target, param) entry.
* Indirect: parameter sets pairwise disjoint, every xApp declares every impacted KPI.
* Implicit: parameter sets pairwise disjoint, some xApp does not declare some impacted KPI.
"""

import logging
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from ..exceptions import InsufficientHistoryError
from ..models import (
    ActionOutcome, ActionRecord, AnomalyFlag, ConflictReport, ConflictType,
    Direction, KpiId, ParameterRef, XAppDescriptor,
)
from ..ric.registry import XAppRegistry
from ..ric.xnib import XNIB
from ..scenario import DetectionConfig
from .anomaly import AnomalyDetector
from .scoring import EvidenceScorer, LaggedCorrelationScorer

logger = logging.getLogger(__name__)

_CONTENDED = (ActionOutcome.APPLIED, ActionOutcome.BLOCKED_BY_PRIORITY)


def action_window(tick: int, window_ticks: int) -> int:
    """Index of the KPI window an action submitted at ``tick`` reacted to."""
    return tick // window_ticks - 1


def parameter_sets(records: Iterable[ActionRecord]) -> Dict[str, Set[ParameterRef]]:
    """(target, param) entries written per xApp."""
    sets: Dict[str, Set[ParameterRef]] = {}
    for record in records:
        sets.setdefault(record.xapp_id, set()).add((record.target, record.param_id))
    return sets


def _pairwise_disjoint(parameters: Mapping[str, Iterable[ParameterRef]], xapps: Sequence[str]) -> bool:
    sets = [set(parameters.get(x, ())) for x in xapps]
    return all(not (a & b) for a, b in combinations(sets, 2))


def is_direct(report: ConflictReport) -> bool:
    return len(report.xapps) >= 2 and not _pairwise_disjoint(report.parameters, report.xapps)


def is_indirect(report: ConflictReport, descriptors: Mapping[str, XAppDescriptor]) -> bool:
    if len(report.xapps) < 2 or not report.impacted_kpis:
        return False
    if not _pairwise_disjoint(report.parameters, report.xapps):
        return False
    return all(
        set(report.impacted_kpis) <= descriptors[x].declared_impacts for x in report.xapps
    )


def is_implicit(report: ConflictReport, descriptors: Mapping[str, XAppDescriptor]) -> bool:
    if not report.xapps or not report.impacted_kpis:
        return False
    if not _pairwise_disjoint(report.parameters, report.xapps):
        return False
    return any(
        not set(report.impacted_kpis) <= descriptors[x].declared_impacts for x in report.xapps
    )


def classify(report: ConflictReport, descriptors: Mapping[str, XAppDescriptor]) -> Optional[ConflictType]:
    """Type whose predicate the report satisfies, None if it satisfies none."""
    if is_direct(report):
        return ConflictType.DIRECT
    if is_indirect(report, descriptors):
        return ConflictType.INDIRECT
    if is_implicit(report, descriptors):
        return ConflictType.IMPLICIT
    return None


def _frozen_parameters(sets: Mapping[str, Set[ParameterRef]], xapps: Sequence[str]) -> Dict[str, Tuple[ParameterRef, ...]]:
    return {
        x: tuple(sorted(sets.get(x, ()), key=lambda ref: (ref[0], ref[1].value)))
        for x in xapps
    }


def detect_direct(records: Sequence[ActionRecord], detected_at_tick: int) -> List[ConflictReport]:
    """
    One Direct report per (target, param) written by two or more xApps.

    Applied and BlockedByPriority records count as contention; Rejected ones do not.
    """
    writers: Dict[ParameterRef, Set[str]] = {}
    for record in records:
        if record.outcome in _CONTENDED:
            writers.setdefault((record.target, record.param_id), set()).add(record.xapp_id)

    reports = []
    for ref in sorted(writers, key=lambda r: (r[0], r[1].value)):
        xapps = tuple(sorted(writers[ref]))
        if len(xapps) < 2:
            continue
        reports.append(ConflictReport(
            detected_at_tick=detected_at_tick,
            conflict_type=ConflictType.DIRECT,
            xapps=xapps,
            parameters={x: (ref,) for x in xapps},
        ))
    return reports


def _degradations(flags: Iterable[AnomalyFlag]) -> List[AnomalyFlag]:
    return [f for f in flags if f.direction == Direction.DEGRADATION]


def _kpi_order(kpis: Iterable[KpiId]) -> Tuple[KpiId, ...]:
    order = list(KpiId)
    return tuple(sorted(set(kpis), key=order.index))


def detect_indirect(
    flags: Sequence[AnomalyFlag],
    records: Sequence[ActionRecord],
    descriptors: Mapping[str, XAppDescriptor],
    detected_at_tick: int,
) -> List[ConflictReport]:
    """
    Indirect reports for degraded KPIs declared by two or more acting xApps.

    For each degraded KPI, the xApps with Applied records that declare it form
    a group; a group of at least two with pairwise-disjoint parameter sets is
    reported. KPIs sharing the same group end up in one report.

    Args:
        flags: Anomaly flags of the window
        records: Ledger records of the lookback window
        descriptors: Registered xApps by id
        detected_at_tick: Tick stamped on the reports

    Returns:
        Indirect reports ordered by xApp set
    """
    degraded = _degradations(flags)
    if not degraded:
        return []

    applied = [r for r in records if r.outcome == ActionOutcome.APPLIED]
    sets = parameter_sets(applied)
    actors = sorted(sets)

    groups: Dict[Tuple[str, ...], Set[KpiId]] = {}
    for kpi in _kpi_order(f.kpi_id for f in degraded):
        declaring = tuple(x for x in actors if x in descriptors and kpi in descriptors[x].declared_impacts)
        if len(declaring) >= 2 and _pairwise_disjoint(sets, declaring):
            groups.setdefault(declaring, set()).add(kpi)

    reports = []
    for xapps in sorted(groups):
        kpis = _kpi_order(groups[xapps])
        refs = tuple(sorted({(f.cell_id, f.kpi_id) for f in degraded if f.kpi_id in kpis},
                            key=lambda ref: (ref[0], ref[1].value)))
        reports.append(ConflictReport(
            detected_at_tick=detected_at_tick,
            conflict_type=ConflictType.INDIRECT,
            xapps=xapps,
            parameters=_frozen_parameters(sets, xapps),
            impacted_kpis=kpis,
            anomaly_refs=refs,
        ))
    return reports


def action_series(records: Iterable[ActionRecord], xapp_id: str, first_window: int,
                  last_window: int, window_ticks: int) -> np.ndarray:
    """Binary series: 1 for windows in which ``xapp_id`` had an Applied action."""
    acted = {
        action_window(r.tick, window_ticks)
        for r in records
        if r.xapp_id == xapp_id and r.outcome == ActionOutcome.APPLIED
    }
    return np.array([1.0 if w in acted else 0.0 for w in range(first_window, last_window + 1)])


def detect_implicit(
    flags: Sequence[AnomalyFlag],
    records: Sequence[ActionRecord],
    descriptors: Mapping[str, XAppDescriptor],
    anomaly_detector: AnomalyDetector,
    window_index: int,
    window_ticks: int,
    config: DetectionConfig,
    covered: FrozenSet[KpiId] = frozenset(),
    scorer: Optional[EvidenceScorer] = None,
) -> List[ConflictReport]:
    """
    Implicit reports for degradation onsets not explained by declared impacts.

    Candidates are xApps with Applied actions in the lag_max windows before the
    anomaly. Each is scored by the lagged correlation of its action series with
    the onset series of the anomalous (cell, KPI); xApps scoring above tau are
    implicated. A report is emitted only when it meets the implicit predicate.

    Args:
        flags: Anomaly flags of the window
        records: Ledger records covering at least the correlation span
        descriptors: Registered xApps by id
        anomaly_detector: Source of the onset history
        window_index: Index of the analysed window
        window_ticks: Ticks per KPI window
        config: Detection constants
        covered: KPIs already explained by an indirect report
        scorer: Evidence scorer, lagged correlation by default

    Returns:
        Implicit reports, at most one per (xApp set, KPI)
    """
    scorer = scorer or LaggedCorrelationScorer()
    onsets = [f for f in _degradations(flags) if f.onset and f.kpi_id not in covered]
    if not onsets:
        return []

    span = min(config.correlation_span, window_index + 1)
    first_window = window_index - span + 1
    applied = [
        r for r in records
        if r.outcome == ActionOutcome.APPLIED and first_window <= action_window(r.tick, window_ticks) <= window_index
    ]
    recent = [
        r for r in applied
        if window_index - config.lag_max <= action_window(r.tick, window_ticks) <= window_index - 1
    ]
    candidates = sorted({r.xapp_id for r in recent if r.xapp_id in descriptors})
    if not candidates:
        return []

    series = {x: action_series(applied, x, first_window, window_index, window_ticks) for x in candidates}
    sets = parameter_sets(recent)

    merged: Dict[Tuple[Tuple[str, ...], KpiId], Dict] = {}
    for flag in onsets:
        degradations = anomaly_detector.onset_series(flag.cell_id, flag.kpi_id, window_index, span)
        try:
            scores = {x: scorer.score(series[x], degradations, config.lag_max) for x in candidates}
        except InsufficientHistoryError as e:
            logger.warning(f"Implicit check skipped for cell {flag.cell_id} {flag.kpi_id.value}: {e}")
            continue

        implicated = tuple(x for x in candidates if scores[x] > config.tau)
        if not implicated:
            continue
        entry = merged.setdefault((implicated, flag.kpi_id), {"evidence": {}, "refs": set()})
        for x in implicated:
            entry["evidence"][x] = max(entry["evidence"].get(x, -1.0), scores[x])
        entry["refs"].add((flag.cell_id, flag.kpi_id))

    reports = []
    for (xapps, kpi), entry in sorted(merged.items(), key=lambda item: (item[0][0], item[0][1].value)):
        report = ConflictReport(
            detected_at_tick=onsets[0].window_end_tick,
            conflict_type=ConflictType.IMPLICIT,
            xapps=xapps,
            parameters=_frozen_parameters(sets, xapps),
            impacted_kpis=(kpi,),
            evidence=entry["evidence"],
            anomaly_refs=tuple(sorted(entry["refs"], key=lambda ref: ref[0])),
        )
        if is_implicit(report, descriptors):
            reports.append(report)
        else:
            logger.debug(f"Correlated xApps {xapps} on {kpi.value} declare the impact; no implicit report")
    return reports


class ConflictDetector:
    """Runs direct, indirect and implicit detection on each completed KPI window."""

    def __init__(
        self,
        config: DetectionConfig,
        window_ticks: int,
        registry: XAppRegistry,
        xnib: XNIB,
        anomaly_detector: AnomalyDetector,
        scorer: Optional[EvidenceScorer] = None,
    ):
        self.config = config
        self.window_ticks = window_ticks
        self.registry = registry
        self.xnib = xnib
        self.anomaly_detector = anomaly_detector
        self.scorer = scorer or LaggedCorrelationScorer()

    def analyze_window(self, window_index: int, flags: Sequence[AnomalyFlag]) -> List[ConflictReport]:
        """
        Classify the conflicts visible at the end of ``window_index``.

        Returns:
            Reports ordered by type, then xApp set
        """
        w = self.window_ticks
        end_tick = (window_index + 1) * w
        descriptors = {d.xapp_id: d for d in self.registry.descriptors()}

        reports = detect_direct(self.xnib.query(window_index * w, end_tick - 1), end_tick)

        if any(f.direction == Direction.DEGRADATION for f in flags):
            lookback_start = max(0, (window_index - self.config.action_lookback_windows + 1) * w)
            indirect = detect_indirect(flags, self.xnib.query(lookback_start, end_tick - 1), descriptors, end_tick)
            reports.extend(indirect)

            covered = frozenset(k for r in indirect for k in r.impacted_kpis)
            history_start = max(0, (window_index - self.config.correlation_span + 2) * w)
            reports.extend(detect_implicit(
                flags,
                self.xnib.query(history_start, end_tick - 1),
                descriptors,
                self.anomaly_detector,
                window_index,
                w,
                self.config,
                covered=covered,
                scorer=self.scorer,
            ))

        for report in reports:
            logger.info(
                f"{report.conflict_type.value} conflict at tick {report.detected_at_tick}: "
                f"{', '.join(report.xapps)}"
                + (f" on {', '.join(k.value for k in report.impacted_kpis)}" if report.impacted_kpis else "")
            )
        return sorted(reports, key=lambda r: r.sort_key())
