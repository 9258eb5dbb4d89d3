"""
Tests for direct, indirect and implicit conflict classification.
"""

import random
from collections import Counter

import numpy as np
import pytest

from conflictlab.detect import (
    AnomalyDetector, ConflictDetector, action_window, classify, detect_direct,
    detect_implicit, detect_indirect, is_direct, is_implicit, is_indirect,
)
from conflictlab.models import (
    ActionOutcome, ActionRecord, AnomalyFlag, ConflictReport, ConflictType,
    Direction, KpiId, ParamId, XAppDescriptor,
)
from conflictlab.ric import XAppRegistry
from conflictlab.ric.xnib import XNIB
from conflictlab.scenario import DetectionConfig

MLB = XAppDescriptor(
    xapp_id="mlb",
    declared_params=frozenset({ParamId.CIO}),
    declared_impacts=frozenset({KpiId.MEAN_LOAD, KpiId.HO_COUNT, KpiId.PINGPONG_COUNT}),
)
MRO = XAppDescriptor(
    xapp_id="mro",
    declared_params=frozenset({ParamId.H, ParamId.TTT}),
    declared_impacts=frozenset({KpiId.RLF_COUNT, KpiId.HO_COUNT, KpiId.PINGPONG_COUNT}),
)
STEALTH = XAppDescriptor(
    xapp_id="stealth",
    declared_params=frozenset({ParamId.TX_POWER}),
    declared_impacts=frozenset({KpiId.MEAN_LOAD}),
)
DESCRIPTORS = {d.xapp_id: d for d in (MLB, MRO, STEALTH)}


def _record(tick, xapp_id, target, param_id, value=1.0, outcome=ActionOutcome.APPLIED):
    return ActionRecord(tick=tick, xapp_id=xapp_id, target=target, param_id=param_id,
                        old_value=0.0, new_value=value, outcome=outcome)


def _flag(kpi, cell=0, tick=200, onset=True, direction=Direction.DEGRADATION):
    return AnomalyFlag(window_end_tick=tick, cell_id=cell, kpi_id=kpi, value=10.0, baseline_mean=1.0,
                       baseline_std=1.0, z_score=9.0, direction=direction, onset=onset)


class OnsetStub:
    """Anomaly detector stand-in serving a fixed onset series."""

    def __init__(self, onset_windows):
        self.onset_windows = set(onset_windows)

    def onset_series(self, cell, kpi, last_window, span):
        first = last_window - span + 1
        return np.array([1.0 if w in self.onset_windows else 0.0 for w in range(first, last_window + 1)])


class TestDirect:
    """Test ledger-only direct detection."""

    def test_shared_entry(self):
        records = [
            _record(150, "inj-a", "0->1", ParamId.CIO, 3.0),
            _record(150, "inj-b", "0->1", ParamId.CIO, -3.0),
            _record(160, "inj-a", "2->3", ParamId.CIO, 3.0),
        ]
        reports = detect_direct(records, 200)
        assert len(reports) == 1
        assert reports[0].conflict_type == ConflictType.DIRECT
        assert reports[0].xapps == ("inj-a", "inj-b")
        assert reports[0].parameters == {"inj-a": (("0->1", ParamId.CIO),), "inj-b": (("0->1", ParamId.CIO),)}

    def test_blocked_counts_rejected_does_not(self):
        blocked = [
            _record(150, "a", "0", ParamId.H),
            _record(151, "b", "0", ParamId.H, outcome=ActionOutcome.BLOCKED_BY_PRIORITY),
        ]
        assert len(detect_direct(blocked, 200)) == 1
        rejected = [
            _record(150, "a", "0", ParamId.H),
            _record(151, "b", "0", ParamId.H, outcome=ActionOutcome.REJECTED),
        ]
        assert detect_direct(rejected, 200) == []

    def test_same_target_other_parameter(self):
        records = [_record(150, "a", "0", ParamId.H), _record(150, "b", "0", ParamId.TTT, 100)]
        assert detect_direct(records, 200) == []

    def test_pairwise_scan_oracle(self):
        rng = random.Random(3)
        refs = [(str(c), p) for c in range(7) for p in (ParamId.H, ParamId.TTT, ParamId.TX_POWER)]
        refs += [(f"{a}->{b}", ParamId.CIO) for a in range(4) for b in range(4) if a != b]
        for case in range(200):
            xapps = [f"x{i}" for i in range(rng.randint(1, 6))]
            size = 200 if case % 10 == 0 else rng.randint(0, 200)
            records = [
                _record(i, rng.choice(xapps), *rng.choice(refs), outcome=rng.choice(list(ActionOutcome)))
                for i in range(size)
            ]

            expected = {}
            for i, first in enumerate(records):
                if first.outcome == ActionOutcome.REJECTED:
                    continue
                for second in records[i + 1:]:
                    if (
                        second.outcome != ActionOutcome.REJECTED
                        and second.xapp_id != first.xapp_id
                        and (second.target, second.param_id) == (first.target, first.param_id)
                    ):
                        expected.setdefault((first.target, first.param_id), set()).update(
                            {first.xapp_id, second.xapp_id}
                        )

            reports = detect_direct(records, 999)
            actual = {report.parameters[report.xapps[0]][0]: report.xapps for report in reports}
            assert len(actual) == len(reports)
            assert actual == {ref: tuple(sorted(writers)) for ref, writers in expected.items()}


class TestPredicates:
    """Test that the three classes partition conflict reports."""

    def test_examples(self):
        shared = ConflictReport(
            detected_at_tick=0, conflict_type=ConflictType.DIRECT, xapps=("mlb", "mro"),
            parameters={"mlb": (("0", ParamId.H),), "mro": (("0", ParamId.H),)},
        )
        assert is_direct(shared) and classify(shared, DESCRIPTORS) == ConflictType.DIRECT

        declared = ConflictReport(
            detected_at_tick=0, conflict_type=ConflictType.INDIRECT, xapps=("mlb", "mro"),
            parameters={"mlb": (("0->1", ParamId.CIO),), "mro": (("0", ParamId.H),)},
            impacted_kpis=(KpiId.HO_COUNT,),
        )
        assert classify(declared, DESCRIPTORS) == ConflictType.INDIRECT

        undeclared = declared.model_copy(update={"impacted_kpis": (KpiId.RLF_COUNT,)})
        assert classify(undeclared, DESCRIPTORS) == ConflictType.IMPLICIT

        lone = ConflictReport(
            detected_at_tick=0, conflict_type=ConflictType.IMPLICIT, xapps=("stealth",),
            parameters={"stealth": (("1", ParamId.TX_POWER),)}, impacted_kpis=(KpiId.RLF_COUNT,),
        )
        assert is_implicit(lone, DESCRIPTORS)
        assert not is_indirect(lone, DESCRIPTORS)

    def test_at_most_one_predicate_holds(self):
        rng = random.Random(17)
        pool = ["x0", "x1", "x2", "x3"]
        refs = [("0", ParamId.H), ("1", ParamId.H), ("0->1", ParamId.CIO), ("2", ParamId.TX_POWER)]
        kpis = list(KpiId)
        for _ in range(1000):
            descriptors = {
                x: XAppDescriptor(
                    xapp_id=x,
                    declared_params=frozenset({ParamId.H}),
                    declared_impacts=frozenset(rng.sample(kpis, rng.randint(0, 4))),
                )
                for x in pool
            }
            xapps = tuple(sorted(rng.sample(pool, rng.randint(1, 3))))
            report = ConflictReport(
                detected_at_tick=0,
                conflict_type=ConflictType.DIRECT,
                xapps=xapps,
                parameters={x: tuple(rng.sample(refs, rng.randint(1, 2))) for x in xapps},
                impacted_kpis=tuple(rng.sample(kpis, rng.randint(0, 2))),
            )
            holds = [
                ConflictType.DIRECT if is_direct(report) else None,
                ConflictType.INDIRECT if is_indirect(report, descriptors) else None,
                ConflictType.IMPLICIT if is_implicit(report, descriptors) else None,
            ]
            holds = [h for h in holds if h is not None]
            assert len(holds) <= 1
            assert classify(report, descriptors) == (holds[0] if holds else None)


    def test_detector_reports_satisfy_exactly_their_predicate(self):
        rng = random.Random(23)
        window_ticks = 10
        config = DetectionConfig(lag_max=2, tau=0.3, correlation_span=20)
        refs = [(str(c), p) for c in range(4) for p in (ParamId.H, ParamId.TTT, ParamId.TX_POWER)]
        refs += [(f"{a}->{b}", ParamId.CIO) for a in range(3) for b in range(3) if a != b]
        kpis = list(KpiId)
        seen = Counter()
        for _ in range(1000):
            pool = [f"x{i}" for i in range(rng.randint(1, 5))]
            descriptors = {
                x: XAppDescriptor(
                    xapp_id=x,
                    declared_params=frozenset({ParamId.H}),
                    declared_impacts=frozenset(rng.sample(kpis, rng.randint(0, 4))),
                )
                for x in pool
            }
            window_index = rng.randint(3, 25)
            end_tick = (window_index + 1) * window_ticks
            ticks = sorted(rng.randint(1, window_index) * window_ticks for _ in range(rng.randint(0, 30)))
            records = [
                _record(t, rng.choice(pool), *rng.choice(refs), outcome=rng.choice(list(ActionOutcome)))
                for t in ticks
            ]
            flags = [
                _flag(rng.choice(kpis), cell=rng.randrange(4), tick=end_tick, onset=rng.random() < 0.7,
                      direction=rng.choice(list(Direction)))
                for _ in range(rng.randint(0, 4))
            ]
            onsets = OnsetStub(rng.sample(range(window_index + 1), rng.randint(0, window_index + 1)))

            reports = detect_direct(records, end_tick)
            indirect = detect_indirect(flags, records, descriptors, end_tick)
            covered = frozenset(k for r in indirect for k in r.impacted_kpis)
            reports += indirect
            reports += detect_implicit(flags, records, descriptors, onsets, window_index, window_ticks, config,
                                       covered=covered)

            for report in reports:
                holds = {
                    ConflictType.DIRECT: is_direct(report),
                    ConflictType.INDIRECT: is_indirect(report, descriptors),
                    ConflictType.IMPLICIT: is_implicit(report, descriptors),
                }
                assert holds[report.conflict_type]
                assert sum(holds.values()) == 1
                assert classify(report, descriptors) == report.conflict_type
                seen[report.conflict_type] += 1

        assert all(seen[t] > 0 for t in ConflictType)


class TestIndirect:
    """Test anomaly-triggered indirect detection."""

    RECORDS = [
        _record(100, "mlb", "0->1", ParamId.CIO),
        _record(100, "mro", "0", ParamId.H, 3.5),
    ]

    def test_declared_shared_kpi(self):
        reports = detect_indirect([_flag(KpiId.HO_COUNT, cell=2)], self.RECORDS, DESCRIPTORS, 200)
        assert len(reports) == 1
        report = reports[0]
        assert report.conflict_type == ConflictType.INDIRECT
        assert report.xapps == ("mlb", "mro")
        assert report.impacted_kpis == (KpiId.HO_COUNT,)
        assert report.anomaly_refs == ((2, KpiId.HO_COUNT),)
        assert is_indirect(report, DESCRIPTORS)

    def test_kpis_of_one_group_merge(self):
        flags = [_flag(KpiId.PINGPONG_COUNT), _flag(KpiId.HO_COUNT, cell=1)]
        reports = detect_indirect(flags, self.RECORDS, DESCRIPTORS, 200)
        assert [r.impacted_kpis for r in reports] == [(KpiId.HO_COUNT, KpiId.PINGPONG_COUNT)]

    def test_single_declarer(self):
        assert detect_indirect([_flag(KpiId.RLF_COUNT)], self.RECORDS, DESCRIPTORS, 200) == []

    def test_shared_parameter_is_not_indirect(self):
        records = [_record(100, "mlb", "0->1", ParamId.CIO), _record(100, "mro", "0->1", ParamId.CIO)]
        assert detect_indirect([_flag(KpiId.HO_COUNT)], records, DESCRIPTORS, 200) == []

    def test_improvement_ignored(self):
        flags = [_flag(KpiId.HO_COUNT, direction=Direction.IMPROVEMENT, onset=False)]
        assert detect_indirect(flags, self.RECORDS, DESCRIPTORS, 200) == []


class TestImplicit:
    """Test correlation-based implicit detection."""

    W = 50
    CONFIG = DetectionConfig(lag_max=3, tau=0.6, correlation_span=60)

    def _records(self, stealth_windows):
        records = [_record((w + 1) * self.W, "mlb", "0->1", ParamId.CIO) for w in range(60)]
        records += [_record((w + 1) * self.W, "stealth", "1", ParamId.TX_POWER, 20.0) for w in stealth_windows]
        return sorted(records, key=lambda r: r.tick)

    def test_action_window(self):
        assert action_window(200, 50) == 3
        assert action_window(50, 50) == 0

    def test_undeclared_impact_reported(self):
        stealth_windows = [9, 19, 29, 39, 49, 58]
        detector = OnsetStub([w + 1 for w in stealth_windows])
        flags = [_flag(KpiId.RLF_COUNT, cell=1, tick=3000)]
        reports = detect_implicit(flags, self._records(stealth_windows), DESCRIPTORS, detector, 59, self.W, self.CONFIG)
        assert len(reports) == 1
        report = reports[0]
        assert report.conflict_type == ConflictType.IMPLICIT
        assert report.xapps == ("stealth",)
        assert report.impacted_kpis == (KpiId.RLF_COUNT,)
        assert report.evidence["stealth"] == pytest.approx(1.0)
        assert report.parameters == {"stealth": (("1", ParamId.TX_POWER),)}
        assert report.detected_at_tick == 3000
        assert report.anomaly_refs == ((1, KpiId.RLF_COUNT),)

    def test_declared_impact_not_reported(self):
        stealth_windows = [9, 19, 29, 39, 49, 58]
        descriptors = dict(DESCRIPTORS)
        descriptors["stealth"] = STEALTH.model_copy(
            update={"declared_impacts": frozenset({KpiId.MEAN_LOAD, KpiId.RLF_COUNT})}
        )
        detector = OnsetStub([w + 1 for w in stealth_windows])
        flags = [_flag(KpiId.RLF_COUNT, cell=1, tick=3000)]
        assert detect_implicit(flags, self._records(stealth_windows), descriptors, detector, 59, self.W, self.CONFIG) == []

    def test_uncorrelated_onsets(self):
        stealth_windows = [9, 19, 29, 39, 49, 58]
        detector = OnsetStub([5, 33, 59])
        flags = [_flag(KpiId.RLF_COUNT, cell=1, tick=3000)]
        assert detect_implicit(flags, self._records(stealth_windows), DESCRIPTORS, detector, 59, self.W, self.CONFIG) == []

    def test_covered_kpi_skipped(self):
        stealth_windows = [9, 19, 29, 39, 49, 58]
        detector = OnsetStub([w + 1 for w in stealth_windows])
        flags = [_flag(KpiId.RLF_COUNT, cell=1, tick=3000)]
        reports = detect_implicit(
            flags, self._records(stealth_windows), DESCRIPTORS, detector, 59, self.W, self.CONFIG,
            covered=frozenset({KpiId.RLF_COUNT}),
        )
        assert reports == []

    def test_short_history_skipped(self):
        detector = OnsetStub([3])
        flags = [_flag(KpiId.RLF_COUNT, cell=1, tick=200)]
        records = [_record(150, "stealth", "1", ParamId.TX_POWER, 20.0)]
        assert detect_implicit(flags, records, DESCRIPTORS, detector, 3, self.W, self.CONFIG) == []


class TestConflictDetector:
    """Test per-window analysis against a live ledger."""

    @pytest.fixture
    def detector(self):
        registry = XAppRegistry()
        for xapp_id in ("inj-a", "inj-b"):
            registry.register(XAppDescriptor(xapp_id=xapp_id, declared_params=frozenset({ParamId.CIO})))
        xnib = XNIB().initialize()
        config = DetectionConfig()
        yield ConflictDetector(config, 50, registry, xnib, AnomalyDetector(config))
        xnib.close()

    def test_direct_in_window(self, detector):
        detector.xnib.append(_record(150, "inj-a", "0->1", ParamId.CIO, 3.0))
        detector.xnib.append(_record(150, "inj-b", "0->1", ParamId.CIO, -3.0))
        detector.xnib.append(_record(200, "inj-a", "0->1", ParamId.CIO, 3.0))

        reports = detector.analyze_window(3, [])
        assert [(r.conflict_type, r.xapps, r.detected_at_tick) for r in reports] == [
            (ConflictType.DIRECT, ("inj-a", "inj-b"), 200)
        ]
        assert detector.analyze_window(4, []) == []

    def test_quiet_window(self, detector):
        assert detector.analyze_window(0, []) == []
