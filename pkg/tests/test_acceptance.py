"""
Seeded multi-run checks of the headline phenomena on the 19-cell scenarios.

Slow; deselected by default. Run with ``pytest -m acceptance``.
"""

import asyncio
from collections import Counter
from pathlib import Path

import pytest

from conflictlab.artifacts import write_run_bundle
from conflictlab.engine import EpisodeEvaluatorFactory, ExperimentEngine, late_load_stddev, run_experiment, run_learning
from conflictlab.models import ConflictType, Direction, KpiId
from conflictlab.scenario import load_scenario, parse_scenario

pytestmark = pytest.mark.acceptance

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
SEEDS = range(1, 11)


def scenario(name, seed=None):
    return load_scenario(SCENARIOS / name, seed)


def observe(config, xapps_enabled=True):
    """Run once and keep what the checks need; the ledger is closed afterwards."""
    engine = ExperimentEngine(config, xapps_enabled=xapps_enabled)
    result = engine.run()
    try:
        return {
            "totals": result.kpi_totals(),
            "late_load_stddev": late_load_stddev(result.windows),
            "flags": result.flags,
            "conflicts": result.conflicts,
            "windows": result.windows,
        }
    finally:
        engine.xnib.close()


def test_flagship_is_byte_identical(tmp_path):
    for name in ("first", "second"):
        result = run_experiment(scenario("flagship-19cell.yaml", 42), with_baseline=False)
        try:
            asyncio.run(write_run_bundle(result, tmp_path / name))
        finally:
            result.xnib.close()
    for artifact in ("events.csv", "kpis.csv", "xnib.jsonl"):
        assert (tmp_path / "first" / artifact).read_bytes() == (tmp_path / "second" / artifact).read_bytes()


def test_pingpong_blowup_under_joint_control():
    joint_wins = mro_ok = mlb_ok = 0
    for seed in SEEDS:
        joint = observe(scenario("flagship-19cell.yaml", seed))
        mlb = observe(scenario("mlb-only.yaml", seed))
        mro = observe(scenario("mro-only.yaml", seed))
        baseline = observe(scenario("baseline.yaml", seed), xapps_enabled=False)

        single = max(mlb["totals"]["pingpong_count"], mro["totals"]["pingpong_count"])
        joint_wins += joint["totals"]["pingpong_count"] >= 5 * single
        mro_ok += mro["totals"]["rlf_count"] <= baseline["totals"]["rlf_count"]
        mlb_ok += mlb["late_load_stddev"] <= baseline["late_load_stddev"]

    assert joint_wins >= 8
    assert mro_ok >= 8
    assert mlb_ok >= 8


def test_indirect_conflict_follows_pingpong_anomaly():
    hits = 0
    for seed in SEEDS:
        run = observe(scenario("flagship-19cell.yaml", seed))
        anomalies = [
            f for f in run["flags"]
            if f.kpi_id == KpiId.PINGPONG_COUNT and f.direction == Direction.DEGRADATION
        ]
        if not anomalies:
            continue
        first_tick = anomalies[0].window_end_tick
        hits += any(
            r.conflict_type == ConflictType.INDIRECT
            and set(r.xapps) == {"mlb", "mro"}
            and KpiId.PINGPONG_COUNT in r.impacted_kpis
            and first_tick <= r.detected_at_tick <= first_tick + 30 * 50
            for r in run["conflicts"]
        )
    assert hits >= 8


def _without_stealth(config):
    data = config.model_dump(mode="json", by_alias=True)
    data["xapps"]["stealth"]["enabled"] = False
    return parse_scenario(data)


def test_stealth_raises_victim_rlf():
    raised = 0
    for seed in SEEDS:
        config = scenario("stealth-implicit.yaml", seed)
        victim = config.xapps.stealth.victim_cell

        def victim_rlf(run):
            return sum(s.rlf_count for w in run["windows"] for s in w.samples if s.cell_id == victim)

        raised += victim_rlf(observe(config)) >= 2 * max(victim_rlf(observe(_without_stealth(config))), 1)
    assert raised >= 8


def test_stealth_is_top_implicit_suspect():
    top = false_implications = 0
    for seed in SEEDS:
        config = scenario("stealth-implicit.yaml", seed)
        victim = config.xapps.stealth.victim_cell
        reports = [
            r for r in observe(config)["conflicts"]
            if r.conflict_type == ConflictType.IMPLICIT
            and KpiId.RLF_COUNT in r.impacted_kpis
            and any(cell == victim for cell, _ in r.anomaly_refs)
        ]
        if any(max(r.evidence, key=r.evidence.get) == "stealth" for r in reports):
            top += 1
        if any({"mlb", "mro"} & set(r.xapps) for r in reports):
            false_implications += 1
    assert top >= 8
    assert false_implications <= 1


def test_mitigation_cuts_pingpong():
    benefits = 0
    for seed in SEEDS:
        off = observe(scenario("flagship-19cell.yaml", seed))
        on = observe(scenario("flagship-cm.yaml", seed))
        mlb = observe(scenario("mlb-only.yaml", seed))
        mro = observe(scenario("mro-only.yaml", seed))
        benefits += (
            on["totals"]["pingpong_count"] <= 0.5 * off["totals"]["pingpong_count"]
            and on["late_load_stddev"] <= 1.5 * mlb["late_load_stddev"]
            and on["totals"]["rlf_count"] <= 1.5 * max(mro["totals"]["rlf_count"], 1)
        )
    assert benefits >= 8


def test_bandit_selects_dominant_ordering():
    config = scenario("learn-priority.yaml")
    factory = EpisodeEvaluatorFactory(config)
    cache = {}

    def evaluator(ordering, seed):
        if (ordering, seed) not in cache:
            cache[(ordering, seed)] = factory(ordering, seed)
        return cache[(ordering, seed)]

    orderings = [("mro", "mlb"), ("mlb", "mro")]
    schedule = config.learning.seed_schedule
    dominant = [
        o for o in orderings
        if all(evaluator(o, s) > evaluator(other, s) for s in schedule for other in orderings if other != o)
    ]
    if not dominant:
        pytest.skip("neither ordering dominates on every scheduled seed")

    _, learned, trace = run_learning(config, evaluator)
    assert learned.ordering == list(dominant[0])
    late = Counter(row.arm for row in trace[-100:])
    assert late[">".join(dominant[0])] >= 80
