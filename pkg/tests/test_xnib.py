"""
Tests for the xNIB action ledger.
"""

import os
import random
import tempfile

import orjson
import pytest

from conflictlab.models import ActionOutcome, ActionRecord, ParamId
from conflictlab.ric.xnib import XNIB


@pytest.fixture
def temp_db_path():
    """Create a temporary database path for testing."""
    with tempfile.NamedTemporaryFile(suffix='.db', delete=False) as f:
        db_path = f.name

    yield db_path

    if os.path.exists(db_path):
        os.unlink(db_path)


@pytest.fixture
def xnib():
    ledger = XNIB().initialize()
    yield ledger
    ledger.close()


def _record(tick, xapp_id="mro", target="3", param_id=ParamId.H, new_value=4.0,
            outcome=ActionOutcome.APPLIED, old_value=3.0):
    return ActionRecord(tick=tick, xapp_id=xapp_id, target=target, param_id=param_id,
                        old_value=old_value, new_value=new_value, outcome=outcome)


class TestXNIB:
    """Test ledger storage and queries."""

    def test_empty_ledger(self, xnib):
        assert xnib.query(0, 100) == []
        assert len(xnib) == 0
        assert xnib.get_stats() == {"total_records": 0, "by_outcome": {}, "by_xapp": {}}

    def test_single_record_window(self, xnib):
        xnib.append(_record(50, xapp_id="mlb", target="0->1", param_id=ParamId.CIO, new_value=1.0))
        change = _record(100)
        xnib.append(change)
        xnib.append(_record(150, xapp_id="mlb", target="0->1", param_id=ParamId.CIO, new_value=2.0))
        assert xnib.query(100, 100) == [change]
        assert xnib.query(0, 200, xapp_id="mro") == [change]

    def test_sequence_numbers(self, xnib):
        assert xnib.append(_record(1)) == 1
        assert xnib.append(_record(1)) == 2
        assert len(xnib) == 2

    def test_ticks_non_decreasing(self, xnib):
        xnib.append(_record(10))
        xnib.append(_record(10))
        with pytest.raises(ValueError):
            xnib.append(_record(9))
        assert len(xnib) == 2

    def test_inverted_window(self, xnib):
        with pytest.raises(ValueError):
            xnib.query(10, 5)

    def test_append_only(self, xnib):
        first = _record(1, new_value=1.0)
        xnib.append(first)
        snapshot = xnib.records()
        for tick in range(2, 30):
            xnib.append(_record(tick, new_value=float(tick % 10)))
            assert xnib.records()[:len(snapshot)] == snapshot
            snapshot = xnib.records()
        assert snapshot[0] == first

    def test_random_appends_keep_history(self, xnib):
        rng = random.Random(19)
        accepted = []
        snapshot = []
        tick = 0
        for attempt in range(1500):
            if accepted and rng.random() < 0.1:
                stale = _record(tick - rng.randint(1, 5), xapp_id=rng.choice(["mlb", "mro"]))
                with pytest.raises(ValueError):
                    xnib.append(stale)
                assert len(xnib) == len(accepted)
                continue

            tick += rng.choice([0, 0, 1, 3])
            record = _record(
                tick,
                xapp_id=rng.choice(["mlb", "mro", "stealth"]),
                param_id=rng.choice([ParamId.H, ParamId.TTT, ParamId.CIO]),
                new_value=float(rng.randint(-6, 6)),
                outcome=rng.choice(list(ActionOutcome)),
            )
            assert xnib.append(record) == len(accepted) + 1
            accepted.append(record)

            if attempt % 50 == 0:
                current = xnib.records()
                assert current[:len(snapshot)] == snapshot
                snapshot = current

        assert xnib.records() == accepted
        assert [r.tick for r in accepted] == sorted(r.tick for r in accepted)

    def test_linear_scan_oracle(self, xnib):
        rng = random.Random(7)
        xapps = ["mlb", "mro", "stealth"]
        params = [ParamId.H, ParamId.TTT, ParamId.CIO]
        targets = ["0", "1", "0->1", "1->0"]
        records = []
        tick = 0
        for _ in range(500):
            tick += rng.choice([0, 0, 1, 5])
            record = _record(
                tick,
                xapp_id=rng.choice(xapps),
                target=rng.choice(targets),
                param_id=rng.choice(params),
                new_value=float(rng.randint(0, 6)),
                outcome=rng.choice(list(ActionOutcome)),
            )
            xnib.append(record)
            records.append(record)

        for _ in range(200):
            a = rng.randint(0, tick)
            b = rng.randint(a, tick)
            filters = {}
            if rng.random() < 0.5:
                filters["xapp_id"] = rng.choice(xapps)
            if rng.random() < 0.5:
                filters["param_id"] = rng.choice(params)
            if rng.random() < 0.3:
                filters["target"] = rng.choice(targets)
            if rng.random() < 0.3:
                filters["outcome"] = rng.choice(list(ActionOutcome))
            expected = [
                r for r in records
                if a <= r.tick <= b and all(getattr(r, key) == value for key, value in filters.items())
            ]
            assert xnib.query(a, b, **filters) == expected

    def test_stats(self, xnib):
        xnib.append(_record(1, xapp_id="mro"))
        xnib.append(_record(2, xapp_id="mlb", outcome=ActionOutcome.BLOCKED_BY_PRIORITY))
        xnib.append(_record(3, xapp_id="mlb", outcome=ActionOutcome.REJECTED))
        stats = xnib.get_stats()
        assert stats["total_records"] == 3
        assert stats["by_xapp"] == {"mlb": 2, "mro": 1}
        assert stats["by_outcome"] == {"Applied": 1, "BlockedByPriority": 1, "Rejected": 1}

    def test_export_jsonl(self, xnib):
        xnib.append(_record(1, old_value=None))
        xnib.append(_record(2, xapp_id="mlb", target="0->1", param_id=ParamId.CIO, new_value=-1.0))
        lines = xnib.export_jsonl().splitlines()
        assert len(lines) == 2
        first = orjson.loads(lines[0])
        assert set(first) == {"tick", "xapp_id", "target", "param_id", "old_value", "new_value", "outcome"}
        assert first["old_value"] is None
        assert first["outcome"] == "Applied"
        assert orjson.loads(lines[1])["param_id"] == "CIO"

    def test_persistence(self, temp_db_path):
        ledger = XNIB(temp_db_path).initialize()
        ledger.append(_record(5))
        ledger.close()

        reopened = XNIB(temp_db_path).initialize()
        try:
            assert len(reopened) == 1
            with pytest.raises(ValueError):
                reopened.append(_record(4))
            assert reopened.records() == [_record(5)]
        finally:
            reopened.close()

    def test_closed_ledger_reads_empty(self):
        ledger = XNIB().initialize()
        ledger.append(_record(1))
        ledger.close()
        assert ledger.records() == []
        assert ledger.query(0, 10) == []
