"""
xNIB: append-only ledger of xApp parameter operations, backed by SQLite.
"""

import logging
import sqlite3
import threading
from typing import Any, Dict, List, Optional, Union

import orjson

from ..models import ActionOutcome, ActionRecord, ParamId

logger = logging.getLogger(__name__)


class XNIB:
    """
    Action ledger.

    Records are only ever inserted; ticks must be non-decreasing in insertion
    order. Writes go through a single lock, reads see committed rows only.
    """

    def __init__(self, db_path: str = ":memory:"):
        """Initialize the ledger; call initialize() before use."""
        self.db_path = db_path
        self.connection: Optional[sqlite3.Connection] = None
        self._write_lock = threading.Lock()
        self._last_tick = -1
        self._count = 0

    def initialize(self) -> "XNIB":
        """Open the database and create tables."""
        try:
            self.connection = sqlite3.connect(self.db_path, check_same_thread=False)
            self.connection.row_factory = sqlite3.Row
            self._create_tables()
        except sqlite3.Error as e:
            logger.error(f"Failed to initialize xNIB: {e}")
            raise
        logger.debug(f"xNIB initialized at {self.db_path}")
        return self

    def _create_tables(self) -> None:
        cursor = self.connection.cursor()
        cursor.execute("""
            CREATE TABLE IF NOT EXISTS actions (
                seq INTEGER PRIMARY KEY AUTOINCREMENT,
                tick INTEGER NOT NULL,
                xapp_id TEXT NOT NULL,
                target TEXT NOT NULL,
                param_id TEXT NOT NULL,
                old_value REAL,
                new_value REAL NOT NULL,
                outcome TEXT NOT NULL
            )
        """)
        cursor.execute("CREATE INDEX IF NOT EXISTS idx_actions_tick ON actions (tick)")
        cursor.execute("CREATE INDEX IF NOT EXISTS idx_actions_xapp ON actions (xapp_id)")
        cursor.execute("CREATE INDEX IF NOT EXISTS idx_actions_param_target ON actions (param_id, target)")
        self.connection.commit()

        row = cursor.execute("SELECT COUNT(*) AS count, MAX(tick) AS last FROM actions").fetchone()
        self._count = row["count"]
        self._last_tick = row["last"] if row["last"] is not None else -1

    def append(self, record: ActionRecord) -> int:
        """
        Append one record.

        Returns:
            Sequence number of the record (1-based)

        Raises:
            ValueError: If the record's tick precedes the last recorded tick.
        """
        with self._write_lock:
            if record.tick < self._last_tick:
                raise ValueError(
                    f"xNIB ticks must be non-decreasing: {record.tick} after {self._last_tick}"
                )
            cursor = self.connection.execute(
                """
                INSERT INTO actions (tick, xapp_id, target, param_id, old_value, new_value, outcome)
                VALUES (?, ?, ?, ?, ?, ?, ?)
                """,
                (
                    record.tick,
                    record.xapp_id,
                    record.target,
                    record.param_id.value,
                    record.old_value,
                    record.new_value,
                    record.outcome.value,
                ),
            )
            self.connection.commit()
            self._last_tick = record.tick
            self._count += 1
            return cursor.lastrowid

    def query(
        self,
        tick_a: int,
        tick_b: int,
        xapp_id: Optional[str] = None,
        param_id: Optional[Union[ParamId, str]] = None,
        target: Optional[str] = None,
        outcome: Optional[ActionOutcome] = None,
    ) -> List[ActionRecord]:
        """
        Records with tick_a <= tick <= tick_b matching every given filter, in ledger order.

        Raises:
            ValueError: If tick_a > tick_b.
        """
        if tick_a > tick_b:
            raise ValueError(f"empty tick window: [{tick_a}, {tick_b}]")
        if self.connection is None:
            return []

        query = "SELECT * FROM actions WHERE tick >= ? AND tick <= ?"
        params: List[Any] = [tick_a, tick_b]
        if xapp_id is not None:
            query += " AND xapp_id = ?"
            params.append(xapp_id)
        if param_id is not None:
            query += " AND param_id = ?"
            params.append(ParamId(param_id).value)
        if target is not None:
            query += " AND target = ?"
            params.append(target)
        if outcome is not None:
            query += " AND outcome = ?"
            params.append(ActionOutcome(outcome).value)
        query += " ORDER BY seq"

        rows = self.connection.execute(query, params).fetchall()
        return [self._row_to_record(row) for row in rows]

    def records(self) -> List[ActionRecord]:
        """Every record in ledger order."""
        if self.connection is None:
            return []
        rows = self.connection.execute("SELECT * FROM actions ORDER BY seq").fetchall()
        return [self._row_to_record(row) for row in rows]

    @staticmethod
    def _row_to_record(row: sqlite3.Row) -> ActionRecord:
        return ActionRecord(
            tick=row["tick"],
            xapp_id=row["xapp_id"],
            target=row["target"],
            param_id=ParamId(row["param_id"]),
            old_value=row["old_value"],
            new_value=row["new_value"],
            outcome=ActionOutcome(row["outcome"]),
        )

    def __len__(self) -> int:
        return self._count

    def get_stats(self) -> Dict[str, Any]:
        """Record counts in total, by outcome and by xApp."""
        if self.connection is None:
            return {"total_records": 0, "by_outcome": {}, "by_xapp": {}}

        cursor = self.connection.cursor()
        by_outcome = {
            row["outcome"]: row["count"]
            for row in cursor.execute(
                "SELECT outcome, COUNT(*) AS count FROM actions GROUP BY outcome ORDER BY outcome"
            )
        }
        by_xapp = {
            row["xapp_id"]: row["count"]
            for row in cursor.execute(
                "SELECT xapp_id, COUNT(*) AS count FROM actions GROUP BY xapp_id ORDER BY xapp_id"
            )
        }
        return {"total_records": self._count, "by_outcome": by_outcome, "by_xapp": by_xapp}

    def export_jsonl(self) -> bytes:
        """One JSON object per record, keys sorted, newline-terminated."""
        lines = [
            orjson.dumps(record.model_dump(mode="json"), option=orjson.OPT_SORT_KEYS)
            for record in self.records()
        ]
        return b"".join(line + b"\n" for line in lines)

    def close(self) -> None:
        if self.connection:
            self.connection.close()
            self.connection = None
            logger.debug("xNIB closed")
