"""
Artifact bundles: CSV, JSON-lines and JSON files written asynchronously.
"""

import asyncio
import csv
import io
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import aiofiles
import orjson

from .engine import RunResult
from .exceptions import MissingArtifactError
from .models import ConflictReport, KpiWindow, LearnedPolicy, RewardTraceRow, SimEvent

logger = logging.getLogger(__name__)

EVENT_COLUMNS = ["tick", "kind", "ue_id", "from_cell", "to_cell"]
KPI_COLUMNS = [
    "window_end_tick", "cell_id", "mean_load", "call_blocks", "rlf_count", "ho_count", "pingpong_count",
    "too_early_count", "too_late_count",
]
REWARD_COLUMNS = ["episode", "arm", "reward"]
COMPARED_KPIS = [
    "mean_load", "call_blocks", "rlf_count", "ho_count", "pingpong_count", "too_early_count", "too_late_count",
]

SUMMARY_FILE = "summary.json"


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def events_csv(events: Iterable[SimEvent]) -> str:
    return _csv_text(EVENT_COLUMNS, ((e.tick, e.kind.value, e.ue_id, e.from_cell, e.to_cell) for e in events))


def kpis_csv(windows: Iterable[KpiWindow]) -> str:
    rows = (
        [getattr(s, column) for column in KPI_COLUMNS]
        for w in windows
        for s in w.samples
    )
    return _csv_text(KPI_COLUMNS, rows)


def rewards_csv(trace: Iterable[RewardTraceRow]) -> str:
    return _csv_text(REWARD_COLUMNS, ((r.episode, r.arm, r.reward) for r in trace))


def conflicts_jsonl(reports: Iterable[ConflictReport]) -> bytes:
    return b"".join(orjson.dumps(r.to_export(), option=orjson.OPT_SORT_KEYS) + b"\n" for r in reports)


def dumps_json(data: Any) -> bytes:
    return orjson.dumps(data, option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_NON_STR_KEYS) + b"\n"


async def _write(path: Path, data: Union[bytes, str]) -> Path:
    payload = data.encode("utf-8") if isinstance(data, str) else data
    async with aiofiles.open(path, "wb") as f:
        await f.write(payload)
    logger.debug(f"Wrote {path} ({len(payload)} bytes)")
    return path


async def write_run_bundle(result: RunResult, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """
    Write events.csv, kpis.csv, xnib.jsonl, conflicts.jsonl and summary.json.

    Raises:
        OSError: When the directory or a file cannot be written.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    contents = {
        "events.csv": events_csv(result.events),
        "kpis.csv": kpis_csv(result.windows),
        "xnib.jsonl": result.xnib.export_jsonl(),
        "conflicts.jsonl": conflicts_jsonl(result.conflicts),
        SUMMARY_FILE: dumps_json(result.summary()),
    }
    paths = await asyncio.gather(*(_write(out / name, data) for name, data in contents.items()))
    logger.info(f"Wrote {len(paths)} artifacts to {out}")
    return dict(zip(contents, paths))


async def write_learning_bundle(
    learned: LearnedPolicy,
    trace: Sequence[RewardTraceRow],
    out_dir: Union[str, Path],
) -> Dict[str, Path]:
    """Write policy.json and rewards.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    contents = {
        "policy.json": dumps_json(learned.model_dump()),
        "rewards.csv": rewards_csv(trace),
    }
    paths = await asyncio.gather(*(_write(out / name, data) for name, data in contents.items()))
    logger.info(f"Wrote learned policy and {len(trace)} reward rows to {out}")
    return dict(zip(contents, paths))


async def read_summary(run_dir: Union[str, Path]) -> Dict[str, Any]:
    """
    Load summary.json of a run directory.

    Raises:
        MissingArtifactError: When the file does not exist.
    """
    path = Path(run_dir) / SUMMARY_FILE
    if not path.is_file():
        raise MissingArtifactError(f"{path} not found")
    async with aiofiles.open(path, "rb") as f:
        return orjson.loads(await f.read())


def _ratio(a: float, b: float) -> Optional[float]:
    if b == 0:
        return 1.0 if a == 0 else None
    return a / b


def compare_summaries(summary_a: Dict[str, Any], summary_b: Dict[str, Any]) -> Dict[str, Any]:
    """Per-KPI totals side by side with the ratio a / b (None when only b is zero)."""
    rows: Dict[str, Dict[str, Optional[float]]] = {}
    totals_a = summary_a.get("totals", {})
    totals_b = summary_b.get("totals", {})
    for kpi in COMPARED_KPIS:
        a = float(totals_a.get(kpi, 0))
        b = float(totals_b.get(kpi, 0))
        rows[kpi] = {"a": a, "b": b, "ratio": _ratio(a, b)}
    return {
        "a": {"scenario": summary_a.get("scenario"), "seed": summary_a.get("seed")},
        "b": {"scenario": summary_b.get("scenario"), "seed": summary_b.get("seed")},
        "kpis": rows,
    }


async def compare_runs(run_a: Union[str, Path], run_b: Union[str, Path]) -> Dict[str, Any]:
    summary_a, summary_b = await asyncio.gather(read_summary(run_a), read_summary(run_b))
    return compare_summaries(summary_a, summary_b)


def format_comparison(comparison: Dict[str, Any]) -> List[str]:
    """Fixed-width table lines for the terminal."""
    lines = [f"{'kpi':<18}{'A':>14}{'B':>14}{'A/B':>10}"]
    for kpi, row in comparison["kpis"].items():
        ratio = "inf" if row["ratio"] is None else f"{row['ratio']:.3f}"
        lines.append(f"{kpi:<18}{row['a']:>14.4f}{row['b']:>14.4f}{ratio:>10}")
    return lines
