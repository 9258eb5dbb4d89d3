"""
Episode reward: weighted KPI change against a seed-matched run without xApps.
"""

from typing import Sequence

import numpy as np

from ..models import EpisodeAggregate, KpiWindow, RewardConfig


def aggregate_episode(windows: Sequence[KpiWindow]) -> EpisodeAggregate:
    """
    Collapse a run into the three reward inputs.

    load_stddev is the cross-cell standard deviation of mean_load averaged over
    windows; rlf_rate and pingpong_rate are network totals per window.
    """
    if not windows:
        return EpisodeAggregate()
    stddevs = [float(np.std([s.mean_load for s in w.samples])) for w in windows]
    rlf = sum(s.rlf_count for w in windows for s in w.samples)
    pingpong = sum(s.pingpong_count for w in windows for s in w.samples)
    return EpisodeAggregate(
        load_stddev=float(np.mean(stddevs)),
        rlf_rate=rlf / len(windows),
        pingpong_rate=pingpong / len(windows),
    )


def _relative(value: float, baseline: float) -> float:
    return (value - baseline) / (baseline if baseline > 0 else 1.0)


def compute_reward(aggregate: EpisodeAggregate, baseline: EpisodeAggregate, config: RewardConfig) -> float:
    """
    -(w_load dL + w_rlf dR + w_pp dP), each d the change relative to the baseline.

    0 when every term equals its baseline; a zero baseline term is divided by 1.
    """
    return -(
        config.w_load * _relative(aggregate.load_stddev, baseline.load_stddev)
        + config.w_rlf * _relative(aggregate.rlf_rate, baseline.rlf_rate)
        + config.w_pp * _relative(aggregate.pingpong_rate, baseline.pingpong_rate)
    )
