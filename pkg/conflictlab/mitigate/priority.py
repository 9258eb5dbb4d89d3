"""
Priority-based conflict mitigation (the CM role).
"""

import logging
from typing import Dict, Iterable, List, Sequence, Tuple

from ..models import BlockRule, ConflictReport, ConflictType, ParamId, PriorityPolicy

logger = logging.getLogger(__name__)


def _losers(report: ConflictReport, policy: PriorityPolicy, tau_hard: float) -> List[str]:
    xapps = list(report.xapps)
    if report.conflict_type == ConflictType.IMPLICIT and xapps:
        top = max(xapps, key=lambda x: report.evidence.get(x, -1.0))
        if report.evidence.get(top, -1.0) > tau_hard:
            return [top]
    if not xapps:
        return []
    winner = min(xapps, key=lambda x: (policy.rank(x), x))
    return [x for x in xapps if x != winner]


def merge_blocks(existing: Iterable[BlockRule], new: Iterable[BlockRule]) -> Tuple[BlockRule, ...]:
    """Union of block rules; a rule present in both keeps the later expiry."""
    merged: Dict[Tuple[str, str, ParamId], BlockRule] = {}
    for rule in list(existing) + list(new):
        key = (rule.xapp_id, rule.target_pattern, rule.param_id)
        if key not in merged or rule.expires_at_tick > merged[key].expires_at_tick:
            merged[key] = rule
    return tuple(merged.values())


def resolve_conflict(
    report: ConflictReport,
    policy: PriorityPolicy,
    cooldown_ticks: int,
    now_tick: int,
    tau_hard: float = 0.8,
) -> PriorityPolicy:
    """
    Block the losing xApps of a conflict for ``cooldown_ticks``.

    Every implicated xApp except the highest-priority one loses. For an implicit
    conflict whose top-evidence xApp scores above ``tau_hard``, that xApp alone
    loses regardless of priority. Direct blocks name the exact target; indirect
    and implicit blocks use the "*" pattern per contested parameter.

    Args:
        report: Conflict to resolve
        policy: Current ordering and blocks
        cooldown_ticks: Block duration
        now_tick: Tick of the decision
        tau_hard: Evidence above which an implicit culprit is blocked outright

    Returns:
        Updated policy
    """
    expires = now_tick + cooldown_ticks
    rules = []
    for xapp_id in _losers(report, policy, tau_hard):
        for target, param_id in report.parameters.get(xapp_id, ()):
            pattern = target if report.conflict_type == ConflictType.DIRECT else "*"
            rules.append(BlockRule(
                xapp_id=xapp_id, target_pattern=pattern, param_id=param_id, expires_at_tick=expires,
            ))
    if not rules:
        return policy
    return policy.model_copy(update={"active_blocks": merge_blocks(policy.active_blocks, rules)})


class Mitigator:
    """Holds the live PriorityPolicy and acts as the RIC's submission gate."""

    def __init__(self, ordering: Sequence[str], cooldown_ticks: int, tau_hard: float = 0.8):
        self.policy = PriorityPolicy(ordering=tuple(ordering))
        self.cooldown_ticks = cooldown_ticks
        self.tau_hard = tau_hard
        self.resolved = 0

    def handle(self, reports: Iterable[ConflictReport], now_tick: int) -> PriorityPolicy:
        """Resolve every report in order and return the resulting policy."""
        before = len(self.policy.active_blocks)
        for report in reports:
            self.policy = resolve_conflict(report, self.policy, self.cooldown_ticks, now_tick, self.tau_hard)
            self.resolved += 1
        if len(self.policy.active_blocks) != before:
            logger.debug(f"{len(self.policy.active_blocks)} active blocks at tick {now_tick}")
        return self.policy

    def is_blocked(self, xapp_id: str, target: str, param_id: ParamId, tick: int) -> bool:
        self.policy = self.policy.pruned(tick)
        return any(rule.covers(xapp_id, target, param_id) for rule in self.policy.active_blocks)
