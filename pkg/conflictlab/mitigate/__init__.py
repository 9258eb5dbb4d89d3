"""
Conflict mitigation: priority blocking and priority learning.
"""

from .learner import MAX_LEARNING_XAPPS, EpisodeEvaluator, PriorityLearner, arm_label, learn_priorities
from .priority import Mitigator, merge_blocks, resolve_conflict
from .reward import aggregate_episode, compute_reward

__all__ = [
    "EpisodeEvaluator",
    "MAX_LEARNING_XAPPS",
    "Mitigator",
    "PriorityLearner",
    "aggregate_episode",
    "arm_label",
    "compute_reward",
    "learn_priorities",
    "merge_blocks",
    "resolve_conflict",
]
