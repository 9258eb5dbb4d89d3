"""
Priority learning: an epsilon-greedy bandit over complete priority orderings.
"""

import logging
import math
from itertools import permutations
from typing import Callable, List, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from ..exceptions import TooManyXAppsError
from ..models import LearnedPolicy, PriorityPolicy, RewardTraceRow

logger = logging.getLogger(__name__)

MAX_LEARNING_XAPPS = 5

# (ordering, episode seed) -> reward
EpisodeEvaluator = Callable[[Tuple[str, ...], int], float]


def arm_label(ordering: Sequence[str]) -> str:
    return ">".join(ordering)


class PriorityLearner:
    """
    Stateless bandit whose arms are the permutations of the registered xApps.

    Every arm is pulled once in order, then each episode explores with
    probability epsilon and otherwise exploits the best running mean, ties
    going to the lowest arm index. Two draws are consumed per episode whatever
    the branch, so runs are reproducible from the learner seed.
    """

    def __init__(self, xapp_ids: Sequence[str], epsilon: float = 0.1, seed: int = 0):
        if len(xapp_ids) > MAX_LEARNING_XAPPS:
            raise TooManyXAppsError(
                f"{len(xapp_ids)} xApps give {math.factorial(len(xapp_ids))} orderings; "
                f"at most {MAX_LEARNING_XAPPS} xApps are supported"
            )
        if not xapp_ids:
            raise ValueError("priority learning needs at least one xApp")
        self.arms: List[Tuple[str, ...]] = list(permutations(xapp_ids))
        self.epsilon = epsilon
        self.rng = np.random.default_rng(seed)
        self.counts = np.zeros(len(self.arms), dtype=int)
        self.values = np.zeros(len(self.arms), dtype=float)

    def select(self, episode: int) -> int:
        explore = self.rng.random() < self.epsilon
        random_arm = int(self.rng.integers(len(self.arms)))
        if episode < len(self.arms):
            return episode
        if explore:
            return random_arm
        return int(np.argmax(self.values))

    def update(self, arm: int, reward: float) -> None:
        self.counts[arm] += 1
        self.values[arm] += (reward - self.values[arm]) / self.counts[arm]

    def best_arm(self) -> int:
        """Index of the best running mean among the arms that were pulled."""
        pulled = np.flatnonzero(self.counts)
        if not len(pulled):
            return 0
        return int(pulled[np.argmax(self.values[pulled])])

    def run(
        self,
        evaluator: EpisodeEvaluator,
        seeds: Sequence[int],
        progress: bool = False,
    ) -> Tuple[LearnedPolicy, List[RewardTraceRow]]:
        """
        Play one episode per seed.

        Returns:
            The learned policy and the per-episode reward trace
        """
        if len(self.arms) == 1:
            logger.info("Single xApp: one ordering, nothing to learn")
            return LearnedPolicy(ordering=list(self.arms[0]), arm_values={}, episodes=0), []

        trace = []
        for episode, seed in enumerate(tqdm(seeds, desc="episodes", disable=not progress)):
            arm = self.select(episode)
            reward = float(evaluator(self.arms[arm], seed))
            self.update(arm, reward)
            trace.append(RewardTraceRow(episode=episode, arm=arm_label(self.arms[arm]), reward=reward))
            logger.debug(f"Episode {episode} seed {seed}: {arm_label(self.arms[arm])} -> {reward:.4f}")

        best = self.arms[self.best_arm()]
        logger.info(f"Learned ordering {arm_label(best)} after {len(trace)} episodes")
        return (
            LearnedPolicy(
                ordering=list(best),
                arm_values={arm_label(a): float(v) for a, v, n in zip(self.arms, self.values, self.counts) if n},
                episodes=len(trace),
            ),
            trace,
        )


def learn_priorities(
    xapp_ids: Sequence[str],
    evaluator: EpisodeEvaluator,
    seeds: Sequence[int],
    epsilon: float = 0.1,
    learner_seed: int = 0,
    progress: bool = False,
) -> Tuple[PriorityPolicy, LearnedPolicy, List[RewardTraceRow]]:
    """
    Learn a priority ordering for ``xapp_ids``.

    Raises:
        TooManyXAppsError: With more than five xApps.
    """
    learner = PriorityLearner(xapp_ids, epsilon=epsilon, seed=learner_seed)
    learned, trace = learner.run(evaluator, seeds, progress=progress)
    return PriorityPolicy(ordering=tuple(learned.ordering)), learned, trace
