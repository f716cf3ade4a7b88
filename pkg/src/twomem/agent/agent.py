from typing import NamedTuple, Optional, Tuple

from typing_extensions import Self

import numpy as np

from twomem.envs import ActionId, StateId, TabularEnv
from twomem.learning import QTable
from twomem.memory import (
    ECMemory,
    FeatureExtractor,
    FeatureKind,
    MemoryKind,
    ReplayBuffer,
    Transition,
)

from .config import AgentConfig, AgentMode
from .tracker import ScoreTracker


class EpisodeResult(NamedTuple):
    episode_return: float
    memory_used: MemoryKind
    steps: int


class EvalResult(NamedTuple):
    eval_return: float
    memory_used: MemoryKind


class TwoMemoryAgent:
    """Agent switching between an episodic memory and a Q-table per episode.

    Every training episode is driven by one memory, chosen with probability
    `p_ec` (EC) or `1 - p_ec` (RL). All transitions go into one replay buffer;
    the Q-table trains on uniform minibatches every `train_every` steps and the
    episodic memory is updated with each finished episode. Without data
    sharing, each memory only learns from episodes it collected. With it, RL
    episodes reach episodic memory only if they end in an absorbing state.
    Evaluation acts greedily with the memory that has the higher recent
    training score.

    The pure modes reduce the agent to either memory alone (pure EC never
    trains the Q-table, pure RL never writes episodic memory).

    Attributes:
        config: `AgentConfig` instance.
        ec: `ECMemory` instance.
        rl: `QTable` instance.
        buffer: `ReplayBuffer` instance.
        tracker: `ScoreTracker` instance.
        global_step: Total environment steps taken in training episodes.
        rng: Random generator for training (memory choice, exploration, dynamics).
        eval_rng: Separate random generator for evaluation episodes.
    """

    def __init__(
        self: Self, env: TabularEnv, config: Optional[AgentConfig] = None
    ) -> None:
        """Initializes the agent instance.

        Args:
            env: `TabularEnv` instance the agent will act in.
            config: Optional `AgentConfig` instance. Defaults to `AgentConfig()`.
        """
        if config is None:
            config = AgentConfig()

        self.config = config
        self.action_count = env.spec.action_count
        self.gamma = (
            config.gamma if config.gamma is not None else env.spec.discount_default
        )

        # independent streams for training, evaluation and feature projection
        seeds = np.random.SeedSequence(config.seed).spawn(3)
        train_seq, eval_seq, projection_seq = seeds
        self.rng = np.random.default_rng(train_seq)
        self.eval_rng = np.random.default_rng(eval_seq)

        if config.features == FeatureKind.RANDOM_PROJECTION:
            extractor = FeatureExtractor(
                config.features,
                input_dim=len(env.states[0].features),
                target_dim=config.projection_dim,
                seed=projection_seq,
            )
        else:
            extractor = FeatureExtractor()

        self.ec = ECMemory(
            self.action_count,
            capacity=config.ec_capacity,
            k=config.k,
            extractor=extractor,
        )
        self.rl = QTable(
            env.spec.state_count,
            self.action_count,
            alpha=config.alpha,
            gamma=self.gamma,
            alpha_decay=config.alpha_decay,
        )
        self.buffer = ReplayBuffer(config.replay_capacity)
        self.tracker = ScoreTracker(config.score_window)

        self.global_step = 0
        self.td_updates = 0
        self.last_td_error: Optional[float] = None

    @property
    def mode(self: Self) -> AgentMode:
        return self.config.mode

    @property
    def p_ec(self: Self) -> float:
        """Current probability of driving the next training episode with EC."""
        if self.mode == AgentMode.PURE_EC:
            return 1.0
        elif self.mode == AgentMode.PURE_RL:
            return 0.0

        return self.config.schedule.p_ec(self.global_step)

    @property
    def scores(self: Self) -> Tuple[float, float]:
        """Returns the `(RL, EC)` training scores."""
        return self.tracker.score(MemoryKind.RL), self.tracker.score(MemoryKind.EC)

    def select_memory_for_episode(self: Self) -> MemoryKind:
        if self.mode == AgentMode.PURE_EC:
            return MemoryKind.EC
        elif self.mode == AgentMode.PURE_RL:
            return MemoryKind.RL

        return MemoryKind.EC if self.rng.random() < self.p_ec else MemoryKind.RL

    def act(
        self: Self,
        memory: MemoryKind,
        state: StateId,
        epsilon: Optional[float] = None,
        rng: Optional[np.random.Generator] = None,
    ) -> ActionId:
        """Selects an action epsilon-greedily with respect to a memory.

        Args:
            memory: `MemoryKind` whose greedy action is used.
            state: `StateId` instance.
            epsilon: Optional exploration rate. Defaults to the configured one.
            rng: Optional random generator. Defaults to the training generator.

        Returns:
            Integer action index.
        """
        if epsilon is None:
            epsilon = self.config.epsilon
        if rng is None:
            rng = self.rng

        if epsilon > 0.0 and rng.random() < epsilon:
            return int(rng.integers(self.action_count))

        if memory == MemoryKind.EC:
            return self.ec.select_action(state, rng)

        return self.rl.greedy_action(state)

    def _train_rl(self: Self) -> None:
        source = None if self.config.data_sharing else MemoryKind.RL
        batch = self.buffer.sample_uniform(self.config.batch_size, self.rng, source)

        # nothing eligible yet
        if not batch:
            return

        self.last_td_error = self.rl.td_update(batch)
        self.td_updates += 1

    def run_training_episode(self: Self, env: TabularEnv) -> EpisodeResult:
        """Runs one training episode.

        Args:
            env: `TabularEnv` instance.

        Returns:
            `EpisodeResult` with the undiscounted return, the memory that
            drove the episode and the number of steps.
        """
        memory = self.select_memory_for_episode()
        trains_rl = self.mode != AgentMode.PURE_EC

        state = env.reset(self.rng)
        trajectory = []
        episode_return = 0.0

        while True:
            action = self.act(memory, state)
            result = env.step(action, self.rng)

            transition = Transition(
                state, action, result.reward, result.next_state, result.terminal, memory
            )
            self.buffer.push(transition)
            trajectory.append(transition)
            episode_return += result.reward

            self.global_step += 1

            if trains_rl and self.global_step % self.config.train_every == 0:
                self._train_rl()

            state = result.next_state

            if result.done:
                break

        # shared episodes cut off by the step limit hold partial returns
        shares_ec = self.config.data_sharing and not result.truncated

        if self.mode != AgentMode.PURE_RL and (memory == MemoryKind.EC or shares_ec):
            self.ec.update_from_episode(trajectory, self.gamma)

        self.tracker.record(memory, episode_return)

        return EpisodeResult(episode_return, memory, len(trajectory))

    def select_memory_for_eval(self: Self) -> MemoryKind:
        """Selects the memory with the higher recent training score (RL on ties)."""
        if self.mode == AgentMode.PURE_EC:
            return MemoryKind.EC
        elif self.mode == AgentMode.PURE_RL:
            return MemoryKind.RL

        # no training scores yet
        if not any(self.tracker.counts.values()):
            return MemoryKind.EC

        score_rl, score_ec = self.scores

        return MemoryKind.RL if score_rl >= score_ec else MemoryKind.EC

    def run_eval_episode(
        self: Self, env: TabularEnv, memory: Optional[MemoryKind] = None
    ) -> EvalResult:
        """Runs one greedy evaluation episode without learning.

        Only the evaluation generator is consumed; memories, buffer, tracker
        and step counter are left untouched.

        Args:
            env: `TabularEnv` instance.
            memory: Optional `MemoryKind` to evaluate. Defaults to the memory
                chosen by `select_memory_for_eval`.

        Returns:
            `EvalResult` with the undiscounted return and the memory used.
        """
        if memory is None:
            memory = self.select_memory_for_eval()

        state = env.reset(self.eval_rng)
        eval_return = 0.0

        while True:
            action = self.act(memory, state, epsilon=0.0, rng=self.eval_rng)
            result = env.step(action, self.eval_rng)
            eval_return += result.reward
            state = result.next_state

            if result.done:
                break

        return EvalResult(eval_return, memory)

    def evaluate(
        self: Self,
        env: TabularEnv,
        episodes: int,
        memory: Optional[MemoryKind] = None,
    ) -> EvalResult:
        """Averages the returns of several evaluation episodes."""
        results = [self.run_eval_episode(env, memory) for _ in range(episodes)]

        return EvalResult(
            sum(result.eval_return for result in results) / episodes,
            results[0].memory_used,
        )
