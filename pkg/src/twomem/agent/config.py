from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from typing_extensions import Self

from twomem.learning import Schedule
from twomem.memory import FeatureKind


class AgentMode(Enum):
    """Operating modes of the agent."""

    TWO_MEMORY = "two_memory"
    PURE_EC = "pure_ec"
    PURE_RL = "pure_rl"

    def __str__(self: Self) -> str:
        return self._value_


@dataclass(frozen=True)
class AgentConfig:
    """Configuration of a `TwoMemoryAgent`.

    Attributes:
        mode: `AgentMode` instance. Defaults to two-memory.
        epsilon: Exploration rate in `[0, 1]`, shared by both memories.
        train_every: Environment steps between TD updates.
        batch_size: Minibatch size of TD updates.
        schedule: `Schedule` instance for the episode-level EC probability.
        data_sharing: Boolean indicating whether or not each memory learns
            from episodes collected by the other.
        seed: Seed for all random streams of the agent.
        alpha: Q-learning rate in `(0, 1]`.
        gamma: Optional discount. Defaults to the environment's default.
        alpha_decay: Boolean indicating whether or not step sizes decay with visits.
        k: Neighbors for episodic estimates.
        ec_capacity: Episodic memory capacity.
        replay_capacity: Replay buffer capacity.
        features: `FeatureKind` used to key episodic memory.
        projection_dim: Target dimension for random projections.
        score_window: Number of recent returns per memory in the score.
    """

    mode: AgentMode = AgentMode.TWO_MEMORY
    epsilon: float = 0.1
    train_every: int = 10
    batch_size: int = 32
    schedule: Schedule = field(default_factory=Schedule)
    data_sharing: bool = True
    seed: int = 0
    alpha: float = 0.1
    gamma: Optional[float] = None
    alpha_decay: bool = False
    k: int = 3
    ec_capacity: int = 100_000
    replay_capacity: int = 100_000
    features: FeatureKind = FeatureKind.IDENTITY
    projection_dim: int = 4
    score_window: int = 50

    def __post_init__(self: Self) -> None:
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"'epsilon' must lie in [0,1], got {self.epsilon}.")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"'alpha' must lie in (0,1], got {self.alpha}.")
        if self.gamma is not None and not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"'gamma' must lie in (0,1], got {self.gamma}.")

        for name in (
            "train_every",
            "batch_size",
            "k",
            "ec_capacity",
            "replay_capacity",
            "projection_dim",
            "score_window",
        ):
            if getattr(self, name) < 1:
                raise ValueError(
                    f"'{name}' must be positive, got {getattr(self, name)}."
                )
