from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from typing_extensions import Self

import numpy as np

# actions are plain indices in [0, action_count)
ActionId = int

# (probability, next state index, reward, terminal)
Outcome = Tuple[float, int, float, bool]


class EnvironmentContractError(RuntimeError):
    """Error raised when an environment is driven outside of its contract."""


@dataclass(frozen=True)
class StateId:
    """State of a tabular environment.

    Attributes:
        index: Integer in `[0, state_count)` identifying the state.
        features: Tuple of floats embedding the state (used for kNN lookups).
    """

    index: int
    features: Tuple[float, ...]

    def __str__(self: Self) -> str:
        return f"s{self.index}"


@dataclass(frozen=True)
class StepResult:
    """Result of a single environment step.

    Attributes:
        next_state: `StateId` instance reached by the step.
        reward: Reward received for the step.
        terminal: Boolean indicating whether the episode ended, either in an
            absorbing state or at the step limit.
        truncated: Boolean indicating whether the episode ended at the step
            limit without reaching an absorbing state (implies `terminal`).
    """

    next_state: StateId
    reward: float
    terminal: bool
    truncated: bool = False

    @property
    def done(self: Self) -> bool:
        return self.terminal or self.truncated


@dataclass(frozen=True)
class EnvSpec:
    name: str
    state_count: int
    action_count: int
    max_episode_steps: int
    discount_default: float

    def __post_init__(self: Self) -> None:
        if self.state_count < 1 or self.action_count < 1:
            raise ValueError(
                f"Environment '{self.name}' needs at least one state and one action."
            )
        if self.max_episode_steps < 1:
            raise ValueError(
                f"Environment '{self.name}' needs 'max_episode_steps' >= 1, got {self.max_episode_steps}."  # noqa
            )
        if not 0.0 < self.discount_default <= 1.0:
            raise ValueError(
                f"Environment '{self.name}' needs a discount in (0,1], got {self.discount_default}."  # noqa
            )


class TabularEnv(ABC):
    """Episodic MDP with finitely many states and a uniform action set.

    Subclasses describe their dynamics through `transitions`; sampling, step
    counting and the episode contract live here.

    Attributes:
        spec: `EnvSpec` instance describing the environment.
    """

    def __init__(self: Self, spec: EnvSpec) -> None:
        self.spec = spec
        self._states = tuple(
            StateId(index, tuple(float(x) for x in self.features(index)))
            for index in range(spec.state_count)
        )
        self._state: Optional[StateId] = None
        self._steps = 0
        self._done = True

    @abstractmethod
    def start_index(self: Self) -> int:  # pragma: no cover
        pass

    @abstractmethod
    def features(self: Self, index: int) -> Sequence[float]:  # pragma: no cover
        pass

    @abstractmethod
    def transitions(
        self: Self, index: int, action: ActionId
    ) -> List[Outcome]:  # pragma: no cover
        """Returns the transition law for a state-action pair.

        States that can only be entered terminally have no dynamics and
        return an empty list.
        """
        pass

    @property
    def states(self: Self) -> Tuple[StateId, ...]:
        return self._states

    @property
    def steps(self: Self) -> int:
        return self._steps

    @property
    def done(self: Self) -> bool:
        return self._done

    def state(self: Self, index: int) -> StateId:
        return self._states[index]

    def reset(self: Self, rng: Optional[np.random.Generator] = None) -> StateId:
        """Starts a new episode.

        Args:
            rng: Optional random generator (unused by the environments shipped
                here, which all have a fixed start state).

        Returns:
            `StateId` instance of the initial state.
        """
        self._state = self._states[self.start_index()]
        self._steps = 0
        self._done = False

        return self._state

    def step(self: Self, action: ActionId, rng: np.random.Generator) -> StepResult:
        """Advances the episode by one step.

        Args:
            action: Integer index of the action to take.
            rng: `numpy.random.Generator` used to sample stochastic transitions.

        Returns:
            `StepResult` instance.

        Raises:
            EnvironmentContractError: Episode already finished (or never
                started), or the action index is out of range.
        """
        if self._done or self._state is None:
            raise EnvironmentContractError(
                f"Cannot step environment '{self.spec.name}': episode is finished, call 'reset' first."  # noqa
            )
        if not 0 <= action < self.spec.action_count:
            raise EnvironmentContractError(
                f"Invalid action {action} for environment '{self.spec.name}' with {self.spec.action_count} actions."  # noqa
            )

        outcomes = self.transitions(self._state.index, action)

        if not outcomes:
            raise EnvironmentContractError(
                f"State {self._state} of environment '{self.spec.name}' has no dynamics."  # noqa
            )

        if len(outcomes) == 1:
            _, next_index, reward, terminal = outcomes[0]
        else:
            # single uniform draw against the cumulative law
            u = rng.random()
            cumulative = 0.0

            for prob, next_index, reward, terminal in outcomes:
                cumulative += prob
                if u < cumulative:
                    break

        self._steps += 1
        self._state = self._states[next_index]

        truncated = not terminal and self._steps >= self.spec.max_episode_steps
        self._done = terminal or truncated

        return StepResult(self._state, float(reward), self._done, truncated)

    def enumerate_state_actions(self: Self) -> List[Tuple[StateId, ActionId]]:
        """Returns every state-action pair once, ordered by state then action."""
        return [
            (state, action)
            for state in self._states
            for action in range(self.spec.action_count)
        ]
