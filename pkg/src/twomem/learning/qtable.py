from typing import Sequence, Tuple

from typing_extensions import Self

import numpy as np

from twomem.debug import debug
from twomem.envs import ActionId, StateId, TabularEnv
from twomem.memory import Transition


class QTable:
    """Tabular state-action value function trained by 1-step Q-learning.

    Unvisited pairs read as 0. With `alpha_decay` enabled, the step size for a
    pair on its n-th update is `1 / (1/alpha + n - 1)`: it starts at `alpha`
    and decays harmonically.

    Attributes:
        values: Array of shape `(state_count, action_count)`.
        visits: Array counting updates per pair.
        alpha: Learning rate in `(0, 1]`.
        gamma: Discount in `(0, 1]`.
        alpha_decay: Boolean indicating whether or not step sizes decay with visits.
    """

    def __init__(
        self: Self,
        state_count: int,
        action_count: int,
        alpha: float = 0.1,
        gamma: float = 1.0,
        alpha_decay: bool = False,
    ) -> None:
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"Learning rate must lie in (0,1], got {alpha}.")
        if not 0.0 < gamma <= 1.0:
            raise ValueError(f"Discount must lie in (0,1], got {gamma}.")

        self.values = np.zeros((state_count, action_count))
        self.visits = np.zeros((state_count, action_count), dtype=np.int64)
        self.alpha = alpha
        self.gamma = gamma
        self.alpha_decay = alpha_decay

    def __getitem__(self: Self, pair: Tuple[StateId, ActionId]) -> float:
        state, action = pair
        return float(self.values[state.index, action])

    def step_size(self: Self, state: StateId, action: ActionId) -> float:
        if not self.alpha_decay:
            return self.alpha

        # visits already include the pending update
        return 1.0 / (1.0 / self.alpha + self.visits[state.index, action] - 1)

    def td_update(self: Self, batch: Sequence[Transition]) -> float:
        """Applies the tabular Q-learning rule to each transition in order.

        Terminal transitions use the reward as target, all others bootstrap
        with `r + gamma * max_a' Q(s', a')`.

        Args:
            batch: Non-empty sequence of `Transition` instances.

        Returns:
            Mean absolute TD error (measured before each update).

        Raises:
            ValueError: Empty batch.
        """
        if not batch:
            raise ValueError("Cannot apply a TD update to an empty batch.")

        total_error = 0.0

        for t in batch:
            s, a = t.state.index, t.action

            if t.terminal:
                target = t.reward
            else:
                target = t.reward + self.gamma * float(
                    self.values[t.next_state.index].max()
                )

            error = target - float(self.values[s, a])

            self.visits[s, a] += 1
            self.values[s, a] += self.step_size(t.state, a) * error

            total_error += abs(error)

        if debug():
            assert np.isfinite(self.values).all()

        return total_error / len(batch)

    def greedy_action(self: Self, state: StateId) -> ActionId:
        """Returns the action with the highest value (lowest index on ties)."""
        # argmax returns the first maximum
        return int(np.argmax(self.values[state.index]))

    def q_sum(self: Self, env: TabularEnv) -> float:
        """Sums values over every state-action pair of the environment."""
        return float(
            sum(
                self.values[state.index, action]
                for state, action in env.enumerate_state_actions()
            )
        )

    def snapshot(self: Self) -> str:
        """Returns a text dump of all nonzero entries (one `state action value` line each)."""  # noqa
        return "\n".join(
            f"{s}\t{a}\t{float(self.values[s, a])!r}"
            for s, a in zip(*np.nonzero(self.values))
        )
