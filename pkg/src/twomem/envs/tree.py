from typing import List, Sequence

from typing_extensions import Self

from .env import ActionId, EnvSpec, Outcome, TabularEnv

# state indices (s1..s7)
S1, S2, S3, S4, S5, S6, S7 = range(7)
# action indices (a1, a2)
A1, A2 = range(2)


class MotivatingTree(TabularEnv):
    """Seven-state, two-action tree MDP.

    Episodic control prefers the risky branch below `s2` (best seen return 20)
    while the optimal policy takes the safe leaf (expected 10 against 5).

    ```
                  s1
            a1 /      \\ a2
             s2        s3
        a1 /   \\ a2     | a1, a2
         s4   s5 | s6   s7
        +10  -10   +20  -20
    ```

    The `a2` branch below `s2` ends in `s5` or `s6` with probability 0.5 each.
    Both actions in `s3` lead to `s7`. The discount is 1, so returns are plain
    sums.
    """

    def __init__(self: Self) -> None:
        super().__init__(
            EnvSpec(
                name="motivating_tree",
                state_count=7,
                action_count=2,
                max_episode_steps=10,
                discount_default=1.0,
            )
        )

    def start_index(self: Self) -> int:
        return S1

    def features(self: Self, index: int) -> Sequence[float]:
        # one-hot
        return [1.0 if i == index else 0.0 for i in range(7)]

    def transitions(self: Self, index: int, action: ActionId) -> List[Outcome]:
        if index == S1:
            return [(1.0, S2 if action == A1 else S3, 0.0, False)]
        elif index == S2:
            if action == A1:
                return [(1.0, S4, 10.0, True)]
            return [(0.5, S5, -10.0, True), (0.5, S6, 20.0, True)]
        elif index == S3:
            return [(1.0, S7, -20.0, True)]

        # leaves are absorbing
        return []
