from typing import Dict, List, Sequence, Tuple

from typing_extensions import Self

from .env import ActionId, EnvSpec, Outcome, TabularEnv

# action indices
UP, DOWN, LEFT, RIGHT = range(4)

MOVES = {
    UP: (-1, 0),
    DOWN: (1, 0),
    LEFT: (0, -1),
    RIGHT: (0, 1),
}


class WindyGrid(TabularEnv):
    """Windy gridworld with a stochastic wind column and a trap.

    ```
    .   .   .   .   .   .   .   .   .   .
    .   .   .   .   .   .   .   .   .   .
    .   .   .   .   .   .   .   .   .   .
    S   .   .   .   .   .   .   G   .   .
    .   .   .   .   .   .   X   .   .   .
    .   .   .   .   .   .   .   .   .   .
    .   .   .   .   .   .   .   .   .   .
                            ^
    ```

    Wind is applied according to the column the agent acts from: after the
    move is clipped to the grid, the agent is pushed up by one row with
    probability 0.8, by two rows with probability 0.1 and not at all with
    probability 0.1. Every step costs -1, entering the goal `G` yields 0 and
    entering the trap `X` yields -10; both end the episode.

    Args:
        rows: Number of grid rows. Defaults to 7.
        cols: Number of grid columns. Defaults to 10.
        start: Start cell. Defaults to `(3, 0)`.
        goal: Goal cell. Defaults to `(3, 7)`.
        trap: Trap cell. Defaults to `(4, 6)`.
        wind_col: Column index with wind. Defaults to 6.
        wind: Tuple of `(probability, push)` pairs. Probabilities must sum to 1.
        step_reward: Reward per non-terminal step. Defaults to -1.
        goal_reward: Reward for entering the goal. Defaults to 0.
        trap_reward: Reward for entering the trap. Defaults to -10.
        max_episode_steps: Episode cap. Defaults to 200.
    """

    def __init__(
        self: Self,
        rows: int = 7,
        cols: int = 10,
        start: Tuple[int, int] = (3, 0),
        goal: Tuple[int, int] = (3, 7),
        trap: Tuple[int, int] = (4, 6),
        wind_col: int = 6,
        wind: Tuple[Tuple[float, int], ...] = ((0.8, 1), (0.1, 2), (0.1, 0)),
        step_reward: float = -1.0,
        goal_reward: float = 0.0,
        trap_reward: float = -10.0,
        max_episode_steps: int = 200,
    ) -> None:
        self.rows = rows
        self.cols = cols
        self.start = tuple(start)
        self.goal = tuple(goal)
        self.trap = tuple(trap)
        self.wind_col = wind_col
        self.wind = tuple((float(p), int(push)) for p, push in wind)
        self.step_reward = step_reward
        self.goal_reward = goal_reward
        self.trap_reward = trap_reward

        for cell in (self.start, self.goal, self.trap):
            if not self._in_bounds(cell):
                raise ValueError(f"Cell {cell} lies outside of the {rows}x{cols} grid.")
        if abs(sum(p for p, _ in self.wind) - 1.0) > 1e-9:
            raise ValueError("Wind probabilities must sum to 1.")

        super().__init__(
            EnvSpec(
                name="windy_grid",
                state_count=rows * cols,
                action_count=len(MOVES),
                max_episode_steps=max_episode_steps,
                discount_default=1.0,
            )
        )

    def __str__(self: Self) -> str:
        current = self.cell(self._state.index) if self._state is not None else None
        lines = []

        for row in range(self.rows):
            symbols = []
            for col in range(self.cols):
                if (row, col) == current:
                    symbols.append("A")
                elif (row, col) == self.goal:
                    symbols.append("G")
                elif (row, col) == self.trap:
                    symbols.append("X")
                elif (row, col) == self.start:
                    symbols.append("S")
                else:
                    symbols.append(".")
            lines.append(" ".join(symbols))
        lines.append(
            " ".join("^" if col == self.wind_col else " " for col in range(self.cols))
        )

        return "\n".join(lines)

    def _in_bounds(self: Self, cell: Tuple[int, int]) -> bool:
        return 0 <= cell[0] < self.rows and 0 <= cell[1] < self.cols

    def cell(self: Self, index: int) -> Tuple[int, int]:
        return divmod(index, self.cols)

    def index(self: Self, cell: Tuple[int, int]) -> int:
        return cell[0] * self.cols + cell[1]

    def start_index(self: Self) -> int:
        return self.index(self.start)

    def features(self: Self, index: int) -> Sequence[float]:
        row, col = self.cell(index)
        # normalized (row, col)
        return (row / max(self.rows - 1, 1), col / max(self.cols - 1, 1))

    def transitions(self: Self, index: int, action: ActionId) -> List[Outcome]:
        cell = self.cell(index)

        if cell == self.goal or cell == self.trap:
            return []

        d_row, d_col = MOVES[action]
        # move (clipped at borders)
        row = min(max(cell[0] + d_row, 0), self.rows - 1)
        col = min(max(cell[1] + d_col, 0), self.cols - 1)

        pushes = self.wind if cell[1] == self.wind_col else ((1.0, 0),)

        # merge pushes that end in the same cell (e.g. at the top border)
        merged: Dict[int, float] = {}
        for prob, push in pushes:
            target = self.index((max(row - push, 0), col))
            merged[target] = merged.get(target, 0.0) + prob

        outcomes = []
        for target, prob in merged.items():
            target_cell = self.cell(target)

            if target_cell == self.goal:
                outcomes.append((prob, target, self.goal_reward, True))
            elif target_cell == self.trap:
                outcomes.append((prob, target, self.trap_reward, True))
            else:
                outcomes.append((prob, target, self.step_reward, False))

        return outcomes
