from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Type, Union

from typing_extensions import Self

from .env import ActionId, EnvSpec, Outcome, TabularEnv

# tolerance for per-pair probability sums
PROB_TOLERANCE = 1e-9

DIRECTIVES = ("states", "actions", "start", "horizon", "discount", "name")


class TransitionTableError(ValueError):
    """Error representing a malformed or inconsistent transition table."""

    def __init__(self: Self, message: str, line: Optional[int] = None) -> None:
        """Initializes the transition table error instance.

        Args:
            message: String describing the problem.
            line: Optional line number (1-based) the problem was found on.
        """
        if line is not None:
            message = f"Line {line}: {message}"
        super().__init__(message)


class GenericTabularMDP(TabularEnv):
    """Tabular MDP given by an explicit transition table.

    The text format consists of directive lines and transition rows. Blank
    lines and everything after `#` are ignored.

    ```
    states 3
    actions 2
    start 0
    horizon 50      # optional, defaults to 100
    discount 0.9    # optional, defaults to 1
    # state action next_state probability reward terminal
    0 0 1 1.0 0.0 0
    0 1 2 0.5 1.0 1
    0 1 0 0.5 0.0 0
    ...
    ```

    A row with terminal flag `1` ends the episode when sampled. The start state
    and every state reached by a non-terminal row must define rows for every
    action, and the probabilities of every defined pair must sum to 1.
    """

    def __init__(
        self: Self,
        state_count: int,
        action_count: int,
        table: Dict[Tuple[int, ActionId], List[Outcome]],
        start: int = 0,
        max_episode_steps: int = 100,
        discount: float = 1.0,
        name: str = "tabular",
    ) -> None:
        """Initializes the MDP instance.

        Args:
            state_count: Number of states.
            action_count: Number of actions.
            table: Dictionary mapping `(state, action)` pairs to lists of
                `(probability, next_state, reward, terminal)` outcomes.
            start: Index of the start state. Defaults to 0.
            max_episode_steps: Episode cap. Defaults to 100.
            discount: Default discount. Defaults to 1.
            name: Environment name. Defaults to 'tabular'.

        Raises:
            TransitionTableError: Inconsistent table.
        """
        self.table = {key: list(outcomes) for key, outcomes in table.items()}
        self._start = start

        spec = EnvSpec(
            name=name,
            state_count=state_count,
            action_count=action_count,
            max_episode_steps=max_episode_steps,
            discount_default=discount,
        )
        self._validate(spec)

        super().__init__(spec)

    def _validate(self: Self, spec: EnvSpec) -> None:
        if not 0 <= self._start < spec.state_count:
            raise TransitionTableError(f"Start state {self._start} out of range.")

        for (state, action), outcomes in self.table.items():
            if not 0 <= state < spec.state_count:
                raise TransitionTableError(f"State {state} out of range.")
            if not 0 <= action < spec.action_count:
                raise TransitionTableError(f"Action {action} out of range.")

            for prob, next_state, _, _ in outcomes:
                if not 0 <= next_state < spec.state_count:
                    raise TransitionTableError(f"State {next_state} out of range.")
                if prob < 0.0:
                    raise TransitionTableError(
                        f"Negative probability for pair ({state}, {action})."
                    )

            total = sum(prob for prob, *_ in outcomes)
            if abs(total - 1.0) > PROB_TOLERANCE:
                raise TransitionTableError(
                    f"Probabilities for pair ({state}, {action}) sum to {total}, expected 1."  # noqa
                )

        # states that an episode can continue from
        live = {self._start} | {
            next_state
            for outcomes in self.table.values()
            for _, next_state, _, terminal in outcomes
            if not terminal
        }

        for state in sorted(live):
            for action in range(spec.action_count):
                if (state, action) not in self.table:
                    raise TransitionTableError(
                        f"Missing transitions for reachable pair ({state}, {action})."
                    )

    @classmethod
    def from_string(
        cls: Type["GenericTabularMDP"], text: str
    ) -> "GenericTabularMDP":
        """Parses an MDP from its transition-table text.

        Args:
            text: String in the transition-table format.

        Returns:
            `GenericTabularMDP` instance.

        Raises:
            TransitionTableError: Malformed text or inconsistent table.
        """
        return cls(**parse_transition_table(text.splitlines()))

    @classmethod
    def from_file(
        cls: Type["GenericTabularMDP"], path: Union[str, Path]
    ) -> "GenericTabularMDP":
        with open(path, "r") as f:
            return cls.from_string(f.read())

    def to_string(self: Self) -> str:
        lines = [
            f"name {self.spec.name}",
            f"states {self.spec.state_count}",
            f"actions {self.spec.action_count}",
            f"start {self._start}",
            f"horizon {self.spec.max_episode_steps}",
            f"discount {self.spec.discount_default!r}",
        ]
        for (state, action), outcomes in sorted(self.table.items()):
            for prob, next_state, reward, terminal in outcomes:
                lines.append(
                    f"{state} {action} {next_state} {prob!r} {reward!r} {int(terminal)}"
                )

        return "\n".join(lines) + "\n"

    def start_index(self: Self) -> int:
        return self._start

    def features(self: Self, index: int) -> Sequence[float]:
        # one-hot
        return [1.0 if i == index else 0.0 for i in range(self.spec.state_count)]

    def transitions(self: Self, index: int, action: ActionId) -> List[Outcome]:
        return self.table.get((index, action), [])


def parse_transition_table(lines: Iterable[str]) -> Dict:
    """Parses transition-table lines into `GenericTabularMDP` keyword arguments.

    Args:
        lines: Iterable over strings (one per line).

    Returns:
        Dictionary of keyword arguments for `GenericTabularMDP`.

    Raises:
        TransitionTableError: Malformed line or missing directive.
    """
    directives = {}
    table = defaultdict(list)

    for line_no, line in enumerate(lines, start=1):
        # strip comments
        tokens = line.split("#", 1)[0].split()

        if not tokens:
            continue

        if tokens[0] in DIRECTIVES:
            if len(tokens) != 2:
                raise TransitionTableError(
                    f"Directive '{tokens[0]}' expects exactly one value.", line_no
                )
            if tokens[0] in directives:
                raise TransitionTableError(
                    f"Duplicate directive '{tokens[0]}'.", line_no
                )
            directives[tokens[0]] = tokens[1]
            continue

        if len(tokens) != 6:
            raise TransitionTableError(
                f"Expected 6 columns (state action next_state probability reward terminal), got {len(tokens)}.",  # noqa
                line_no,
            )

        try:
            state, action, next_state = (int(token) for token in tokens[:3])
            prob, reward = float(tokens[3]), float(tokens[4])
        except ValueError:
            raise TransitionTableError(f"Cannot parse row '{line.strip()}'.", line_no)

        if tokens[5] not in ("0", "1"):
            raise TransitionTableError("Terminal flag must be 0 or 1.", line_no)

        table[(state, action)].append((prob, next_state, reward, tokens[5] == "1"))

    for required in ("states", "actions"):
        if required not in directives:
            raise TransitionTableError(f"Missing directive '{required}'.")

    try:
        kwargs = dict(
            state_count=int(directives["states"]),
            action_count=int(directives["actions"]),
            table=dict(table),
            start=int(directives.get("start", 0)),
            max_episode_steps=int(directives.get("horizon", 100)),
            discount=float(directives.get("discount", 1.0)),
        )
    except ValueError as e:
        raise TransitionTableError(f"Invalid directive value ({e}).")

    if "name" in directives:
        kwargs["name"] = directives["name"]

    return kwargs
