from collections import deque
from typing import Deque, Dict, Tuple

from typing_extensions import Self

from twomem.memory import MemoryKind


class ScoreTracker:
    """Rolling training scores per memory.

    The score of a memory is the mean of its last `window` episode returns,
    or negative infinity while it has none.
    """

    def __init__(self: Self, window: int = 50) -> None:
        if window < 1:
            raise ValueError(f"Score window must be positive, got {window}.")

        self.window = window
        self._returns: Dict[MemoryKind, Deque[float]] = {
            kind: deque(maxlen=window) for kind in MemoryKind
        }
        self.counts: Dict[MemoryKind, int] = {kind: 0 for kind in MemoryKind}

    def record(self: Self, kind: MemoryKind, episode_return: float) -> None:
        self._returns[kind].append(float(episode_return))
        self.counts[kind] += 1

    def returns(self: Self, kind: MemoryKind) -> Tuple[float, ...]:
        return tuple(self._returns[kind])

    def score(self: Self, kind: MemoryKind) -> float:
        returns = self._returns[kind]

        if not returns:
            return float("-inf")

        return sum(returns) / len(returns)
