from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Deque, Dict, Iterator, List, Optional

from typing_extensions import Self

import numpy as np

from twomem.debug import debug
from twomem.envs import ActionId, StateId


class MemoryKind(Enum):
    """The two memories of the agent."""

    EC = "EC"
    RL = "RL"

    def __str__(self: Self) -> str:
        """String representation of the memory kind.

        Returns:
            String representing the memory kind.
        """
        return self._value_


@dataclass(frozen=True)
class Transition:
    """One environment step, tagged with the memory that chose the action.

    `terminal` only marks absorbing next states; an episode cut off by the
    step limit still bootstraps.
    """

    state: StateId
    action: ActionId
    reward: float
    next_state: StateId
    terminal: bool
    source: MemoryKind


class ReplayBuffer:
    """Bounded FIFO experience replay buffer with uniform sampling.

    Transitions are kept in a ring. Absolute push positions are additionally
    indexed per source memory, so source-filtered sampling does not need to
    scan the buffer.

    Attributes:
        capacity: Maximum number of stored transitions.
    """

    def __init__(self: Self, capacity: int = 100_000) -> None:
        if capacity < 1:
            raise ValueError(f"Replay capacity must be positive, got {capacity}.")

        self.capacity = capacity
        self._storage: List[Transition] = []
        # total number of pushes so far
        self._pushes = 0
        # absolute push positions per source, oldest first
        self._positions: Dict[MemoryKind, Deque[int]] = {
            kind: deque() for kind in MemoryKind
        }

    def __len__(self: Self) -> int:
        return len(self._storage)

    def __iter__(self: Self) -> Iterator[Transition]:
        """Iterates over stored transitions from oldest to newest."""
        for pos in range(self._pushes - len(self._storage), self._pushes):
            yield self._storage[pos % self.capacity]

    def count(self: Self, source: Optional[MemoryKind] = None) -> int:
        if source is None:
            return len(self._storage)
        return len(self._positions[source])

    def push(self: Self, transition: Transition) -> bool:
        """Appends a transition, overwriting the oldest one when full.

        Args:
            transition: `Transition` instance.

        Returns:
            Boolean indicating whether or not a transition was evicted.
        """
        evicted = False

        if len(self._storage) < self.capacity:
            self._storage.append(transition)
        else:
            slot = self._pushes % self.capacity
            # the overwritten transition is the oldest of its source as well
            self._positions[self._storage[slot].source].popleft()
            self._storage[slot] = transition
            evicted = True

        self._positions[transition.source].append(self._pushes)
        self._pushes += 1

        if debug():
            assert len(self._storage) <= self.capacity
            assert sum(len(p) for p in self._positions.values()) == len(self._storage)

        return evicted

    def sample_uniform(
        self: Self,
        n: int,
        rng: np.random.Generator,
        source_filter: Optional[MemoryKind] = None,
    ) -> List[Transition]:
        """Samples transitions uniformly with replacement.

        Args:
            n: Number of transitions to draw.
            rng: `numpy.random.Generator` instance.
            source_filter: Optional `MemoryKind`. If specified, only transitions
                collected by that memory are eligible.

        Returns:
            List of `n` transitions, or an empty list if no transition is
            eligible.
        """
        if source_filter is None:
            if not self._storage:
                return []
            return [self._storage[i] for i in rng.integers(len(self._storage), size=n)]

        positions = self._positions[source_filter]

        if not positions:
            return []

        return [
            self._storage[positions[int(i)] % self.capacity]
            for i in rng.integers(len(positions), size=n)
        ]
