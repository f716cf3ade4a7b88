from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from typing_extensions import Self

import numpy as np

from twomem.debug import debug
from twomem.envs import ActionId, StateId

from .features import FeatureExtractor
from .replay import Transition

# state key in feature space
Key = Tuple[float, ...]


class EmptyEpisodeError(ValueError):
    """Error raised when an episode update receives no transitions."""


class MissingEstimateError(LookupError):
    """Error raised when no entry exists for an action anywhere in memory."""

    def __init__(self: Self, action: ActionId) -> None:
        super().__init__(f"Episodic memory holds no entries for action {action}.")


@dataclass
class ECEntry:
    """Entry of the episodic memory table.

    Attributes:
        best_return: Highest discounted return observed after the pair.
        last_update_tick: Global update counter at the last write.
        seq: Insertion sequence number (breaks eviction ties).
    """

    best_return: float
    last_update_tick: int
    seq: int


def discounted_returns(rewards: Sequence[float], discount: float) -> List[float]:
    """Computes `G_t = sum_k discount^(k-t) r_k` for every step in one backward pass."""
    returns = [0.0] * len(rewards)
    g = 0.0

    for t in range(len(rewards) - 1, -1, -1):
        g = rewards[t] + discount * g
        returns[t] = g

    return returns


class ECMemory:
    """Episodic control memory.

    Maps `(state key, action)` pairs to the best return observed after them.
    Missing pairs are estimated by averaging the `k` nearest stored states
    (Euclidean distance in feature space) that hold an entry for the action.
    When over capacity, the least recently updated entry is dropped.

    Attributes:
        action_count: Number of actions.
        capacity: Maximum number of entries.
        k: Number of neighbors for estimates.
        tick: Global update counter (advanced once per episode update).
        extractor: `FeatureExtractor` instance deriving keys from state features.
    """

    def __init__(
        self: Self,
        action_count: int,
        capacity: int = 100_000,
        k: int = 3,
        extractor: Optional[FeatureExtractor] = None,
    ) -> None:
        if action_count < 1:
            raise ValueError(f"Action count must be positive, got {action_count}.")
        if capacity < 1:
            raise ValueError(f"Memory capacity must be positive, got {capacity}.")
        if k < 1:
            raise ValueError(f"Neighbor count must be positive, got {k}.")

        self.action_count = action_count
        self.capacity = capacity
        self.k = k
        self.tick = 0
        self.extractor = extractor if extractor is not None else FeatureExtractor()

        self._table: Dict[Tuple[Key, ActionId], ECEntry] = {}
        self._seq = 0
        # feature index: key -> (feature vector, number of actions stored)
        self._features: Dict[Key, Tuple[np.ndarray, int]] = {}
        # keys holding an entry per action (insertion ordered)
        self._keys_by_action: List[Dict[Key, None]] = [
            dict() for _ in range(action_count)
        ]
        # lazily built neighbor arrays per action
        self._neighbor_cache: List[Optional[Tuple[List[Key], np.ndarray]]] = [
            None
        ] * action_count

    def __len__(self: Self) -> int:
        return len(self._table)

    def __contains__(self: Self, item: Tuple[StateId, ActionId]) -> bool:
        state, action = item
        return (self.key(state), action) in self._table

    def key(self: Self, state: StateId) -> Key:
        return self.extractor.key(state.features)

    def entry(self: Self, state: StateId, action: ActionId) -> Optional[ECEntry]:
        return self._table.get((self.key(state), action))

    def _insert(
        self: Self, key: Key, features: np.ndarray, action: ActionId, value: float
    ) -> None:
        self._table[(key, action)] = ECEntry(value, self.tick, self._seq)
        self._seq += 1

        vector, count = self._features.get(key, (features, 0))
        self._features[key] = (vector, count + 1)

        self._keys_by_action[action][key] = None
        self._neighbor_cache[action] = None

    def _remove(self: Self, key: Key, action: ActionId) -> None:
        del self._table[(key, action)]

        vector, count = self._features[key]
        if count == 1:
            del self._features[key]
        else:
            self._features[key] = (vector, count - 1)

        del self._keys_by_action[action][key]
        self._neighbor_cache[action] = None

    def _check(self: Self) -> None:
        assert len(self._table) <= self.capacity
        assert all(key in self._features for key, _ in self._table)
        assert sum(count for _, count in self._features.values()) == len(self._table)

    def update_from_episode(
        self: Self, trajectory: Sequence[Transition], discount: float
    ) -> int:
        """Writes the returns of a finished episode into memory.

        Returns are computed backwards in one pass. Pairs visited several times
        count with their best return of the episode. Present pairs are touched
        first (current tick, maximum of stored and new return), then absent
        pairs are inserted, so an insertion never evicts a pair the same
        episode visits.

        Args:
            trajectory: Sequence of `Transition` instances of one episode, in order.
            discount: Discount in `(0, 1]`.

        Returns:
            Number of entries inserted or whose stored value increased.

        Raises:
            EmptyEpisodeError: Empty trajectory.
            ValueError: Discount out of range.
        """
        if not trajectory:
            raise EmptyEpisodeError(
                "Cannot update episodic memory from an empty episode."
            )
        if not 0.0 < discount <= 1.0:
            raise ValueError(f"Discount must lie in (0,1], got {discount}.")

        self.tick += 1
        changed = 0

        returns = discounted_returns([t.reward for t in trajectory], discount)

        # best return per pair, in order of first visit
        best: Dict[Tuple[Key, ActionId], Tuple[float, StateId]] = {}

        for transition, g in zip(trajectory, returns):
            pair = (self.key(transition.state), transition.action)

            if pair not in best or g > best[pair][0]:
                best[pair] = (g, transition.state)

        inserts = []

        for pair, (g, state) in best.items():
            entry = self._table.get(pair)

            if entry is None:
                inserts.append((pair, g, state))
                continue

            entry.last_update_tick = self.tick

            if g > entry.best_return:
                entry.best_return = g
                changed += 1

        for (key, action), g, state in inserts:
            self._insert(key, self.extractor(state.features), action, g)
            changed += 1
            self.evict_if_full()

        if debug():
            self._check()

        return changed

    def evict_if_full(self: Self) -> Optional[Tuple[Key, ActionId]]:
        """Drops the least recently updated entry if the table exceeds capacity.

        Ties in the update tick are broken by insertion order (earliest first).

        Returns:
            Key of the evicted `(state key, action)` pair, or `None`.
        """
        if len(self._table) <= self.capacity:
            return None

        victim = min(
            self._table,
            key=lambda pair: (
                self._table[pair].last_update_tick,
                self._table[pair].seq,
            ),
        )
        self._remove(*victim)

        return victim

    def _neighbors(self: Self, action: ActionId) -> Tuple[List[Key], np.ndarray]:
        if self._neighbor_cache[action] is None:
            keys = list(self._keys_by_action[action])
            vectors = (
                np.stack([self._features[key][0] for key in keys])
                if keys
                else np.empty((0, 0))
            )
            self._neighbor_cache[action] = (keys, vectors)

        return self._neighbor_cache[action]

    def estimate_q(self: Self, state: StateId, action: ActionId) -> float:
        """Estimates the episodic value of a state-action pair.

        Args:
            state: `StateId` instance.
            action: Integer action index.

        Returns:
            Stored best return if the pair is present, otherwise the mean best
            return over the (up to) `k` nearest stored states for the action.

        Raises:
            MissingEstimateError: No entry exists for the action.
        """
        key = self.key(state)
        entry = self._table.get((key, action))

        # exact hit
        if entry is not None:
            return entry.best_return

        keys, vectors = self._neighbors(action)

        if not keys:
            raise MissingEstimateError(action)

        distances = np.linalg.norm(vectors - self.extractor(state.features), axis=1)
        # stable sort keeps insertion order among equidistant neighbors
        nearest = np.argsort(distances, kind="stable")[: self.k]

        return float(
            np.mean([self._table[(keys[i], action)].best_return for i in nearest])
        )

    def select_action(self: Self, state: StateId, rng: np.random.Generator) -> ActionId:
        """Selects the action with the highest episodic estimate.

        Actions without any estimate lose against every estimated action.
        Ties go to the lowest action index.

        Args:
            state: `StateId` instance.
            rng: `numpy.random.Generator` used when no action has an estimate.

        Returns:
            Integer action index.
        """
        best_action, best_value = None, None

        for action in range(self.action_count):
            try:
                value = self.estimate_q(state, action)
            except MissingEstimateError:
                continue

            if best_value is None or value > best_value:
                best_action, best_value = action, value

        if best_action is None:
            # memory empty for every action
            return int(rng.integers(self.action_count))

        return best_action

    def snapshot(self: Self) -> str:
        """Returns a text dump of the table (one `key action best_return tick` line per entry)."""  # noqa
        lines = [
            f"{' '.join(repr(x) for x in key)}\t{action}\t{entry.best_return!r}\t{entry.last_update_tick}"  # noqa
            for (key, action), entry in sorted(self._table.items())
        ]

        return "\n".join(lines)
