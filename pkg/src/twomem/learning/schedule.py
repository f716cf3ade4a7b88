import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Tuple

from typing_extensions import Self


class ScheduleKind(Enum):
    DECAYED = "decayed"
    CONSTANT = "constant"
    INCREASED = "increased"

    def __str__(self: Self) -> str:
        return self._value_


# (p_start, p_end) of the three switching settings
SCHEDULE_SETTINGS: Dict[ScheduleKind, Tuple[float, float]] = {
    ScheduleKind.DECAYED: (0.9, 0.1),
    ScheduleKind.CONSTANT: (0.1, 0.1),
    ScheduleKind.INCREASED: (0.1, 0.9),
}


@dataclass(frozen=True)
class Schedule:
    """Exponential schedule for the probability of driving an episode with EC.

    `p_ec(i) = p_end + (p_start - p_end) * exp(-i / temperature)`, where `i`
    is the number of environment steps taken so far.

    Attributes:
        p_start: Probability at step 0.
        p_end: Limit probability.
        temperature: Positive decay temperature (in steps).
    """

    p_start: float = 0.9
    p_end: float = 0.1
    temperature: float = 10_000.0

    def __post_init__(self: Self) -> None:
        for name in ("p_start", "p_end"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"'{name}' must lie in [0,1], got {value}.")
        if not self.temperature > 0.0:
            raise ValueError(f"'temperature' must be positive, got {self.temperature}.")

    @property
    def kind(self: Self) -> ScheduleKind:
        if self.p_start > self.p_end:
            return ScheduleKind.DECAYED
        elif self.p_start < self.p_end:
            return ScheduleKind.INCREASED
        return ScheduleKind.CONSTANT

    def p_ec(self: Self, steps_taken: int) -> float:
        """Evaluates the schedule.

        Args:
            steps_taken: Non-negative number of environment steps taken.

        Returns:
            Probability in `[min(p_start, p_end), max(p_start, p_end)]`.

        Raises:
            ValueError: Negative step count.
        """
        if steps_taken < 0:
            raise ValueError(f"Step count must be non-negative, got {steps_taken}.")

        weight = math.exp(-steps_taken / self.temperature)
        # convex form: exactly p_start at step 0
        p = weight * self.p_start + (1.0 - weight) * self.p_end

        return min(max(p, min(self.p_start, self.p_end)), max(self.p_start, self.p_end))
