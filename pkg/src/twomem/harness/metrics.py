import csv
from dataclasses import astuple, dataclass, fields
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Type, Union

from typing_extensions import Self

from twomem.memory import MemoryKind


class RecordKind(Enum):
    TRAIN = "train"
    EVAL = "eval"
    STATE = "state"

    def __str__(self: Self) -> str:
        return self._value_


@dataclass(frozen=True)
class MetricsRow:
    """One row of a run's metrics log.

    Train rows describe a finished training episode, eval rows the averaged
    greedy evaluation at a checkpoint, state rows the learners at a checkpoint.
    Columns that do not apply to a row kind are left empty.

    Attributes:
        global_step: Environment steps taken in training so far.
        checkpoint: Index of the latest checkpoint (0 before the first one).
        record_kind: `RecordKind` instance.
        episode_return: Undiscounted (mean) return of the episode(s).
        memory_used: `MemoryKind` that drove the episode(s).
        p_ec: Probability of choosing EC for a training episode.
        q_sum_rl: Sum of the Q-table over all state-action pairs.
        ec_table_size: Number of episodic memory entries.
        score_rl: Recent mean training return of RL episodes.
        score_ec: Recent mean training return of EC episodes.
        return_ec: Greedy return of the episodic memory alone (if tracked).
        return_rl: Greedy return of the Q-table alone (if tracked).
    """

    global_step: int
    checkpoint: int
    record_kind: RecordKind
    episode_return: Optional[float] = None
    memory_used: Optional[MemoryKind] = None
    p_ec: Optional[float] = None
    q_sum_rl: Optional[float] = None
    ec_table_size: Optional[int] = None
    score_rl: Optional[float] = None
    score_ec: Optional[float] = None
    return_ec: Optional[float] = None
    return_rl: Optional[float] = None

    def to_record(self: Self) -> Dict[str, str]:
        """Serializes the row into CSV cells (floats via `repr`, `None` as empty)."""
        record = {}

        for column, value in zip(COLUMNS, astuple(self)):
            if value is None:
                record[column] = ""
            elif isinstance(value, Enum):
                record[column] = str(value)
            elif isinstance(value, float):
                record[column] = repr(float(value))
            else:
                record[column] = str(int(value))

        return record

    @classmethod
    def from_record(cls: Type["MetricsRow"], record: Dict[str, str]) -> "MetricsRow":
        def parse(column: str, cast):
            cell = record[column]
            return None if cell == "" else cast(cell)

        return cls(
            global_step=int(record["global_step"]),
            checkpoint=int(record["checkpoint"]),
            record_kind=RecordKind(record["record_kind"]),
            episode_return=parse("episode_return", float),
            memory_used=parse("memory_used", MemoryKind),
            p_ec=parse("p_ec", float),
            q_sum_rl=parse("q_sum_rl", float),
            ec_table_size=parse("ec_table_size", int),
            score_rl=parse("score_rl", float),
            score_ec=parse("score_ec", float),
            return_ec=parse("return_ec", float),
            return_rl=parse("return_rl", float),
        )


COLUMNS = tuple(f.name for f in fields(MetricsRow))


class RunMetrics:
    """Append-only metrics log of a single run, stored as CSV."""

    def __init__(self: Self, rows: Optional[Iterable[MetricsRow]] = None) -> None:
        self.rows: List[MetricsRow] = []

        if rows is not None:
            for row in rows:
                self.append(row)

    def __len__(self: Self) -> int:
        return len(self.rows)

    def __eq__(self: Self, other: object) -> bool:
        return isinstance(other, RunMetrics) and self.rows == other.rows

    def append(self: Self, row: MetricsRow) -> None:
        """Appends a row.

        Raises:
            ValueError: Row would decrease the global step.
        """
        if self.rows and row.global_step < self.rows[-1].global_step:
            raise ValueError(
                f"Global step must not decrease ({self.rows[-1].global_step} -> {row.global_step})."  # noqa
            )

        self.rows.append(row)

    def of_kind(self: Self, kind: RecordKind) -> List[MetricsRow]:
        return [row for row in self.rows if row.record_kind == kind]

    def write(self: Self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)

        with open(path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=COLUMNS, lineterminator="\n")
            writer.writeheader()
            writer.writerows(row.to_record() for row in self.rows)

        return path

    @classmethod
    def read(cls: Type["RunMetrics"], path: Union[str, Path]) -> "RunMetrics":
        """Reads a metrics CSV.

        Raises:
            ValueError: Header does not match the metrics schema.
        """
        with open(path, "r", newline="") as f:
            reader = csv.DictReader(f)

            if tuple(reader.fieldnames or ()) != COLUMNS:
                raise ValueError(
                    f"'{path}' is not a metrics file (expected columns {', '.join(COLUMNS)})."  # noqa
                )

            return cls(MetricsRow.from_record(record) for record in reader)
