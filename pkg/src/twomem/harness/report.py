import csv
import logging
import re
from collections import defaultdict
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Type, Union

from typing_extensions import Self

import numpy as np

from twomem.memory import MemoryKind

from .metrics import MetricsRow, RecordKind, RunMetrics

logger = logging.getLogger(__name__)

# run files are named '<label>_seed<seed>.csv'
RUN_NAME = re.compile(r"^(.*)_seed(-?\d+)$")

# memory-choice band colors
MEMORY_COLORS = {MemoryKind.EC: "tab:orange", MemoryKind.RL: "tab:grey"}


class ReportError(ValueError):
    """Error representing metrics files that cannot be aggregated."""


@dataclass(frozen=True)
class CheckpointAggregate:
    """Across-seed aggregate of one label at one checkpoint.

    Attributes:
        label: Experiment label.
        checkpoint: Checkpoint index (starting at 1).
        step: Mean global step at which the checkpoint was taken.
        eval_mean: Mean evaluation return.
        eval_std: Population standard deviation of the evaluation return.
        q_sum_mean: Mean Q-table sum.
        q_sum_std: Population standard deviation of the Q-table sum.
        ec_fraction: Fraction of runs evaluated with the episodic memory.
        n: Number of runs.
    """

    label: str
    checkpoint: int
    step: float
    eval_mean: float
    eval_std: float
    q_sum_mean: float
    q_sum_std: float
    ec_fraction: float
    n: int


SUMMARY_COLUMNS = tuple(f.name for f in fields(CheckpointAggregate))


@dataclass(frozen=True)
class RunRecord:
    """Metrics of one run together with where they came from."""

    path: Path
    label: str
    seed: Optional[int]
    metrics: RunMetrics

    @property
    def checkpoints(self: Self) -> Tuple[int, ...]:
        return tuple(row.checkpoint for row in self.metrics.of_kind(RecordKind.EVAL))


def parse_run_name(path: Union[str, Path]) -> Tuple[str, Optional[int]]:
    """Splits a run file name into label and seed (`None` if the name carries no seed)."""  # noqa
    stem = Path(path).stem
    match = RUN_NAME.match(stem)

    if match is None:
        return stem, None

    return match.group(1), int(match.group(2))


def load_runs(paths: Sequence[Union[str, Path]]) -> List[RunRecord]:
    """Reads metrics files and checks that they share one checkpoint grid.

    Raises:
        ReportError: No files, unreadable files or mismatched checkpoint grids.
    """
    if not paths:
        raise ReportError("No metrics files given.")

    runs = []

    for path in paths:
        path = Path(path)
        label, seed = parse_run_name(path)

        try:
            metrics = RunMetrics.read(path)
        except (OSError, ValueError, KeyError) as e:
            raise ReportError(f"Cannot read metrics file '{path}': {e}") from e

        runs.append(RunRecord(path, label, seed, metrics))

    grid = runs[0].checkpoints
    offending = [str(run.path) for run in runs if run.checkpoints != grid]

    if offending:
        raise ReportError(
            f"Checkpoint grids differ from '{runs[0].path}' ({len(grid)} checkpoints) in: {', '.join(offending)}."  # noqa
        )

    return runs


class SweepSummary:
    """Across-seed aggregates of one or more experiment labels."""

    def __init__(self: Self, rows: Sequence[CheckpointAggregate]) -> None:
        self.rows = list(rows)

    def __len__(self: Self) -> int:
        return len(self.rows)

    def labels(self: Self) -> List[str]:
        """Returns the labels in order of first appearance."""
        return list(dict.fromkeys(row.label for row in self.rows))

    def curve(self: Self, label: str) -> List[CheckpointAggregate]:
        rows = [row for row in self.rows if row.label == label]

        if not rows:
            raise KeyError(f"No aggregates for label '{label}'.")

        return sorted(rows, key=lambda row: row.checkpoint)

    def final(self: Self, label: str) -> CheckpointAggregate:
        return self.curve(label)[-1]

    def at_fraction(self: Self, label: str, fraction: float) -> CheckpointAggregate:
        """Returns the first checkpoint at or past a fraction of the checkpoint grid.

        Args:
            label: Experiment label.
            fraction: Fraction in `(0, 1]` (e.g. 0.1 for the 10%-budget checkpoint).

        Returns:
            `CheckpointAggregate` instance.

        Raises:
            ValueError: Fraction out of range.
        """
        if not 0.0 < fraction <= 1.0:
            raise ValueError(f"Fraction must lie in (0,1], got {fraction}.")

        curve = self.curve(label)
        index = max(int(np.ceil(fraction * len(curve))) - 1, 0)

        return curve[index]

    def write(self: Self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)

        with open(path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(SUMMARY_COLUMNS)

            for row in self.rows:
                writer.writerow(
                    repr(float(value)) if isinstance(value, float) else str(value)
                    for value in astuple(row)
                )

        return path

    @classmethod
    def read(cls: Type["SweepSummary"], path: Union[str, Path]) -> "SweepSummary":
        with open(path, "r", newline="") as f:
            reader = csv.DictReader(f)

            if tuple(reader.fieldnames or ()) != SUMMARY_COLUMNS:
                raise ReportError(f"'{path}' is not a summary file.")

            return cls(
                CheckpointAggregate(
                    label=record["label"],
                    checkpoint=int(record["checkpoint"]),
                    step=float(record["step"]),
                    eval_mean=float(record["eval_mean"]),
                    eval_std=float(record["eval_std"]),
                    q_sum_mean=float(record["q_sum_mean"]),
                    q_sum_std=float(record["q_sum_std"]),
                    ec_fraction=float(record["ec_fraction"]),
                    n=int(record["n"]),
                )
                for record in reader
            )


def summarize(runs: Sequence[RunRecord]) -> SweepSummary:
    by_label: Dict[str, List[RunRecord]] = defaultdict(list)

    for run in runs:
        by_label[run.label].append(run)

    rows = []

    for label, group in by_label.items():
        evals = [run.metrics.of_kind(RecordKind.EVAL) for run in group]
        states = [
            {row.checkpoint: row for row in run.metrics.of_kind(RecordKind.STATE)}
            for run in group
        ]

        for i, checkpoint in enumerate(group[0].checkpoints):
            eval_rows: List[MetricsRow] = [run_evals[i] for run_evals in evals]
            returns = np.array([row.episode_return for row in eval_rows])
            steps = np.array([row.global_step for row in eval_rows], dtype=float)
            q_sums = np.array(
                [run_states[checkpoint].q_sum_rl for run_states in states]
            )

            rows.append(
                CheckpointAggregate(
                    label=label,
                    checkpoint=checkpoint,
                    step=float(steps.mean()),
                    eval_mean=float(returns.mean()),
                    eval_std=float(returns.std()),
                    q_sum_mean=float(q_sums.mean()),
                    q_sum_std=float(q_sums.std()),
                    ec_fraction=sum(
                        row.memory_used == MemoryKind.EC for row in eval_rows
                    )
                    / len(eval_rows),
                    n=len(group),
                )
            )

    return SweepSummary(rows)


def aggregate(paths: Sequence[Union[str, Path]]) -> SweepSummary:
    """Aggregates metrics files per label across seeds.

    Args:
        paths: Paths of metrics CSV files (named '<label>_seed<seed>.csv').

    Returns:
        `SweepSummary` instance.

    Raises:
        ReportError: No files, unreadable files or mismatched checkpoint grids.
    """
    return summarize(load_runs(paths))


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams.update(
        {
            "font.family": "DejaVu Sans",
            "axes.unicode_minus": False,
            "svg.hashsalt": "twomem",
            "svg.fonttype": "none",
        }
    )
    import matplotlib.pyplot as plt

    return plt


def _save(plt, fig, path: Path) -> Path:
    # no timestamp, so reruns produce identical files
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)

    return path


def _plot_curves(
    plt, summary: SweepSummary, mean: str, std: str, ylabel: str, path: Path
) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4), constrained_layout=True)

    for label in summary.labels():
        curve = summary.curve(label)
        xs = np.array([row.step for row in curve])
        ys = np.array([getattr(row, mean) for row in curve])
        spread = np.array([getattr(row, std) for row in curve])

        (line,) = ax.plot(xs, ys, label=label)
        ax.fill_between(xs, ys - spread, ys + spread, color=line.get_color(), alpha=0.2)

    ax.set_xlabel("Environment steps")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)

    return _save(plt, fig, path)


def _plot_memory_choice(plt, runs: Sequence[RunRecord], path: Path) -> Path:
    fig, ax = plt.subplots(
        figsize=(7, 0.6 + 0.35 * len(runs)), constrained_layout=True
    )

    for i, run in enumerate(runs):
        start = 0
        spans, colors = [], []

        for row in run.metrics.of_kind(RecordKind.EVAL):
            spans.append((start, row.global_step - start))
            colors.append(MEMORY_COLORS[row.memory_used])
            start = row.global_step

        ax.broken_barh(spans, (i - 0.4, 0.8), facecolors=colors)

    ax.set_yticks(range(len(runs)))
    ax.set_yticklabels(
        [run.label if run.seed is None else f"{run.label} ({run.seed})" for run in runs]
    )
    ax.set_xlabel("Environment steps")
    ax.set_title("Evaluation memory (orange: EC, grey: RL)")

    return _save(plt, fig, path)


def report(paths: Sequence[Union[str, Path]], out_dir: Union[str, Path]) -> List[Path]:
    """Aggregates metrics files and renders the report figures.

    Writes `aggregate.csv`, `returns.svg` (evaluation return mean and standard
    deviation per label), `memory_choice.svg` (evaluation memory per run and
    checkpoint) and `q_sum.svg` (Q-table sum mean and standard deviation).

    Args:
        paths: Paths of metrics CSV files.
        out_dir: Output directory.

    Returns:
        List of written paths.

    Raises:
        ReportError: No files, unreadable files or mismatched checkpoint grids.
    """
    runs = load_runs(paths)
    summary = summarize(runs)
    # group bands by label, then seed
    runs = sorted(
        runs, key=lambda run: (summary.labels().index(run.label), run.seed or 0)
    )

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    plt = _pyplot()

    written = [
        summary.write(out_dir / "aggregate.csv"),
        _plot_curves(
            plt,
            summary,
            "eval_mean",
            "eval_std",
            "Evaluation return",
            out_dir / "returns.svg",
        ),
        _plot_memory_choice(plt, runs, out_dir / "memory_choice.svg"),
        _plot_curves(
            plt,
            summary,
            "q_sum_mean",
            "q_sum_std",
            "Sum of Q-values",
            out_dir / "q_sum.svg",
        ),
    ]

    for path in written:
        logger.info("Wrote %s", path)

    return written
