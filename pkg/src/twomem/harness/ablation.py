import logging
from dataclasses import replace
from pathlib import Path
from typing import List

from twomem.agent import AgentMode
from twomem.learning import SCHEDULE_SETTINGS

from .config import ExperimentConfig
from .report import SweepSummary, aggregate
from .runner import run

logger = logging.getLogger(__name__)


def _variant_name(base: ExperimentConfig, name: str) -> str:
    return name if base.name is None else f"{base.name}-{name}"


def ablation_variants(base: ExperimentConfig) -> List[ExperimentConfig]:
    """Expands a base configuration into the ablation grid.

    Two-memory agents with and without data sharing under each switching
    schedule (decayed, constant, increased), followed by the pure EC and pure
    RL baselines. All other settings (budget, seeds, temperature, ...) are
    taken from the base configuration.

    Args:
        base: `ExperimentConfig` instance.

    Returns:
        List of eight `ExperimentConfig` instances.
    """
    variants = []

    for data_sharing in (True, False):
        for kind, (p_start, p_end) in SCHEDULE_SETTINGS.items():
            agent = replace(
                base.agent,
                mode=AgentMode.TWO_MEMORY,
                data_sharing=data_sharing,
                schedule=replace(base.agent.schedule, p_start=p_start, p_end=p_end),
            )
            name = f"2m-{'ds' if data_sharing else 'nods'}-{kind}"
            variants.append(
                replace(base, agent=agent, name=_variant_name(base, name))
            )

    for mode in (AgentMode.PURE_EC, AgentMode.PURE_RL):
        variants.append(
            replace(
                base,
                agent=replace(base.agent, mode=mode),
                name=_variant_name(base, str(mode)),
            )
        )

    return variants


def ablation_suite(base: ExperimentConfig) -> SweepSummary:
    """Runs every ablation variant and summarizes them.

    Run CSVs and `summary.csv` are written to the base output directory.

    Args:
        base: `ExperimentConfig` instance.

    Returns:
        `SweepSummary` over all variants.

    Raises:
        RunFailure: Some run failed.
    """
    paths: List[Path] = []

    for variant in ablation_variants(base):
        logger.info("Ablation variant '%s'", variant.label)
        paths.extend(run(variant))

    summary = aggregate(paths)
    path = summary.write(Path(base.output_dir) / "summary.csv")
    logger.info("Wrote %s", path)

    return summary
