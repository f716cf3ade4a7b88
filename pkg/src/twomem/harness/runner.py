import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import List

from typing_extensions import Self

from twomem.agent import TwoMemoryAgent
from twomem.envs import TabularEnv, make_env
from twomem.memory import MemoryKind

from .config import ExperimentConfig
from .metrics import MetricsRow, RecordKind, RunMetrics

logger = logging.getLogger(__name__)


class RunFailure(RuntimeError):
    """Error representing a failed run."""

    def __init__(
        self: Self, label: str, seed: int, step: int, cause: Exception
    ) -> None:
        """Initializes the run failure instance.

        Args:
            label: Label of the experiment.
            seed: Seed of the failed run.
            step: Global step at which the run failed.
            cause: Exception raised by the run.
        """
        self.label = label
        self.seed = seed
        self.step = step
        self.cause = cause
        super().__init__(
            f"Run '{label}' failed for seed {seed} at step {step}: {type(cause).__name__}: {cause}"  # noqa
        )

    def __reduce__(self: Self):
        # rebuilt from the constructor arguments when sent between processes
        return (RunFailure, (self.label, self.seed, self.step, self.cause))


def metrics_path(config: ExperimentConfig, seed: int) -> Path:
    return Path(config.output_dir) / f"{config.label}_seed{seed}.csv"


def _checkpoint_rows(
    config: ExperimentConfig,
    agent: TwoMemoryAgent,
    env: TabularEnv,
    checkpoint: int,
) -> List[MetricsRow]:
    score_rl, score_ec = agent.scores
    q_sum = agent.rl.q_sum(env)

    eval_return, eval_memory = agent.evaluate(env, config.eval_episodes)

    return_ec = return_rl = None
    if config.track_memories:
        return_ec = agent.evaluate(env, config.eval_episodes, MemoryKind.EC).eval_return
        return_rl = agent.evaluate(env, config.eval_episodes, MemoryKind.RL).eval_return

    logger.debug(
        "%s step %d checkpoint %d: eval %.3f with %s (p_ec %.3f)",
        config.label,
        agent.global_step,
        checkpoint,
        eval_return,
        eval_memory,
        agent.p_ec,
    )

    shared = dict(
        global_step=agent.global_step,
        checkpoint=checkpoint,
        p_ec=agent.p_ec,
        q_sum_rl=q_sum,
        ec_table_size=len(agent.ec),
        score_rl=score_rl,
        score_ec=score_ec,
    )

    return [
        MetricsRow(
            record_kind=RecordKind.EVAL,
            episode_return=float(eval_return),
            memory_used=eval_memory,
            **shared,
        ),
        MetricsRow(
            record_kind=RecordKind.STATE,
            return_ec=return_ec,
            return_rl=return_rl,
            **shared,
        ),
    ]


def run_seed(config: ExperimentConfig, seed: int) -> Path:
    """Runs one seed of an experiment and writes its metrics CSV.

    Training episodes are run until the step budget is used up. Whenever an
    episode ends at or past the next multiple of `eval_interval`, a checkpoint
    (evaluation and learner state) is recorded.

    Args:
        config: `ExperimentConfig` instance.
        seed: Seed of the run.

    Returns:
        Path of the written CSV file.

    Raises:
        RunFailure: Any error during the run.
    """
    env = make_env(config.env_name, **config.env_params)
    agent = TwoMemoryAgent(env, replace(config.agent, seed=seed))
    metrics = RunMetrics()
    checkpoint = 0

    logger.info(
        "Running '%s' on %s (mode %s, seed %d, %d steps)",
        config.label,
        config.env_name,
        config.agent.mode,
        seed,
        config.total_steps,
    )

    try:
        while agent.global_step < config.total_steps:
            p_ec = agent.p_ec
            episode = agent.run_training_episode(env)
            score_rl, score_ec = agent.scores

            metrics.append(
                MetricsRow(
                    global_step=agent.global_step,
                    checkpoint=checkpoint,
                    record_kind=RecordKind.TRAIN,
                    episode_return=float(episode.episode_return),
                    memory_used=episode.memory_used,
                    p_ec=p_ec,
                    score_rl=score_rl,
                    score_ec=score_ec,
                )
            )

            while (
                checkpoint < config.checkpoints
                and agent.global_step >= (checkpoint + 1) * config.eval_interval
            ):
                checkpoint += 1
                for row in _checkpoint_rows(config, agent, env, checkpoint):
                    metrics.append(row)
    except Exception as e:
        logger.error("Run '%s' failed for seed %d at step %d", config.label, seed, agent.global_step)  # noqa
        raise RunFailure(config.label, seed, agent.global_step, e) from e

    path = metrics.write(metrics_path(config, seed))
    logger.info("Wrote %s", path)

    return path


def run(config: ExperimentConfig) -> List[Path]:
    """Runs every seed of an experiment.

    Args:
        config: `ExperimentConfig` instance.

    Returns:
        List of metrics CSV paths (in seed order).

    Raises:
        RunFailure: Some run failed.
    """
    Path(config.output_dir).mkdir(parents=True, exist_ok=True)

    if config.workers > 1 and len(config.seeds) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(run_seed, config, seed) for seed in config.seeds]
            return [future.result() for future in futures]

    return [run_seed(config, seed) for seed in config.seeds]
