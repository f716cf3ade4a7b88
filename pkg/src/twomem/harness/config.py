try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

from typing_extensions import Self

from twomem.agent import AgentConfig, AgentMode
from twomem.envs import ENVIRONMENTS, make_env
from twomem.learning import Schedule
from twomem.memory import FeatureKind

# fraction of the budget after which the default temperature has decayed p_ec by e^-5
TEMPERATURE_DIVISOR = 5.0

SECTION_KEYS = {
    "experiment": {
        "name",
        "env",
        "total_steps",
        "eval_interval",
        "eval_episodes",
        "seeds",
        "output_dir",
        "track_memories",
        "workers",
    },
    "agent": {
        "mode",
        "epsilon",
        "train_every",
        "batch_size",
        "data_sharing",
        "alpha",
        "gamma",
        "alpha_decay",
        "score_window",
    },
    "agent.schedule": {"p_start", "p_end", "temperature"},
    "agent.ec": {"k", "capacity", "features", "projection_dim"},
    "agent.replay": {"capacity"},
}


class ConfigError(ValueError):
    """Error representing an invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration of a (multi-seed) experiment.

    Attributes:
        env_name: Name of the environment (see `twomem.envs.make_env`).
        agent: `AgentConfig` instance (its seed is replaced per run).
        total_steps: Training budget in environment steps per seed.
        eval_interval: Environment steps between evaluation checkpoints.
        eval_episodes: Greedy episodes averaged per checkpoint.
        seeds: Tuple of seeds, one run each.
        output_dir: Directory for the run CSVs.
        name: Label of the experiment (prefix of the CSV file names).
        env_params: Keyword arguments for the environment constructor.
        track_memories: Boolean indicating whether or not both memories are
            additionally evaluated separately at every checkpoint.
        workers: Number of seeds run in parallel processes.
    """

    env_name: str
    agent: AgentConfig = field(default_factory=AgentConfig)
    total_steps: int = 50_000
    eval_interval: int = 500
    eval_episodes: int = 5
    seeds: Tuple[int, ...] = (1, 2, 3, 4, 5)
    output_dir: Path = Path("runs")
    name: Optional[str] = None
    env_params: Dict[str, Any] = field(default_factory=dict)
    track_memories: bool = False
    workers: int = 1

    def __post_init__(self: Self) -> None:
        if self.env_name not in ENVIRONMENTS:
            raise ConfigError(
                f"Unknown environment '{self.env_name}', expected one of {sorted(ENVIRONMENTS)}."  # noqa
            )
        if not self.seeds:
            raise ConfigError("At least one seed is required.")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError(f"Duplicate seeds in {list(self.seeds)}.")
        for key in ("total_steps", "eval_interval", "eval_episodes", "workers"):
            if getattr(self, key) < 1:
                raise ConfigError(f"'{key}' must be positive, got {getattr(self, key)}.")  # noqa
        if self.total_steps < self.eval_interval:
            raise ConfigError(
                f"'total_steps' ({self.total_steps}) must be at least 'eval_interval' ({self.eval_interval})."  # noqa
            )

    @property
    def label(self: Self) -> str:
        return self.name if self.name is not None else str(self.agent.mode)

    @property
    def checkpoints(self: Self) -> int:
        return self.total_steps // self.eval_interval

    def with_seeds(self: Self, seeds: Sequence[int]) -> "ExperimentConfig":
        return replace(self, seeds=tuple(seeds))


def _check_keys(section: str, data: Dict[str, Any], nested: Sequence[str] = ()) -> None:
    unknown = set(data) - SECTION_KEYS[section] - set(nested)

    if unknown:
        raise ConfigError(
            f"Unknown key(s) in [{section}]: {', '.join(sorted(unknown))}."
        )


def _flag(section: str, data: Dict[str, Any], key: str, default: bool) -> bool:
    value = data.get(key, default)

    if not isinstance(value, bool):
        raise ConfigError(
            f"'{key}' in [{section}] must be true or false, got {value!r}."
        )

    return value


def config_from_dict(
    data: Dict[str, Any], base_dir: Union[str, Path, None] = None
) -> ExperimentConfig:
    """Builds an experiment configuration from parsed TOML data.

    Args:
        data: Dictionary with the sections `experiment`, `env` and `agent`
            (with optional `schedule`, `ec` and `replay` subsections).
        base_dir: Optional directory relative environment paths are resolved
            against. Defaults to the working directory.

    Returns:
        `ExperimentConfig` instance.

    Raises:
        ConfigError: Unknown sections or keys, or invalid values.
    """
    unknown = set(data) - {"experiment", "env", "agent"}
    if unknown:
        raise ConfigError(f"Unknown section(s): {', '.join(sorted(unknown))}.")

    experiment = dict(data.get("experiment", {}))
    env_params = dict(data.get("env", {}))
    agent = dict(data.get("agent", {}))

    _check_keys("experiment", experiment)
    _check_keys("agent", agent, nested=("schedule", "ec", "replay"))

    schedule = dict(agent.pop("schedule", {}))
    ec = dict(agent.pop("ec", {}))
    replay = dict(agent.pop("replay", {}))

    _check_keys("agent.schedule", schedule)
    _check_keys("agent.ec", ec)
    _check_keys("agent.replay", replay)

    if "env" not in experiment:
        raise ConfigError("Missing key 'env' in [experiment].")

    if "path" in env_params and base_dir is not None:
        env_params["path"] = str(Path(base_dir) / env_params["path"])

    try:
        total_steps = int(experiment.get("total_steps", 50_000))

        schedule_config = Schedule(
            p_start=float(schedule.get("p_start", 0.9)),
            p_end=float(schedule.get("p_end", 0.1)),
            temperature=float(
                schedule.get("temperature", max(total_steps, 1) / TEMPERATURE_DIVISOR)
            ),
        )

        agent_config = AgentConfig(
            mode=AgentMode(agent.get("mode", "two_memory")),
            epsilon=float(agent.get("epsilon", 0.1)),
            train_every=int(agent.get("train_every", 10)),
            batch_size=int(agent.get("batch_size", 32)),
            schedule=schedule_config,
            data_sharing=_flag("agent", agent, "data_sharing", True),
            alpha=float(agent.get("alpha", 0.1)),
            gamma=float(agent["gamma"]) if "gamma" in agent else None,
            alpha_decay=_flag("agent", agent, "alpha_decay", False),
            k=int(ec.get("k", 3)),
            ec_capacity=int(ec.get("capacity", 100_000)),
            features=FeatureKind(ec.get("features", "identity")),
            projection_dim=int(ec.get("projection_dim", 4)),
            replay_capacity=int(replay.get("capacity", 100_000)),
            score_window=int(agent.get("score_window", 50)),
        )

        config = ExperimentConfig(
            env_name=str(experiment["env"]),
            agent=agent_config,
            total_steps=total_steps,
            eval_interval=int(experiment.get("eval_interval", 500)),
            eval_episodes=int(experiment.get("eval_episodes", 5)),
            seeds=tuple(int(s) for s in experiment.get("seeds", (1, 2, 3, 4, 5))),
            output_dir=Path(experiment.get("output_dir", "runs")),
            name=experiment.get("name"),
            env_params=env_params,
            track_memories=_flag("experiment", experiment, "track_memories", False),
            workers=int(experiment.get("workers", 1)),
        )

        # environment parameters are checked by building the environment once
        make_env(config.env_name, **config.env_params)

        return config
    except ConfigError:
        raise
    except (TypeError, ValueError, OSError) as e:
        raise ConfigError(f"Invalid configuration: {e}") from e


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Loads an experiment configuration from a TOML file.

    Args:
        path: Path to the configuration file.

    Returns:
        `ExperimentConfig` instance.

    Raises:
        ConfigError: Unreadable file, malformed TOML or invalid configuration.
    """
    path = Path(path)

    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read configuration '{path}': {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Malformed configuration '{path}': {e}") from e

    return config_from_dict(data, base_dir=path.parent)
