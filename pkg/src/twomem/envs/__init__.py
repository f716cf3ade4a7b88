from typing import Any, Callable, Dict

from .env import (  # noqa
    ActionId,
    EnvironmentContractError,
    EnvSpec,
    StateId,
    StepResult,
    TabularEnv,
)
from .oracle import enumerate_trajectories, value_iteration  # noqa
from .tabular import GenericTabularMDP, TransitionTableError  # noqa
from .tree import MotivatingTree  # noqa
from .windy import WindyGrid  # noqa

ENVIRONMENTS: Dict[str, Callable[..., TabularEnv]] = {
    "motivating_tree": MotivatingTree,
    "windy_grid": WindyGrid,
    "tabular": GenericTabularMDP.from_file,
}


def make_env(name: str, **params: Any) -> TabularEnv:
    """Builds an environment by name.

    Args:
        name: One of 'motivating_tree', 'windy_grid' or 'tabular'.
        **params: Keyword arguments for the environment constructor
            ('tabular' expects `path`).

    Returns:
        `TabularEnv` instance.

    Raises:
        ValueError: Unknown environment name.
    """
    if name not in ENVIRONMENTS:
        raise ValueError(
            f"Unknown environment '{name}', expected one of {sorted(ENVIRONMENTS)}."
        )

    return ENVIRONMENTS[name](**params)
