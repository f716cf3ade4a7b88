from typing import List, Optional, Tuple

import numpy as np

from .env import ActionId, StateId, TabularEnv

# (state, action, reward, next state, terminal)
TrajectoryStep = Tuple[StateId, ActionId, float, StateId, bool]


def value_iteration(
    env: TabularEnv,
    gamma: Optional[float] = None,
    tol: float = 1e-10,
    max_iterations: int = 100_000,
) -> np.ndarray:
    """Computes optimal state-action values by synchronous value iteration.

    States without dynamics (only ever entered terminally) keep value 0.

    Args:
        env: `TabularEnv` instance.
        gamma: Optional discount. Defaults to the environment's default.
        tol: Sup-norm change below which iteration stops. Defaults to 1e-10.
        max_iterations: Upper bound on sweeps. Defaults to 100000.

    Returns:
        Array of shape `(state_count, action_count)`.

    Raises:
        ValueError: No convergence within `max_iterations` sweeps.
    """
    if gamma is None:
        gamma = env.spec.discount_default

    n_states, n_actions = env.spec.state_count, env.spec.action_count

    # precompute the law once
    law = [
        [env.transitions(state, action) for action in range(n_actions)]
        for state in range(n_states)
    ]

    q = np.zeros((n_states, n_actions))

    for _ in range(max_iterations):
        v = q.max(axis=1)
        q_new = np.zeros_like(q)

        for state in range(n_states):
            for action in range(n_actions):
                q_new[state, action] = sum(
                    prob * (reward + (0.0 if terminal else gamma * v[next_state]))
                    for prob, next_state, reward, terminal in law[state][action]
                )

        delta = np.abs(q_new - q).max()
        q = q_new

        if delta < tol:
            return q

    raise ValueError(f"Value iteration did not converge in {max_iterations} sweeps.")


def enumerate_trajectories(
    env: TabularEnv, max_depth: int = 64
) -> List[List[TrajectoryStep]]:
    """Enumerates every distinct trajectory from the start state to termination.

    Performs a depth-first search over all actions and outcomes, so it is only
    meant for small acyclic environments.

    Args:
        env: `TabularEnv` instance.
        max_depth: Maximum trajectory length. Defaults to 64.

    Returns:
        List of trajectories, each a list of `(state, action, reward,
        next_state, terminal)` tuples.

    Raises:
        ValueError: A trajectory exceeds `max_depth` (environment is cyclic).
    """
    trajectories = []

    def dfs(state: StateId, prefix: List[TrajectoryStep]) -> None:
        if len(prefix) >= max_depth:
            raise ValueError(
                f"Trajectory exceeds {max_depth} steps, environment '{env.spec.name}' is not acyclic."  # noqa
            )

        for action in range(env.spec.action_count):
            for _, next_index, reward, terminal in env.transitions(state.index, action):
                next_state = env.state(next_index)
                path = prefix + [(state, action, reward, next_state, terminal)]

                if terminal:
                    trajectories.append(path)
                else:
                    dfs(next_state, path)

    dfs(env.state(env.start_index()), [])

    return trajectories
