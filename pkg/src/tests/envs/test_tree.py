from typing_extensions import Self

import numpy as np
import pytest  # type: ignore

import twomem
from twomem.envs import EnvironmentContractError, MotivatingTree
from twomem.envs.tree import A1, A2, S1, S2, S3, S4, S5, S6, S7


class TestMotivatingTree:
    def test_env_spec(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        env = MotivatingTree()

        assert env.spec.state_count == 7
        assert env.spec.action_count == 2
        assert env.spec.discount_default == 1.0
        assert len(env.states) == 7
        # one-hot features
        assert env.state(S3).features == (0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0)
        assert len(env.enumerate_state_actions()) == 14

    def test_transitions(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        env = MotivatingTree()

        assert env.transitions(S1, A1) == [(1.0, S2, 0.0, False)]
        assert env.transitions(S1, A2) == [(1.0, S3, 0.0, False)]
        assert env.transitions(S2, A1) == [(1.0, S4, 10.0, True)]
        assert env.transitions(S2, A2) == [
            (0.5, S5, -10.0, True),
            (0.5, S6, 20.0, True),
        ]
        # both actions in s3 lead to s7
        assert env.transitions(S3, A1) == env.transitions(S3, A2)
        assert env.transitions(S3, A1) == [(1.0, S7, -20.0, True)]
        # leaves have no dynamics
        for leaf in (S4, S5, S6, S7):
            assert env.transitions(leaf, A1) == []

    def test_episode(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        env = MotivatingTree()
        rng = np.random.default_rng(0)

        # stepping before reset
        with pytest.raises(EnvironmentContractError):
            env.step(A1, rng)

        assert env.reset() == env.state(S1)
        assert not env.done

        result = env.step(A1, rng)
        assert result.next_state == env.state(S2)
        assert result.reward == 0.0
        assert not result.terminal and not result.done

        result = env.step(A1, rng)
        assert result.next_state == env.state(S4)
        assert result.reward == 10.0
        assert result.terminal and not result.truncated and result.done
        assert env.done
        assert env.steps == 2

        # stepping a finished episode
        with pytest.raises(EnvironmentContractError):
            env.step(A1, rng)

        env.reset()
        assert env.steps == 0

        # invalid actions
        with pytest.raises(EnvironmentContractError):
            env.step(2, rng)
        with pytest.raises(EnvironmentContractError):
            env.step(-1, rng)

        # s1 -a2-> s3 -a1-> s7
        assert env.step(A2, rng).next_state == env.state(S3)
        result = env.step(A1, rng)
        assert result.next_state == env.state(S7)
        assert result.reward == -20.0
        assert result.terminal

    def test_stochastic_branch(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        env = MotivatingTree()
        rng = np.random.default_rng(1)
        n = 10_000
        high = 0

        for _ in range(n):
            env.reset()
            env.step(A1, rng)
            result = env.step(A2, rng)

            assert result.next_state in (env.state(S5), env.state(S6))
            assert result.reward == (20.0 if result.next_state.index == S6 else -10.0)
            high += result.next_state.index == S6

        # 3-sigma binomial bounds
        assert 0.47 <= high / n <= 0.53

    def test_determinism(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        def rollout(seed: int):
            env = MotivatingTree()
            rng = np.random.default_rng(seed)
            outcomes = []

            for _ in range(100):
                env.reset()
                env.step(A1, rng)
                outcomes.append(env.step(A2, rng).next_state.index)

            return outcomes

        assert rollout(7) == rollout(7)
