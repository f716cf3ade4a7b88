from typing_extensions import Self

import numpy as np
import pytest  # type: ignore

import twomem
from twomem.envs import GenericTabularMDP, MotivatingTree, StateId, value_iteration
from twomem.learning import QTable
from twomem.memory import MemoryKind, ReplayBuffer, Transition

# deterministic loops, discounted
LOOPS = """
states 5
actions 2
discount 0.9
0 0 1 1.0 0.0 0
0 1 0 1.0 -1.0 0
1 0 2 1.0 0.0 0
1 1 0 1.0 1.0 0
2 0 3 1.0 0.0 0
2 1 1 1.0 2.0 0
3 0 4 1.0 5.0 1
3 1 2 1.0 0.5 0
"""


def state(index: int) -> StateId:
    return StateId(index, (float(index),))


def transition(s: int, a: int, r: float, n: int, terminal: bool) -> Transition:
    return Transition(state(s), a, r, state(n), terminal, MemoryKind.RL)


class TestQTable:
    def test_terminal_update(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        q = QTable(2, 2, alpha=0.1)

        error = q.td_update([transition(0, 1, 10.0, 1, True)])
        assert error == pytest.approx(10.0)
        assert q[state(0), 1] == pytest.approx(1.0)
        assert q.visits[0, 1] == 1
        # untouched pairs stay 0
        assert q[state(0), 0] == 0.0

    def test_bootstrap(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        q = QTable(2, 2, alpha=0.1, gamma=0.5)
        q.values[1] = [2.0, 5.0]

        q.td_update([transition(0, 0, 1.0, 1, False)])
        # target 1 + 0.5 * 5
        assert q[state(0), 0] == pytest.approx(0.35)

        # terminal transitions ignore the next state
        q.td_update([transition(0, 1, 1.0, 1, True)])
        assert q[state(0), 1] == pytest.approx(0.1)

    def test_sequential_batch(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        q = QTable(1, 1, alpha=0.5)
        batch = [transition(0, 0, 4.0, 0, True)] * 2

        error = q.td_update(batch)
        # second update sees the first one
        assert q[state(0), 0] == pytest.approx(3.0)
        assert error == pytest.approx((4.0 + 2.0) / 2)

        with pytest.raises(ValueError):
            q.td_update([])

    def test_alpha_decay(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        # alpha 1 turns the update into a running mean
        q = QTable(1, 1, alpha=1.0, alpha_decay=True)
        for reward in (2.0, 4.0, 6.0):
            q.td_update([transition(0, 0, reward, 0, True)])
        assert q[state(0), 0] == pytest.approx(4.0)

        q = QTable(1, 1, alpha=0.1, alpha_decay=True)
        assert q.step_size(state(0), 0) == pytest.approx(1.0 / 9.0)
        q.visits[0, 0] = 1
        assert q.step_size(state(0), 0) == pytest.approx(0.1)
        q.visits[0, 0] = 11
        assert q.step_size(state(0), 0) == pytest.approx(0.05)

        assert QTable(1, 1, alpha=0.1).step_size(state(0), 0) == 0.1

    def test_greedy(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        q = QTable(2, 3)
        # ties go to the lowest index
        assert q.greedy_action(state(0)) == 0

        q.values[0] = [1.0, 3.0, 3.0]
        assert q.greedy_action(state(0)) == 1

    def test_q_sum(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        env = MotivatingTree()
        q = QTable(7, 2)
        assert q.q_sum(env) == 0.0

        q.values[1] = [10.0, 5.0]
        q.values[2] = [-20.0, -20.0]
        assert q.q_sum(env) == pytest.approx(-25.0)
        assert q.snapshot() == "1\t0\t10.0\n1\t1\t5.0\n2\t0\t-20.0\n2\t1\t-20.0"

    def test_invalid(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        with pytest.raises(ValueError):
            QTable(2, 2, alpha=0.0)
        with pytest.raises(ValueError):
            QTable(2, 2, gamma=1.5)

        # debug mode rejects non-finite values
        q = QTable(1, 1)
        q.values[0, 0] = np.inf
        with pytest.raises(AssertionError):
            q.td_update([transition(0, 0, 1.0, 0, False)])


class TestConvergence:
    def test_replay_reaches_oracle(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        env = GenericTabularMDP.from_string(LOOPS)
        buffer = ReplayBuffer()

        for s, a in env.table:
            ((_, n, r, terminal),) = env.transitions(s, a)
            buffer.push(
                Transition(env.state(s), a, r, env.state(n), terminal, MemoryKind.RL)
            )

        q = QTable(env.spec.state_count, env.spec.action_count, alpha=0.5, gamma=0.9)
        rng = np.random.default_rng(0)

        for _ in range(5_000):
            q.td_update(buffer.sample_uniform(32, rng))

        assert np.abs(q.values - value_iteration(env, gamma=0.9)).max() < 1e-2

    def test_tree_q_sum(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        env = MotivatingTree()
        # alpha 1 with decay averages the targets, so the risky branch settles at 5
        q = QTable(7, 2, alpha=1.0, alpha_decay=True)
        # leaves first, so every target already sees converged successors
        batch = [
            Transition(state, action, reward, env.state(n), terminal, MemoryKind.RL)
            for state, action in reversed(env.enumerate_state_actions())
            for _, n, reward, terminal in env.transitions(state.index, action)
        ]

        for _ in range(100):
            q.td_update(batch)

        assert q.values[1, 1] == pytest.approx(5.0)
        assert q.q_sum(env) == pytest.approx(value_iteration(env).sum())
        assert q.q_sum(env) == pytest.approx(-35.0)
