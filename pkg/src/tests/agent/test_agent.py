from typing_extensions import Self

import pytest  # type: ignore

import twomem
from twomem.agent import AgentConfig, AgentMode, ScoreTracker, TwoMemoryAgent
from twomem.envs import (
    MotivatingTree,
    WindyGrid,
    enumerate_trajectories,
    value_iteration,
)
from twomem.envs.tree import A1, A2, S1, S2
from twomem.learning import Schedule
from twomem.memory import FeatureKind, MemoryKind, Transition


def constant(p: float) -> Schedule:
    return Schedule(p_start=p, p_end=p)


def train(agent: TwoMemoryAgent, env, steps: int) -> None:
    while agent.global_step < steps:
        agent.run_training_episode(env)


def tree_episodes():
    return [
        [Transition(*t, MemoryKind.EC) for t in trajectory]
        for trajectory in enumerate_trajectories(MotivatingTree())
    ]


class TestScoreTracker:
    def test_tracker(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        tracker = ScoreTracker(window=3)
        assert tracker.score(MemoryKind.EC) == float("-inf")

        for r in (1.0, 2.0, 3.0, 10.0):
            tracker.record(MemoryKind.EC, r)

        # only the last three returns count
        assert tracker.returns(MemoryKind.EC) == (2.0, 3.0, 10.0)
        assert tracker.score(MemoryKind.EC) == pytest.approx(5.0)
        assert tracker.counts == {MemoryKind.EC: 4, MemoryKind.RL: 0}

        with pytest.raises(ValueError):
            ScoreTracker(window=0)


class TestAgentConfig:
    def test_validation(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        config = AgentConfig()
        assert config.mode == AgentMode.TWO_MEMORY
        assert config.epsilon == 0.1
        assert config.train_every == 10
        assert config.batch_size == 32
        assert config.k == 3
        assert config.score_window == 50

        with pytest.raises(ValueError):
            AgentConfig(epsilon=1.5)
        with pytest.raises(ValueError):
            AgentConfig(alpha=0.0)
        with pytest.raises(ValueError):
            AgentConfig(gamma=0.0)
        with pytest.raises(ValueError):
            AgentConfig(batch_size=0)


class TestTwoMemoryAgent:
    def test_memory_frequencies(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        agent = TwoMemoryAgent(MotivatingTree(), AgentConfig(schedule=constant(0.3)))
        n = 10_000
        ec = sum(agent.select_memory_for_episode() == MemoryKind.EC for _ in range(n))

        # 3-sigma binomial bounds around 0.3
        assert 0.286 <= ec / n <= 0.314

        assert agent.p_ec == pytest.approx(0.3)
        assert TwoMemoryAgent(MotivatingTree()).p_ec == 0.9

    def test_epsilon_greedy(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        env = MotivatingTree()
        agent = TwoMemoryAgent(env, AgentConfig(epsilon=0.1, seed=5))
        agent.rl.values[S2] = [0.0, 1.0]

        n = 10_000
        greedy = sum(agent.act(MemoryKind.RL, env.state(S2)) == A2 for _ in range(n))

        # greedy with probability 0.9 + 0.1 / 2
        assert 0.93 <= greedy / n <= 0.97

        # no exploration at epsilon 0
        assert all(
            agent.act(MemoryKind.RL, env.state(S2), epsilon=0.0) == A2 for _ in range(100)
        )

    def test_training_episode(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        env = MotivatingTree()
        agent = TwoMemoryAgent(env, AgentConfig(seed=1))

        result = agent.run_training_episode(env)

        # every tree episode takes two steps
        assert result.steps == 2
        assert agent.global_step == 2
        assert len(agent.buffer) == 2
        assert all(t.source == result.memory_used for t in agent.buffer)
        assert sum(agent.tracker.counts.values()) == 1
        assert agent.tracker.returns(result.memory_used) == (result.episode_return,)
        # episodic memory holds both pairs of the episode
        assert len(agent.ec) == 2

        train(agent, env, 100)
        # one minibatch every 10 steps
        assert agent.td_updates == 10
        assert agent.last_td_error is not None

    def test_eval_is_side_effect_free(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        env = WindyGrid()
        agent = TwoMemoryAgent(env, AgentConfig(seed=3))
        train(agent, env, 2_000)

        values = agent.rl.values.copy()
        ec = agent.ec.snapshot()
        buffer = list(agent.buffer)
        counts = dict(agent.tracker.counts)
        rng_state = agent.rng.bit_generator.state
        step = agent.global_step

        agent.evaluate(env, 3)
        agent.evaluate(env, 2, MemoryKind.EC)
        agent.evaluate(env, 2, MemoryKind.RL)

        assert (agent.rl.values == values).all()
        assert agent.ec.snapshot() == ec
        assert list(agent.buffer) == buffer
        assert agent.tracker.counts == counts
        assert agent.rng.bit_generator.state == rng_state
        assert agent.global_step == step

    def test_eval_memory(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        agent = TwoMemoryAgent(MotivatingTree())

        # no scores yet
        assert agent.select_memory_for_eval() == MemoryKind.EC

        agent.tracker.record(MemoryKind.EC, 5.0)
        # RL has no score yet
        assert agent.select_memory_for_eval() == MemoryKind.EC

        agent.tracker.record(MemoryKind.RL, 5.0)
        # ties go to RL
        assert agent.select_memory_for_eval() == MemoryKind.RL

        agent.tracker.record(MemoryKind.EC, 7.0)
        assert agent.select_memory_for_eval() == MemoryKind.EC

        env = MotivatingTree()
        assert agent.run_eval_episode(env).memory_used == MemoryKind.EC
        assert agent.run_eval_episode(env, MemoryKind.RL).memory_used == MemoryKind.RL

    def test_data_sharing_off(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        env = MotivatingTree()

        # only EC episodes: the Q-table never sees a transition
        agent = TwoMemoryAgent(
            env, AgentConfig(schedule=constant(1.0), data_sharing=False, seed=2)
        )
        train(agent, env, 500)
        assert agent.td_updates == 0
        assert (agent.rl.values == 0.0).all()
        assert len(agent.ec) > 0

        # only RL episodes: episodic memory stays empty
        agent = TwoMemoryAgent(
            env, AgentConfig(schedule=constant(0.0), data_sharing=False, seed=2)
        )
        train(agent, env, 500)
        assert len(agent.ec) == 0
        assert agent.td_updates > 0

        # with sharing, the Q-table learns from EC episodes
        agent = TwoMemoryAgent(
            env, AgentConfig(schedule=constant(1.0), data_sharing=True, seed=2)
        )
        train(agent, env, 500)
        assert agent.td_updates > 0
        assert (agent.rl.values != 0.0).any()

    def test_pure_modes(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        env = MotivatingTree()

        agent = TwoMemoryAgent(env, AgentConfig(mode=AgentMode.PURE_EC, seed=4))
        train(agent, env, 2_000)
        assert agent.p_ec == 1.0
        assert agent.td_updates == 0
        assert agent.rl.q_sum(env) == 0.0
        assert agent.tracker.counts[MemoryKind.RL] == 0
        assert agent.select_memory_for_eval() == MemoryKind.EC
        # episodic control ends up on the risky branch
        assert agent.ec.entry(env.state(S2), A2).best_return == 20.0

        agent = TwoMemoryAgent(env, AgentConfig(mode=AgentMode.PURE_RL, seed=4))
        train(agent, env, 500)
        assert agent.p_ec == 0.0
        assert len(agent.ec) == 0
        assert agent.tracker.counts[MemoryKind.EC] == 0
        assert agent.select_memory_for_eval() == MemoryKind.RL

    def test_determinism(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        def trained(seed: int) -> TwoMemoryAgent:
            env = WindyGrid()
            agent = TwoMemoryAgent(
                env,
                AgentConfig(
                    seed=seed,
                    features=FeatureKind.RANDOM_PROJECTION,
                    projection_dim=2,
                ),
            )
            train(agent, env, 1_000)
            return agent

        first, second = trained(11), trained(11)

        assert (first.rl.values == second.rl.values).all()
        assert first.ec.snapshot() == second.ec.snapshot()
        assert list(first.buffer) == list(second.buffer)

    def test_tree_convergence(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        env = MotivatingTree()
        risky = []

        for seed in range(1, 6):
            agent = TwoMemoryAgent(
                env,
                AgentConfig(
                    mode=AgentMode.PURE_RL,
                    alpha=0.1,
                    gamma=1.0,
                    epsilon=0.1,
                    alpha_decay=True,
                    seed=seed,
                ),
            )
            train(agent, env, 20_000)

            # optimal values: 10 for the safe leaf, 5 in expectation for the risky one
            assert 9.5 <= agent.rl[env.state(S2), A1] <= 10.5
            assert agent.rl[env.state(S2), A2] < agent.rl[env.state(S2), A1]
            assert agent.rl.greedy_action(env.state(S1)) == A1
            assert agent.rl.greedy_action(env.state(S2)) == A1

            risky.append(agent.rl[env.state(S2), A2])

        # single runs scatter around 5 (outcomes differ by 30), their mean does not
        assert 4.0 <= sum(risky) / len(risky) <= 6.0

    def test_eval_examples(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        env = MotivatingTree()
        agent = TwoMemoryAgent(env, AgentConfig(seed=8))

        # converged Q-table takes the safe leaf
        agent.rl.values[:] = value_iteration(env)
        assert agent.run_eval_episode(env, MemoryKind.RL).eval_return == 10.0

        # episodic memory takes the risky one, worth 0.5 * -10 + 0.5 * 20
        for episode in tree_episodes():
            agent.ec.update_from_episode(episode, 1.0)

        returns = [
            agent.run_eval_episode(env, MemoryKind.EC).eval_return
            for _ in range(2_000)
        ]
        assert set(returns) <= {-10.0, 20.0}
        assert abs(sum(returns) / len(returns) - 5.0) < 1.5

    def test_training_follows_episodic_memory(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        env = MotivatingTree()
        agent = TwoMemoryAgent(
            env, AgentConfig(mode=AgentMode.PURE_EC, epsilon=0.0, seed=9)
        )

        for episode in tree_episodes():
            agent.ec.update_from_episode(episode, 1.0)

        for _ in range(20):
            assert agent.run_training_episode(env).episode_return in (-10.0, 20.0)

        # always s1 -> s2, then the risky action
        assert [t.state.index for t in agent.buffer] == [S1, S2] * 20
        assert [t.action for t in agent.buffer] == [A1, A2] * 20

    def test_truncated_episodes_not_shared(self: Self):
        # make sure debug mode is enabled
        assert twomem.debug()

        # the goal is out of reach within three steps
        env = WindyGrid(max_episode_steps=3)

        agent = TwoMemoryAgent(env, AgentConfig(schedule=constant(0.0), seed=6))
        train(agent, env, 300)
        assert agent.tracker.counts[MemoryKind.EC] == 0
        assert agent.td_updates > 0
        assert len(agent.ec) == 0

        # capped episodes of episodic control itself are still written
        agent = TwoMemoryAgent(env, AgentConfig(schedule=constant(1.0), seed=6))
        train(agent, env, 300)
        assert len(agent.ec) > 0

        # finished RL episodes are shared
        tree = MotivatingTree()
        agent = TwoMemoryAgent(tree, AgentConfig(schedule=constant(0.0), seed=6))
        train(agent, tree, 100)
        assert agent.tracker.counts[MemoryKind.EC] == 0
        assert len(agent.ec) > 0
