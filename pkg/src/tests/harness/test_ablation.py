from dataclasses import replace
from typing_extensions import Self

import twomem
from twomem.agent import AgentConfig, AgentMode
from twomem.harness import ExperimentConfig, ablation_suite, ablation_variants
from twomem.learning import Schedule


def base_config(tmp_path, **kwargs) -> ExperimentConfig:
    return ExperimentConfig(
        env_name="motivating_tree",
        agent=AgentConfig(schedule=Schedule(temperature=40.0)),
        total_steps=200,
        eval_interval=100,
        eval_episodes=1,
        seeds=(1, 2),
        output_dir=tmp_path,
        **kwargs,
    )


class TestAblation:
    def test_variants(self: Self, tmp_path):
        # make sure debug mode is enabled
        assert twomem.debug()

        variants = ablation_variants(base_config(tmp_path))

        assert [v.label for v in variants] == [
            "2m-ds-decayed",
            "2m-ds-constant",
            "2m-ds-increased",
            "2m-nods-decayed",
            "2m-nods-constant",
            "2m-nods-increased",
            "pure_ec",
            "pure_rl",
        ]

        two_memory = variants[:6]
        assert all(v.agent.mode == AgentMode.TWO_MEMORY for v in two_memory)
        assert [v.agent.data_sharing for v in two_memory] == [True] * 3 + [False] * 3
        assert [
            (v.agent.schedule.p_start, v.agent.schedule.p_end) for v in two_memory
        ] == [(0.9, 0.1), (0.1, 0.1), (0.1, 0.9)] * 2
        # everything else comes from the base
        assert all(v.agent.schedule.temperature == 40.0 for v in variants)
        assert all(v.seeds == (1, 2) for v in variants)
        assert all(v.total_steps == 200 for v in variants)

        assert variants[6].agent.mode == AgentMode.PURE_EC
        assert variants[7].agent.mode == AgentMode.PURE_RL

        named = ablation_variants(replace(base_config(tmp_path), name="grid"))
        assert named[0].label == "grid-2m-ds-decayed"
        assert named[-1].label == "grid-pure_rl"

    def test_suite(self: Self, tmp_path):
        # make sure debug mode is enabled
        assert twomem.debug()

        summary = ablation_suite(base_config(tmp_path))

        assert len(summary.labels()) == 8
        assert all(row.n == 2 for row in summary.rows)
        # two checkpoints per variant
        assert len(summary) == 16
        assert (tmp_path / "summary.csv").exists()
        # one CSV per variant and seed
        assert len(list(tmp_path.glob("*_seed*.csv"))) == 16
