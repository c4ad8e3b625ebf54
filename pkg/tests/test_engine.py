"""Sim engine: encounters, episodes, whole runs, and their invariants."""

import numpy as np
import pytest

from repq.engine import (
    SimConfig,
    SimState,
    metric_window_start,
    run_encounter,
    run_episode,
    run_simulation,
)
from repq.game import PayoffParams
from repq.learning import LearnerParams


def make_state(**kwargs) -> SimState:
    defaults = dict(episodes=1, rng_seed=1)
    defaults.update(kwargs)
    state = SimState(SimConfig(**defaults))
    state.seed_rng()
    return state


class TestRunEncounter:
    def test_rejects_self_encounter(self):
        state = make_state()
        with pytest.raises(ValueError):
            run_encounter(state, 3, 3)

    def test_rejects_out_of_range(self):
        state = make_state()
        with pytest.raises(ValueError):
            run_encounter(state, 0, 10)

    def test_centralized_norm9_mutual_cooperation(self):
        # both seeded cooperators with reputation 1: payoffs (b-c, b-c), reps stay 1
        state = make_state(n_agents=2, seed_fraction=1.0, seeded_rule=15, norm=9, chi=0.0)
        state.reps[:] = 1
        pay = run_encounter(state, 0, 1)
        assert pay == (4.0, 4.0)
        assert list(state.reps) == [1, 1]

    def test_centralized_norm0_always_bad(self):
        state = make_state(n_agents=2, seed_fraction=1.0, seeded_rule=15, norm=0, chi=0.0)
        state.reps[:] = 1
        run_encounter(state, 0, 1)
        assert list(state.reps) == [0, 0]

    def test_judgments_use_pre_encounter_reputations(self):
        # all-defect pair under norm 9 alternates reputations in lockstep
        state = make_state(n_agents=2, seed_fraction=1.0, seeded_rule=0, norm=9, chi=0.0)
        state.reps[:] = 1
        expected = [0, 1] * 5
        for want in expected:
            run_encounter(state, 0, 1)  # defect vs rep r -> new rep = 1 - r
            assert list(state.reps) == [want, want]

    def test_decentralized_seeded_judge_justified_defection(self):
        # third party with norm 9 judges a defection against a rep-0 opponent as good
        state = make_state(
            n_agents=3,
            seed_fraction=1.0,
            seeded_rule=0,
            mode="decentralized",
            seeded_judge="norm",
            seeded_norm=9,
            chi=0.0,
        )
        state.reps[:] = 0
        run_encounter(state, 0, 1)
        assert list(state.reps[:2]) == [1, 1]

    def test_learner_buffer_gets_play_transition(self):
        state = make_state(n_agents=2, seed_fraction=0.0, chi=0.0)
        state.reps[:] = 1
        run_encounter(state, 0, 1)
        assert state.buffer_length(0) == 1
        assert state.buffer_length(1) == 1

    def test_decentralized_learner_judge_records_two_transitions(self):
        state = make_state(n_agents=3, seed_fraction=0.0, mode="decentralized", chi=0.0)
        state.reps[:] = 1
        for k in range(10):
            run_encounter(state, 0, 1)  # agent 2 is always the judge
            assert state.buffer_length(2) == 2 * (k + 1)
        # judge transitions carry judge states and exactly zero reward
        m = state.buffer_length(2)
        assert np.all(state.buf_reward[2, :m] == 0.0)
        assert np.all(state.buf_state[2, :m] >= 4)

    def test_play_rewards_equal_payoffs_without_introspection(self):
        state = make_state(n_agents=2, seed_fraction=0.0, chi=0.0)
        state.reps[:] = 1
        payoffs = [run_encounter(state, 0, 1) for _ in range(20)]
        for agent in (0, 1):
            m = state.buffer_length(agent)
            recorded = state.buf_reward[agent, :m]
            expected = [p[agent] for p in payoffs]
            assert np.allclose(recorded, expected, atol=0, rtol=0)

    def test_payoff_conservation_random_encounters(self):
        # pair sum is (b-c) * cooperators: one of {0, b-c, 2(b-c)}
        # buffers must hold all 10^4 encounters when no learning pass runs
        state = make_state(
            n_agents=10, seed_fraction=0.2, episodes=1, encounters_per_episode=10_000
        )
        params = state.config.payoff
        rng = np.random.default_rng(0)
        valid = {0.0, params.mutual, 2 * params.mutual}
        for _ in range(10_000):
            i, j = rng.choice(10, size=2, replace=False)
            pay_i, pay_j = run_encounter(state, int(i), int(j))
            assert min(abs(pay_i + pay_j - v) for v in valid) < 1e-12


class TestRunEpisode:
    def test_all_cooperators_reach_ceiling(self):
        state = make_state(n_agents=10, seed_fraction=1.0, seeded_rule=15, episodes=1)
        record = run_episode(state)
        assert record.coop_level == pytest.approx(1.0)
        assert record.mean_reward == pytest.approx(state.config.payoff.mutual)

    def test_all_defectors_floor(self):
        state = make_state(n_agents=10, seed_fraction=1.0, seeded_rule=0, episodes=1)
        record = run_episode(state)
        assert record.coop_level == 0.0

    def test_seeded_reciprocators_on_good_labels_cooperate_fully(self):
        # rule 5 + norm 9 + chi 0 from all-good reputations never leaves (C, C)
        state = make_state(
            n_agents=10, seed_fraction=1.0, seeded_rule=5, norm=9, chi=0.0, episodes=1
        )
        state.reps[:] = 1
        total = 0.0
        for _ in range(200):
            pay = run_encounter(state, 0, 1)
            total += sum(pay)
            assert list(state.reps[:2]) == [1, 1]
        assert total == pytest.approx(200 * 2 * state.config.payoff.mutual)

    def test_buffers_cleared_after_learning(self):
        state = make_state(n_agents=4, seed_fraction=0.0, episodes=1)
        run_episode(state)
        assert all(state.buffer_length(a) == 0 for a in range(4))

    def test_census_counts_learners(self):
        state = make_state(n_agents=10, seed_fraction=0.2, episodes=1)
        record = run_episode(state)
        assert sum(record.rule_census) == state.config.n_learners
        assert record.norm_census is None

    def test_decentralized_record_has_norm_census(self):
        state = make_state(n_agents=10, seed_fraction=0.0, mode="decentralized", episodes=1)
        record = run_episode(state)
        assert sum(record.norm_census) == 10


class TestRunSimulation:
    def test_zero_episodes_flags_no_data(self):
        result = run_simulation(SimConfig(episodes=0, rng_seed=1))
        assert result.summary["no_data"] is True
        assert len(result.coop_level) == 0

    def test_determinism_bit_identical(self):
        cfg = SimConfig(
            episodes=40,
            rng_seed=987654321,
            seed_fraction=0.2,
            mode="decentralized",
            learner=LearnerParams(alpha=0.3),
        )
        a = run_simulation(cfg)
        b = run_simulation(cfg)
        assert np.array_equal(a.coop_level, b.coop_level)
        assert np.array_equal(a.mean_reward, b.mean_reward)
        assert np.array_equal(a.rule_census, b.rule_census)
        assert all(np.array_equal(x, y) for x, y in zip(a.qtables, b.qtables))
        assert a.summary == b.summary

    def test_different_seeds_differ(self):
        cfg = SimConfig(episodes=40, rng_seed=1)
        a = run_simulation(cfg)
        b = run_simulation(SimConfig(episodes=40, rng_seed=2))
        assert not np.array_equal(a.coop_level, b.coop_level)

    def test_seeded_agents_never_learn(self):
        cfg = SimConfig(episodes=30, rng_seed=5, seed_fraction=0.5)
        result = run_simulation(cfg)
        for agent in range(cfg.n_seeded):
            assert not result.qtables[agent].any()

    def test_coop_level_needs_no_clamping(self):
        cfg = SimConfig(episodes=60, rng_seed=9, seed_fraction=0.3)
        result = run_simulation(cfg)
        assert np.all(result.coop_level >= 0.0)
        assert np.all(result.coop_level <= 1.0)
        assert np.array_equal(result.coop_level, np.clip(result.coop_level, 0.0, 1.0))

    def test_summary_window_mean(self):
        cfg = SimConfig(episodes=4, rng_seed=3, metric_window=0.5)
        result = run_simulation(cfg)
        assert result.summary["coop_final"] == pytest.approx(result.coop_level[2:].mean())

    def test_metric_window_start(self):
        assert metric_window_start(10, 0.5) == 5
        assert metric_window_start(10, 1.0) == 0
        assert metric_window_start(0, 0.5) == 0
        assert metric_window_start(3, 0.5) == 1

    def test_records_materialization(self):
        cfg = SimConfig(episodes=5, rng_seed=1)
        result = run_simulation(cfg)
        records = result.records()
        assert len(records) == 5
        assert records[3].coop_level == pytest.approx(float(result.coop_level[3]))

    def test_learner_metrics_tracked(self):
        cfg = SimConfig(episodes=20, rng_seed=4, seed_fraction=0.5)
        result = run_simulation(cfg)
        assert np.isfinite(result.learner_mean_reward).all()
        assert "coop_final_learners" in result.summary

    def test_learner_coop_normalized_like_population_coop(self):
        # with no seeded agents the learner-only level equals the population level
        cfg = SimConfig(episodes=20, rng_seed=4, seed_fraction=0.0)
        result = run_simulation(cfg)
        assert result.summary["coop_final_learners"] == pytest.approx(
            result.summary["coop_final"]
        )


class TestSimConfig:
    def test_seed_count_rounding(self):
        assert SimConfig(episodes=1, seed_fraction=0.2).n_seeded == 2
        assert SimConfig(episodes=1, seed_fraction=0.25).n_seeded == 3
        assert SimConfig(episodes=1, seed_fraction=0.0).n_seeded == 0
        assert SimConfig(episodes=1, seed_fraction=1.0).n_seeded == 10

    def test_validation_messages_name_fields(self):
        with pytest.raises(ValueError, match="chi"):
            SimConfig(episodes=1, chi=0.5)
        with pytest.raises(ValueError, match="n_agents"):
            SimConfig(episodes=1, n_agents=1)
        with pytest.raises(ValueError, match="mode"):
            SimConfig(episodes=1, mode="hybrid")
        with pytest.raises(ValueError, match="seed_fraction"):
            SimConfig(episodes=1, seed_fraction=1.5)
