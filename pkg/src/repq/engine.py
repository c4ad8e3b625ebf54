"""Simulation engine: configuration, episode orchestration, and metrics.

A run is strictly sequential and deterministic given its configuration:
the kernel RNG is seeded once from ``rng_seed`` and every draw happens in
a fixed order. Parallelism only exists across independent runs (separate
processes), never inside one.

Reported metrics use extrinsic payoffs only, so cooperation levels stay
comparable across introspection weights. ``mean_reward`` is the population
sum of payoffs divided by the number of encounter participations (two per
encounter); ``coop_level`` divides that by the mutual-cooperation payoff
b - c, which by pairwise payoff conservation already lies in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import kernels
from .game import PayoffParams
from .learning import LearnerParams

MODES = ("centralized", "decentralized")
SEEDED_JUDGE_MODES = ("norm", "excluded", "random", "skip")

_JUDGE_CODE = {
    "norm": kernels.JUDGE_SEEDS_NORM,
    "excluded": kernels.JUDGE_SEEDS_EXCLUDED,
    "random": kernels.JUDGE_SEEDS_RANDOM,
    "skip": kernels.JUDGE_SEEDS_SKIP,
}


@dataclass(frozen=True)
class SimConfig:
    """Full parameterization of one simulation run.

    ``seed_fraction`` of the population (rounded to the nearest agent) is
    frozen to ``seeded_rule``; the rest are Q-learners. In decentralized
    mode every encounter is judged by a random third party, and
    ``seeded_judge`` controls what happens when that party is seeded:
    apply its fixed ``seeded_norm``, be excluded from the draw, judge
    uniformly at random, or skip the judgment entirely.
    """

    episodes: int
    n_agents: int = 10
    encounters_per_episode: int = 200
    payoff: PayoffParams = field(default_factory=PayoffParams)
    chi: float = 1e-3
    learner: LearnerParams = field(default_factory=LearnerParams)
    seed_fraction: float = 0.0
    mode: str = "centralized"
    norm: int = 9
    seeded_rule: int = 5
    seeded_norm: int = 9
    seeded_judge: str = "excluded"
    rng_seed: int = 0
    metric_window: float = 0.5

    def __post_init__(self) -> None:
        if self.n_agents < 2:
            raise ValueError(f"n_agents must be >= 2, got {self.n_agents}")
        if self.episodes < 0:
            raise ValueError(f"episodes must be >= 0, got {self.episodes}")
        if self.encounters_per_episode < 1:
            raise ValueError(
                f"encounters_per_episode must be >= 1, got {self.encounters_per_episode}"
            )
        if not 0.0 <= self.chi < 0.5:
            raise ValueError(f"chi must be in [0, 0.5), got {self.chi}")
        if not 0.0 <= self.seed_fraction <= 1.0:
            raise ValueError(f"seed_fraction must be in [0, 1], got {self.seed_fraction}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.seeded_judge not in SEEDED_JUDGE_MODES:
            raise ValueError(
                f"seeded_judge must be one of {SEEDED_JUDGE_MODES}, got {self.seeded_judge!r}"
            )
        for name in ("norm", "seeded_rule", "seeded_norm"):
            code = getattr(self, name)
            if not 0 <= code <= 15:
                raise ValueError(f"{name} must be in [0, 15], got {code}")
        if not 0.0 < self.metric_window <= 1.0:
            raise ValueError(f"metric_window must be in (0, 1], got {self.metric_window}")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError(f"rng_seed must be an unsigned 64-bit integer, got {self.rng_seed}")

    @property
    def n_seeded(self) -> int:
        return int(math.floor(self.seed_fraction * self.n_agents + 0.5))

    @property
    def n_learners(self) -> int:
        return self.n_agents - self.n_seeded

    @property
    def decentralized(self) -> bool:
        return self.mode == "decentralized"


@dataclass
class EpisodeRecord:
    """Per-episode population metrics; censuses count learners only."""

    episode_index: int
    mean_reward: float
    coop_level: float
    learner_mean_reward: float
    rule_census: tuple
    norm_census: Optional[tuple] = None


class SimState:
    """Mutable array state of one run; owned by exactly one simulation.

    Seeded agents occupy the leading indices. Q-tables always carry the
    full 8 state rows so the kernels stay shape-stable; :meth:`qtable`
    returns the contract view (4 play rows centralized, 8 decentralized).
    """

    def __init__(self, config: SimConfig):
        self.config = config
        n = config.n_agents
        # per-agent, per-episode transition capacity; seeded agents never record
        cap = 2 * config.encounters_per_episode if config.n_learners > 0 else 1
        self.q = np.zeros((n, 8, 2), dtype=np.float64)
        self.reps = np.zeros(n, dtype=np.int64)
        self.seeded = np.zeros(n, dtype=np.bool_)
        self.seeded[: config.n_seeded] = True
        self.seed_rules = np.full(n, config.seeded_rule, dtype=np.int64)
        self.seed_norms = np.full(n, config.seeded_norm, dtype=np.int64)
        self.buf_state = np.zeros((n, cap), dtype=np.int64)
        self.buf_action = np.zeros((n, cap), dtype=np.int64)
        self.buf_reward = np.zeros((n, cap), dtype=np.float64)
        self.buf_next = np.zeros((n, cap), dtype=np.int64)
        self.buf_len = np.zeros(n, dtype=np.int64)
        self.episode_index = 0

    def seed_rng(self) -> None:
        """Seed the kernel RNG stream from the config's 64-bit seed."""
        s = self.config.rng_seed
        kernels.seed_rng((s ^ (s >> 32)) & 0xFFFFFFFF)

    def qtable(self, agent: int) -> np.ndarray:
        rows = 8 if self.config.decentralized else 4
        return self.q[agent, :rows, :]

    def buffer_length(self, agent: int) -> int:
        return int(self.buf_len[agent])

    def _args(self):
        return (
            self.q, self.reps, self.seeded, self.seed_rules, self.seed_norms,
            self.buf_state, self.buf_action, self.buf_reward, self.buf_next,
            self.buf_len,
        )

    def _params(self):
        c = self.config
        return (
            c.payoff.b, c.payoff.c, c.chi, c.learner.beta, c.learner.gamma,
            c.learner.epsilon, c.learner.alpha,
            kernels.MODE_DECENTRALIZED if c.decentralized else kernels.MODE_CENTRALIZED,
            c.norm, _JUDGE_CODE[c.seeded_judge],
        )


def run_encounter(state: SimState, i: int, j: int) -> tuple[float, float]:
    """Play one encounter between agents ``i`` and ``j`` on live state.

    Both parties act on (own, opponent) reputations, both are judged
    against pre-encounter reputations, and learner transitions land in
    the buffers. Returns the two extrinsic payoffs.
    """
    n = state.config.n_agents
    if i == j:
        raise ValueError("an agent cannot encounter itself")
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"agent indices must be in [0, {n}), got ({i}, {j})")
    cap = state.buf_state.shape[1]
    if state.config.n_learners > 0 and int(state.buf_len.max()) + 2 > cap:
        raise RuntimeError(
            "episode buffers are full; buffers hold one episode "
            f"({state.config.encounters_per_episode} encounters) before learning"
        )
    b, cost, chi, _, _, eps, alpha, mode, norm, judge_mode = state._params()
    pay_i, pay_j = kernels.encounter_step(
        *state._args(), i, j, b, cost, chi, eps, alpha, mode, norm, judge_mode
    )
    return float(pay_i), float(pay_j)


def run_episode(state: SimState) -> EpisodeRecord:
    """Run one full episode on live state and return its record."""
    c = state.config
    metrics = np.zeros(3, dtype=np.float64)
    rule_census = np.zeros(16, dtype=np.int64)
    norm_census = np.zeros(16, dtype=np.int64)
    b, cost, chi, beta, gamma, eps, alpha, mode, norm, judge_mode = state._params()
    kernels.episode_step(
        *state._args(),
        c.encounters_per_episode, b, cost, chi, beta, gamma, eps, alpha,
        mode, norm, judge_mode, metrics, rule_census, norm_census,
    )
    record = EpisodeRecord(
        episode_index=state.episode_index,
        mean_reward=float(metrics[0]),
        coop_level=float(metrics[1]),
        learner_mean_reward=float(metrics[2]),
        rule_census=tuple(int(x) for x in rule_census),
        norm_census=tuple(int(x) for x in norm_census) if c.decentralized else None,
    )
    state.episode_index += 1
    return record


@dataclass
class RunResult:
    """Outcome of :func:`run_simulation`: per-episode arrays, the final
    Q-tables (contract views), and the summary dictionary."""

    config: SimConfig
    mean_reward: np.ndarray
    coop_level: np.ndarray
    learner_mean_reward: np.ndarray
    rule_census: np.ndarray
    norm_census: Optional[np.ndarray]
    qtables: list
    summary: dict

    def records(self) -> list[EpisodeRecord]:
        out = []
        for ep in range(len(self.coop_level)):
            out.append(
                EpisodeRecord(
                    episode_index=ep,
                    mean_reward=float(self.mean_reward[ep]),
                    coop_level=float(self.coop_level[ep]),
                    learner_mean_reward=float(self.learner_mean_reward[ep]),
                    rule_census=tuple(int(x) for x in self.rule_census[ep]),
                    norm_census=(
                        tuple(int(x) for x in self.norm_census[ep])
                        if self.norm_census is not None
                        else None
                    ),
                )
            )
        return out


def metric_window_start(episodes: int, window: float) -> int:
    """First episode inside the final averaging window."""
    return episodes - max(1, int(math.ceil(episodes * window))) if episodes else 0


def run_simulation(config: SimConfig) -> RunResult:
    """Run the configured number of episodes on a fresh state.

    Deterministic: equal configs produce bit-identical outputs. The summary
    holds ``coop_final`` (mean ``coop_level`` over the final
    ``metric_window`` fraction of episodes), its learner-only counterpart,
    and the final-policy censuses.
    """
    state = SimState(config)
    state.seed_rng()
    eps_total = config.episodes

    metrics = np.zeros((eps_total, 3), dtype=np.float64)
    rule_census = np.zeros((eps_total, 16), dtype=np.int64)
    norm_census = np.zeros((eps_total, 16), dtype=np.int64)

    if eps_total > 0:
        b, cost, chi, beta, gamma, eps, alpha, mode, norm, judge_mode = state._params()
        kernels.run_steps(
            *state._args(),
            eps_total, config.encounters_per_episode,
            b, cost, chi, beta, gamma, eps, alpha, mode, norm, judge_mode,
            metrics, rule_census, norm_census,
        )
        state.episode_index = eps_total

    qtables = [state.qtable(a).copy() for a in range(config.n_agents)]

    if eps_total == 0:
        summary = {"no_data": True, "episodes": 0}
    else:
        start = metric_window_start(eps_total, config.metric_window)
        learner_slice = metrics[start:, 2]
        has_learner_data = not np.all(np.isnan(learner_slice))
        summary = {
            "no_data": False,
            "episodes": eps_total,
            "window_start": start,
            "coop_final": float(metrics[start:, 1].mean()),
            "coop_final_learners": (
                float(np.nanmean(learner_slice)) / config.payoff.mutual
                if has_learner_data
                else None
            ),
            "mean_reward_final": float(metrics[start:, 0].mean()),
            "final_rule_census": [int(x) for x in rule_census[-1]],
            "final_norm_census": (
                [int(x) for x in norm_census[-1]] if config.decentralized else None
            ),
            "n_learners": config.n_learners,
            "n_seeded": config.n_seeded,
        }

    return RunResult(
        config=config,
        mean_reward=metrics[:, 0],
        coop_level=metrics[:, 1],
        learner_mean_reward=metrics[:, 2],
        rule_census=rule_census,
        norm_census=norm_census if config.decentralized else None,
        qtables=qtables,
        summary=summary,
    )


def with_seed(config: SimConfig, rng_seed: int) -> SimConfig:
    """The same configuration under a different RNG seed."""
    return replace(config, rng_seed=rng_seed)
