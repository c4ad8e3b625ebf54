"""Tabular Q-learning: epsilon-greedy selection, batch episode updates,
and the introspective (self-encounter) reward blend.

A Q-table is a ``(n_states, 2)`` float array. Play states index the
(own reputation, opponent reputation) pair as ``2*own + opp`` (rows 0-3).
In decentralized mode four judge states follow at rows 4-7, indexing the
judged (action, opponent reputation) pair as ``4 + 2*action + opp``. Both
actions of a state share its row, so the bootstrap max always ranges over
the action set belonging to that state.

Agents accumulate one episode of transitions in a buffer, then apply the
Q-update once per transition in collection order and clear the buffer.
Each agent's transitions chain within the episode: a transition's next
state is that agent's next observed state (play or judge), and the final
transition of the episode is terminal (no bootstrap).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import PayoffParams, payoff_value

N_PLAY_STATES = 4
N_JUDGE_STATES = 4

#: next_state marker for the last transition of an episode
TERMINAL = -1


@dataclass(frozen=True)
class LearnerParams:
    """Q-learning hyperparameters.

    ``alpha`` weights the introspective term of the reward: 0 is plain
    extrinsic payoff, 1 replaces the payoff entirely with the simulated
    self-encounter payoff.
    """

    beta: float = 1e-2
    gamma: float = 0.99
    epsilon: float = 0.1
    alpha: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must be in (0, 1], got {self.beta}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must be in [0, 1), got {self.gamma}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in [0, 1], got {self.epsilon}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")


@dataclass
class Transition:
    state: int
    action: int
    reward: float
    next_state: int = TERMINAL


def play_state_index(own_rep: int, opp_rep: int) -> int:
    return 2 * own_rep + opp_rep


def judge_state_index(judged_action: int, judged_opp_rep: int) -> int:
    return N_PLAY_STATES + 2 * judged_action + judged_opp_rep


def new_qtable(decentralized: bool = False) -> np.ndarray:
    """Zero-initialized table: 8 entries centralized, 16 decentralized."""
    n = N_PLAY_STATES + (N_JUDGE_STATES if decentralized else 0)
    return np.zeros((n, 2), dtype=np.float64)


def greedy_action(q: np.ndarray, state: int) -> int:
    """Argmax over the state's two actions; ties break to action 0 (defect)."""
    return 0 if q[state, 0] >= q[state, 1] else 1


def select_action(q: np.ndarray, state: int, epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy draw: explore uniformly with probability epsilon
    (the uniform draw may coincide with the greedy action)."""
    if rng.random() < epsilon:
        return 0 if rng.random() < 0.5 else 1
    return greedy_action(q, state)


def q_update(q: np.ndarray, t: Transition, beta: float, gamma: float) -> None:
    """One-step update: q(s,a) += beta * (r + gamma * max_a' q(s',a') - q(s,a)).

    A terminal next state contributes no bootstrap.
    """
    boot = 0.0
    if t.next_state != TERMINAL:
        boot = gamma * max(q[t.next_state, 0], q[t.next_state, 1])
    q[t.state, t.action] += beta * (t.reward + boot - q[t.state, t.action])


def learn_episode(q: np.ndarray, buffer: list[Transition], params: LearnerParams) -> None:
    """Apply q_update once per transition in collection order, then clear."""
    for t in buffer:
        q_update(q, t, params.beta, params.gamma)
    buffer.clear()


def introspective_reward(
    extrinsic: float,
    q: np.ndarray,
    own_rep: int,
    params: LearnerParams,
    payoffs: PayoffParams,
    rng: np.random.Generator,
) -> float:
    """Blend the extrinsic payoff with a simulated self-encounter.

    The agent and an identical copy each select an action epsilon-greedily
    on state (own_rep, own_rep); the self payoff S is the focal payoff of
    that pair. Returns (1 - alpha) * extrinsic + alpha * S. The simulation
    consumes rng draws but never touches reputations or buffers.
    """
    s = play_state_index(own_rep, own_rep)
    a_self = select_action(q, s, params.epsilon, rng)
    a_copy = select_action(q, s, params.epsilon, rng)
    s_value = payoff_value(a_self, a_copy, payoffs.b, payoffs.c)
    return (1.0 - params.alpha) * extrinsic + params.alpha * s_value
