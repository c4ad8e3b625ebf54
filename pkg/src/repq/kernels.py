"""Hot simulation kernels.

Everything here is numba-compatible and decorated with :func:`maybe_njit`,
so the same code runs compiled (default) or as plain Python/numpy when
``REPQ_DISABLE_JIT`` is set. Random draws come from the kernel-side
``np.random`` stream: numba's implementation matches numpy's legacy global
generator draw-for-draw, which keeps the two paths bit-identical.

The stream is process-global, so at most one simulation may be stepped at
a time per process; the CLI parallelizes across worker processes instead.

State row layout per agent table: rows 0-3 play states (2*own + opp),
rows 4-7 judge states (4 + 2*action + opp). Judge rows exist but stay
untouched in centralized mode.

Mode codes: 0 centralized, 1 decentralized. Seeded-judge codes for the
decentralized third-party draw: 0 seeds judge with their fixed norm,
1 seeds are excluded (judge drawn among non-party learners), 2 seeds
judge uniformly at random, 3 the judgment is skipped when a seed is drawn.
"""

from __future__ import annotations

import numpy as np

from ._jit import maybe_njit
from .game import code_bit, payoff_value

MODE_CENTRALIZED = 0
MODE_DECENTRALIZED = 1

JUDGE_SEEDS_NORM = 0
JUDGE_SEEDS_EXCLUDED = 1
JUDGE_SEEDS_RANDOM = 2
JUDGE_SEEDS_SKIP = 3

TERMINAL = -1


@maybe_njit(cache=True)
def seed_rng(seed32: int) -> None:
    np.random.seed(seed32)


@maybe_njit(cache=True, inline="always")
def eps_greedy(q: np.ndarray, agent: int, state: int, eps: float) -> int:
    if np.random.random() < eps:
        return 0 if np.random.random() < 0.5 else 1
    return 0 if q[agent, state, 0] >= q[agent, state, 1] else 1


@maybe_njit(cache=True, inline="always")
def _record(
    bs: np.ndarray,
    ba: np.ndarray,
    br: np.ndarray,
    bnext: np.ndarray,
    buf_len: np.ndarray,
    agent: int,
    state: int,
    action: int,
    reward: float,
) -> None:
    # chain: the previous transition's next_state is this transition's state
    m = buf_len[agent]
    bs[agent, m] = state
    ba[agent, m] = action
    br[agent, m] = reward
    bnext[agent, m] = TERMINAL
    if m > 0:
        bnext[agent, m - 1] = state
    buf_len[agent] = m + 1


@maybe_njit(cache=True)
def encounter_step(
    q: np.ndarray,
    reps: np.ndarray,
    seeded: np.ndarray,
    seed_rules: np.ndarray,
    seed_norms: np.ndarray,
    bs: np.ndarray,
    ba: np.ndarray,
    br: np.ndarray,
    bnext: np.ndarray,
    buf_len: np.ndarray,
    i: int,
    j: int,
    b: float,
    c: float,
    chi: float,
    eps: float,
    alpha: float,
    mode: int,
    norm: int,
    judge_mode: int,
):
    """One encounter between distinct agents ``i`` and ``j``.

    Chooses actions, pays off, judges both parties against their pre-encounter
    reputations (simultaneous write), and records learner transitions with the
    introspection-blended reward. Returns (payoff_i, payoff_j).
    """
    n = reps.shape[0]
    ri = reps[i]
    rj = reps[j]

    if seeded[i]:
        ai = code_bit(seed_rules[i], ri, rj)
    else:
        ai = eps_greedy(q, i, 2 * ri + rj, eps)
    if seeded[j]:
        aj = code_bit(seed_rules[j], rj, ri)
    else:
        aj = eps_greedy(q, j, 2 * rj + ri, eps)

    pay_i = payoff_value(ai, aj, b, c)
    pay_j = payoff_value(aj, ai, b, c)

    # judgments from pre-encounter reputations; both parties judged
    judged = True
    di = ri
    dj = rj
    if mode == MODE_CENTRALIZED:
        di = code_bit(norm, ai, rj)
        dj = code_bit(norm, aj, ri)
    else:
        g = -1
        if judge_mode == JUDGE_SEEDS_EXCLUDED:
            ncand = 0
            for t in range(n):
                if t != i and t != j and not seeded[t]:
                    ncand += 1
            if ncand > 0:
                pick = int(np.random.random() * ncand)
                for t in range(n):
                    if t != i and t != j and not seeded[t]:
                        if pick == 0:
                            g = t
                            break
                        pick -= 1
        else:
            g = int(np.random.random() * (n - 2))
            lo, hi = (i, j) if i < j else (j, i)
            if g >= lo:
                g += 1
            if g >= hi:
                g += 1

        if g < 0:
            judged = False
        elif seeded[g]:
            if judge_mode == JUDGE_SEEDS_RANDOM:
                di = 0 if np.random.random() < 0.5 else 1
                dj = 0 if np.random.random() < 0.5 else 1
            elif judge_mode == JUDGE_SEEDS_SKIP:
                judged = False
            else:
                di = code_bit(seed_norms[g], ai, rj)
                dj = code_bit(seed_norms[g], aj, ri)
        else:
            jsi = 4 + 2 * ai + rj
            di = eps_greedy(q, g, jsi, eps)
            _record(bs, ba, br, bnext, buf_len, g, jsi, di, 0.0)
            jsj = 4 + 2 * aj + ri
            dj = eps_greedy(q, g, jsj, eps)
            _record(bs, ba, br, bnext, buf_len, g, jsj, dj, 0.0)

    if judged:
        if np.random.random() < chi:
            di = 1 - di
        if np.random.random() < chi:
            dj = 1 - dj

    # learner play transitions; the self-encounter uses the pre-encounter
    # own reputation and must not touch reputations or buffers
    if not seeded[i]:
        s_self = 2 * ri + ri
        a1 = eps_greedy(q, i, s_self, eps)
        a2 = eps_greedy(q, i, s_self, eps)
        r_i = (1.0 - alpha) * pay_i + alpha * payoff_value(a1, a2, b, c)
        _record(bs, ba, br, bnext, buf_len, i, 2 * ri + rj, ai, r_i)
    if not seeded[j]:
        s_self = 2 * rj + rj
        a1 = eps_greedy(q, j, s_self, eps)
        a2 = eps_greedy(q, j, s_self, eps)
        r_j = (1.0 - alpha) * pay_j + alpha * payoff_value(a1, a2, b, c)
        _record(bs, ba, br, bnext, buf_len, j, 2 * rj + ri, aj, r_j)

    reps[i] = di
    reps[j] = dj
    return pay_i, pay_j


@maybe_njit(cache=True)
def learn_pass(
    q: np.ndarray,
    seeded: np.ndarray,
    bs: np.ndarray,
    ba: np.ndarray,
    br: np.ndarray,
    bnext: np.ndarray,
    buf_len: np.ndarray,
    beta: float,
    gamma: float,
) -> None:
    """Batch Q-update over each learner's buffer in collection order; clears buffers."""
    n = q.shape[0]
    for agent in range(n):
        if seeded[agent]:
            buf_len[agent] = 0
            continue
        m = buf_len[agent]
        for t in range(m):
            s = bs[agent, t]
            a = ba[agent, t]
            sn = bnext[agent, t]
            boot = 0.0
            if sn != TERMINAL:
                boot = gamma * max(q[agent, sn, 0], q[agent, sn, 1])
            q[agent, s, a] += beta * (br[agent, t] + boot - q[agent, s, a])
        buf_len[agent] = 0


@maybe_njit(cache=True, inline="always")
def greedy_bit(q: np.ndarray, agent: int, state: int) -> int:
    return 0 if q[agent, state, 0] >= q[agent, state, 1] else 1


@maybe_njit(cache=True)
def extract_rule_code(q: np.ndarray, agent: int) -> int:
    code = 0
    for own in range(2):
        for opp in range(2):
            code |= greedy_bit(q, agent, 2 * own + opp) << (3 - 2 * own - opp)
    return code


@maybe_njit(cache=True)
def extract_norm_code(q: np.ndarray, agent: int) -> int:
    code = 0
    for act in range(2):
        for opp in range(2):
            code |= greedy_bit(q, agent, 4 + 2 * act + opp) << (3 - 2 * act - opp)
    return code


@maybe_njit(cache=True)
def episode_step(
    q: np.ndarray,
    reps: np.ndarray,
    seeded: np.ndarray,
    seed_rules: np.ndarray,
    seed_norms: np.ndarray,
    bs: np.ndarray,
    ba: np.ndarray,
    br: np.ndarray,
    bnext: np.ndarray,
    buf_len: np.ndarray,
    n_encounters: int,
    b: float,
    c: float,
    chi: float,
    beta: float,
    gamma: float,
    eps: float,
    alpha: float,
    mode: int,
    norm: int,
    judge_mode: int,
    metrics: np.ndarray,
    rule_census: np.ndarray,
    norm_census: np.ndarray,
):
    """One full episode: reset reputations, run encounters, learn, measure.

    ``metrics`` receives (mean_reward, coop_level, learner_mean_reward);
    ``rule_census``/``norm_census`` receive 16 learner counts each.
    """
    n = reps.shape[0]
    for agent in range(n):
        reps[agent] = 1 if np.random.random() < 0.5 else 0
        buf_len[agent] = 0

    total = 0.0
    learner_total = 0.0
    learner_parts = 0
    for _ in range(n_encounters):
        i = int(np.random.random() * n)
        j = int(np.random.random() * (n - 1))
        if j >= i:
            j += 1
        pay_i, pay_j = encounter_step(
            q, reps, seeded, seed_rules, seed_norms,
            bs, ba, br, bnext, buf_len,
            i, j, b, c, chi, eps, alpha, mode, norm, judge_mode,
        )
        total += pay_i + pay_j
        if not seeded[i]:
            learner_total += pay_i
            learner_parts += 1
        if not seeded[j]:
            learner_total += pay_j
            learner_parts += 1

    learn_pass(q, seeded, bs, ba, br, bnext, buf_len, beta, gamma)

    mean_reward = total / (2.0 * n_encounters)
    metrics[0] = mean_reward
    metrics[1] = mean_reward / (b - c)
    metrics[2] = learner_total / learner_parts if learner_parts > 0 else np.nan

    for k in range(16):
        rule_census[k] = 0
        norm_census[k] = 0
    for agent in range(n):
        if seeded[agent]:
            continue
        rule_census[extract_rule_code(q, agent)] += 1
        if mode == MODE_DECENTRALIZED:
            norm_census[extract_norm_code(q, agent)] += 1


@maybe_njit(cache=True)
def run_steps(
    q: np.ndarray,
    reps: np.ndarray,
    seeded: np.ndarray,
    seed_rules: np.ndarray,
    seed_norms: np.ndarray,
    bs: np.ndarray,
    ba: np.ndarray,
    br: np.ndarray,
    bnext: np.ndarray,
    buf_len: np.ndarray,
    episodes: int,
    n_encounters: int,
    b: float,
    c: float,
    chi: float,
    beta: float,
    gamma: float,
    eps: float,
    alpha: float,
    mode: int,
    norm: int,
    judge_mode: int,
    metrics_out: np.ndarray,
    rule_census_out: np.ndarray,
    norm_census_out: np.ndarray,
) -> None:
    """Whole-run loop; fills per-episode metric and census arrays."""
    for ep in range(episodes):
        episode_step(
            q, reps, seeded, seed_rules, seed_norms,
            bs, ba, br, bnext, buf_len,
            n_encounters, b, c, chi, beta, gamma, eps, alpha,
            mode, norm, judge_mode,
            metrics_out[ep], rule_census_out[ep], norm_census_out[ep],
        )
