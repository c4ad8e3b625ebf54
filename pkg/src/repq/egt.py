"""Analytical stability baseline for monomorphic populations.

Under a fixed norm, an agent's reputation is a two-state Markov chain:
each encounter it meets an opponent whose reputation is Bernoulli(g),
acts by its rule, is judged by the norm, and the assigned label flips
with probability chi. For a resident population the opponent fraction g
must equal the chain's own stationary good fraction, giving a scalar
fixed point solved by damped iteration. A single mutant's chain instead
faces opponents at the resident's g, with no self-consistency.

Payoffs are expectations of one encounter between two independent draws
from the relevant reputation distributions. A resident rule is stable
under a norm when no mutant rule earns more than the resident does
(within a tie margin); the strict variant requires a positive gap
against every mutant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._jit import maybe_njit
from .game import PayoffParams, code_bit, payoff_value

FIXED_POINT_TOL = 1e-12
MAX_ITERATIONS = 100_000
DAMPING = 0.5
TIE_MARGIN = 1e-9


@dataclass(frozen=True)
class StationaryReputation:
    """Long-run good fraction of a reputation chain."""

    g: float
    converged: bool
    iterations: int
    residual: float

    @property
    def own_rep_dist(self) -> tuple[float, float]:
        return (1.0 - self.g, self.g)


@dataclass(frozen=True)
class StabilityVerdict:
    resident_rule: int
    norm: int
    resident_payoff: float
    worst_mutant: int
    worst_mutant_payoff: float
    stable: bool
    strictly_stable: bool
    converged: bool
    resident_good_fraction: float


def _good_transition(rule: int, norm: int, chi: float, opp_g: float, own_rep: int) -> float:
    """P(next label is 1 | own reputation), opponents ~ Bernoulli(opp_g)."""
    p = 0.0
    for opp_rep, w in ((0, 1.0 - opp_g), (1, opp_g)):
        action = code_bit(rule, own_rep, opp_rep)
        intended = code_bit(norm, action, opp_rep)
        p += w * (chi + (1.0 - 2.0 * chi) * intended)
    return p


def chain_stationary(rule: int, norm: int, chi: float, opp_g: float) -> float:
    """Stationary P(rep = 1) of the own-reputation chain at fixed opponent g."""
    p01 = _good_transition(rule, norm, chi, opp_g, own_rep=0)
    p11 = _good_transition(rule, norm, chi, opp_g, own_rep=1)
    denom = 1.0 - p11 + p01
    if denom <= 0.0:
        # reducible chain (only possible at chi = 0): any split is stationary
        return opp_g
    return p01 / denom


def stationary_good_fraction(
    rule: int,
    norm: int,
    chi: float,
    g0: float = 0.5,
    tol: float = FIXED_POINT_TOL,
    max_iter: int = MAX_ITERATIONS,
    damping: float = DAMPING,
) -> StationaryReputation:
    """Self-consistent resident good fraction g with |g - Phi(g)| <= tol.

    Damping suppresses the period-2 oscillation the bare iteration can
    fall into. Non-convergence returns the last iterate, flagged.
    """
    if not 0.0 <= chi < 0.5:
        raise ValueError(f"chi must be in [0, 0.5), got {chi}")
    g = g0
    residual = 1.0
    for it in range(1, max_iter + 1):
        phi = chain_stationary(rule, norm, chi, g)
        residual = abs(phi - g)  # undamped fixed-point residual
        if residual <= tol:
            return StationaryReputation(g=g, converged=True, iterations=it, residual=residual)
        g = (1.0 - damping) * g + damping * phi
    return StationaryReputation(g=g, converged=False, iterations=max_iter, residual=residual)


def _expected_payoff(
    actor_rule: int,
    partner_rule: int,
    actor_dist: tuple[float, float],
    partner_dist: tuple[float, float],
    params: PayoffParams,
) -> float:
    """E[actor payoff] over independent reputation draws for both sides."""
    total = 0.0
    for r_a, w_a in enumerate(actor_dist):
        for r_p, w_p in enumerate(partner_dist):
            a_act = code_bit(actor_rule, r_a, r_p)
            a_par = code_bit(partner_rule, r_p, r_a)
            total += w_a * w_p * payoff_value(a_act, a_par, params.b, params.c)
    return total


def mutant_payoff(
    mutant: int,
    resident: int,
    norm: int,
    chi: float,
    params: PayoffParams,
    resident_state: Optional[StationaryReputation] = None,
) -> float:
    """Expected per-encounter payoff of a lone mutant among residents.

    The mutant's own reputation chain runs against opponents at the
    resident's stationary g; a mutant identical to the resident therefore
    recovers the resident payoff exactly.
    """
    if resident_state is None:
        resident_state = stationary_good_fraction(resident, norm, chi)
    g_res = resident_state.g
    g_mut = chain_stationary(mutant, norm, chi, g_res)
    return _expected_payoff(
        mutant, resident, (1.0 - g_mut, g_mut), (1.0 - g_res, g_res), params
    )


def resident_payoff(
    rule: int,
    norm: int,
    chi: float,
    params: PayoffParams,
    resident_state: Optional[StationaryReputation] = None,
) -> float:
    """Expected per-encounter payoff inside a monomorphic resident population."""
    return mutant_payoff(rule, rule, norm, chi, params, resident_state=resident_state)


def stability_verdict(
    resident: int,
    norm: int,
    chi: float,
    params: PayoffParams,
    margin: float = TIE_MARGIN,
) -> StabilityVerdict:
    """Exhaustive single-mutant test of one resident rule under one norm."""
    state = stationary_good_fraction(resident, norm, chi)
    res_pay = resident_payoff(resident, norm, chi, params, resident_state=state)
    worst_rule = resident
    worst_pay = -np.inf
    for mutant in range(16):
        if mutant == resident:
            continue
        pay = mutant_payoff(mutant, resident, norm, chi, params, resident_state=state)
        if pay > worst_pay:
            worst_pay = pay
            worst_rule = mutant
    return StabilityVerdict(
        resident_rule=resident,
        norm=norm,
        resident_payoff=res_pay,
        worst_mutant=worst_rule,
        worst_mutant_payoff=worst_pay,
        stable=bool(worst_pay <= res_pay + margin),
        strictly_stable=bool(worst_pay < res_pay - margin),
        converged=state.converged,
        resident_good_fraction=state.g,
    )


def stability_scan(
    norm: int,
    chi: float,
    params: PayoffParams,
    margin: float = TIE_MARGIN,
) -> list[StabilityVerdict]:
    """All 16 resident rules under one norm, sorted by resident payoff."""
    verdicts = [stability_verdict(rule, norm, chi, params, margin) for rule in range(16)]
    verdicts.sort(key=lambda v: (-v.resident_payoff, v.resident_rule))
    return verdicts


def full_scan(
    chi: float,
    params: PayoffParams,
    margin: float = TIE_MARGIN,
) -> list[StabilityVerdict]:
    """The 16 x 16 scan over every (rule, norm) pair."""
    out = []
    for norm in range(16):
        out.extend(stability_scan(norm, chi, params, margin))
    return out


@maybe_njit(cache=True)
def simulate_reputation_chain(
    rule: int, norm: int, chi: float, opp_g: float, steps: int, seed32: int
) -> float:
    """Monte Carlo good fraction of the single-agent chain (oracle for the
    closed-form stationary solution; independent of the fixed-point path)."""
    np.random.seed(seed32)
    rep = 1 if np.random.random() < 0.5 else 0
    good = 0
    for _ in range(steps):
        opp = 1 if np.random.random() < opp_g else 0
        action = code_bit(rule, rep, opp)
        intended = code_bit(norm, action, opp)
        rep = intended
        if np.random.random() < chi:
            rep = 1 - rep
        good += rep
    return good / steps
