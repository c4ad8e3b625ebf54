"""Policy classification and cross-run aggregation.

A learned Q-table maps back onto the 4-bit strategy space by reading the
greedy action at each state: play states give an action-rule code, judge
states a norm code. Tied states break to action 0 and raise a tie flag so
census totals stay whole while convergence quality remains visible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .learning import N_PLAY_STATES, judge_state_index, play_state_index


def extract_rule(q: np.ndarray) -> tuple[int, bool]:
    """(rule code, tie flag) from a table's play states."""
    if q.shape[0] < N_PLAY_STATES:
        raise ValueError(f"table must contain all 4 play states, got shape {q.shape}")
    code = 0
    tied = False
    for own in (0, 1):
        for opp in (0, 1):
            s = play_state_index(own, opp)
            if q[s, 0] == q[s, 1]:
                tied = True
            action = 0 if q[s, 0] >= q[s, 1] else 1
            code |= action << (3 - 2 * own - opp)
    return code, tied


def extract_norm(q: np.ndarray) -> tuple[int, bool]:
    """(norm code, tie flag) from a decentralized table's judge states."""
    if q.shape[0] < N_PLAY_STATES + 4:
        raise ValueError(
            "norm extraction requires a decentralized table with judge states, "
            f"got shape {q.shape}"
        )
    code = 0
    tied = False
    for action in (0, 1):
        for opp in (0, 1):
            s = judge_state_index(action, opp)
            if q[s, 0] == q[s, 1]:
                tied = True
            judgment = 0 if q[s, 0] >= q[s, 1] else 1
            code |= judgment << (3 - 2 * action - opp)
    return code, tied


@dataclass
class PolicyCensus:
    """Counts of extracted learner policies; ties counted under the
    tie-broken code and tallied in ``unconverged_count``."""

    rule_counts: np.ndarray
    norm_counts: Optional[np.ndarray]
    unconverged_count: int

    @property
    def n_learners(self) -> int:
        return int(self.rule_counts.sum())

    def modal_rule(self) -> int:
        return int(np.argmax(self.rule_counts))

    def modal_norm(self) -> Optional[int]:
        if self.norm_counts is None:
            return None
        return int(np.argmax(self.norm_counts))


def census_qtables(qtables: Sequence[np.ndarray], decentralized: bool) -> PolicyCensus:
    """Census over learner Q-tables (pass the learners' tables only)."""
    rules = np.zeros(16, dtype=np.int64)
    norms = np.zeros(16, dtype=np.int64) if decentralized else None
    unconverged = 0
    for q in qtables:
        code, tied = extract_rule(q)
        rules[code] += 1
        any_tie = tied
        if decentralized:
            ncode, ntied = extract_norm(q)
            norms[ncode] += 1
            any_tie = any_tie or ntied
        if any_tie:
            unconverged += 1
    return PolicyCensus(rule_counts=rules, norm_counts=norms, unconverged_count=unconverged)


def _comparable_config(summary: dict) -> dict:
    cfg = dict(summary.get("config", {}))
    cfg.pop("rng_seed", None)
    return cfg


@dataclass
class SweepPointSummary:
    """Across-seed statistics for one configuration point."""

    n_runs: int
    coop_final_mean: float
    coop_final_std: float
    coop_final_values: list
    pooled_census: PolicyCensus


def aggregate(run_summaries: Sequence[dict]) -> SweepPointSummary:
    """Aggregate run summaries that share a configuration except rng_seed.

    Each summary needs the keys ``config``, ``coop_final``,
    ``final_rule_census`` and (decentralized) ``final_norm_census``.
    """
    if not run_summaries:
        raise ValueError("aggregate requires at least one run summary")
    reference = _comparable_config(run_summaries[0])
    for s in run_summaries[1:]:
        if _comparable_config(s) != reference:
            raise ValueError("aggregate requires identical configurations except rng_seed")

    coop = np.array([s["coop_final"] for s in run_summaries], dtype=np.float64)
    rules = np.zeros(16, dtype=np.int64)
    norms = None
    unconverged = 0
    for s in run_summaries:
        rules += np.asarray(s["final_rule_census"], dtype=np.int64)
        if s.get("final_norm_census") is not None:
            if norms is None:
                norms = np.zeros(16, dtype=np.int64)
            norms += np.asarray(s["final_norm_census"], dtype=np.int64)
        unconverged += int(s.get("unconverged_count", 0))

    return SweepPointSummary(
        n_runs=len(run_summaries),
        coop_final_mean=float(coop.mean()),
        coop_final_std=float(coop.std()),
        coop_final_values=[float(x) for x in coop],
        pooled_census=PolicyCensus(
            rule_counts=rules, norm_counts=norms, unconverged_count=unconverged
        ),
    )
