"""Pure game logic: payoffs, bitwise rule/norm codecs, noisy reputation assignment.

Reputations and actions are binary. Actions use the convention D=0, C=1;
reputations use 0 ("Bad") and 1 ("Good"), with no meaning attached a priori.

An action rule is a 4-bit code. Bit k (k = 3, 2, 1, 0) holds the action for
(own reputation, opponent reputation) = (0,0), (0,1), (1,0), (1,1):

    rule 5 = 0101  ->  cooperate exactly when the opponent's reputation is 1
    rule 0 = 0000  ->  always defect;  rule 15 = 1111  ->  always cooperate

A social norm is likewise a 4-bit code over (focal action, opponent
reputation) = (D,0), (D,1), (C,0), (C,1), giving the focal agent's new
reputation:

    norm 9 = 1001  ->  "Stern Judging": good to cooperate with the good and
                       to defect against the bad; everything else is bad
    norm 3 = 0011  ->  cooperation is always good, defection always bad

These two codecs are the single source of bit-position truth for the whole
package; nothing else re-derives the bit math.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._jit import maybe_njit

DEFECT = 0
COOPERATE = 1

N_RULES = 16
N_NORMS = 16

#: all 16 rule (or norm) codes, uniformly iterable for exhaustive scans
ALL_CODES = tuple(range(16))


@dataclass(frozen=True)
class PayoffParams:
    """Donation-game payoffs: cooperation costs the actor ``c`` and pays the
    opponent ``b``, so the matrix rows (D, C) vs columns (D, C) read
    ((0, b), (-c, b-c)). Requires b > c > 0."""

    b: float = 5.0
    c: float = 1.0

    def __post_init__(self) -> None:
        if not (self.b > self.c > 0):
            raise ValueError(f"payoffs require b > c > 0, got b={self.b}, c={self.c}")

    @property
    def mutual(self) -> float:
        """Per-agent payoff under mutual cooperation (the cooperation ceiling)."""
        return self.b - self.c


@maybe_njit(cache=True, inline="always")
def code_bit(code: int, hi: int, lo: int) -> int:
    """Bit of ``code`` at position (3 - 2*hi - lo); shared by rules and norms."""
    return (code >> (3 - 2 * hi - lo)) & 1


@maybe_njit(cache=True, inline="always")
def payoff_value(own_action: int, opp_action: int, b: float, c: float) -> float:
    return -c * own_action + b * opp_action


def _check_code(code: int, what: str) -> None:
    if not 0 <= code <= 15:
        raise ValueError(f"{what} code must be in [0, 15], got {code}")


def _check_bit(value: int, what: str) -> None:
    if value not in (0, 1):
        raise ValueError(f"{what} must be 0 or 1, got {value}")


def payoff(own_action: int, opp_action: int, params: PayoffParams) -> float:
    """Payoff to the focal agent: -c if it cooperated, +b if the opponent did."""
    _check_bit(own_action, "own_action")
    _check_bit(opp_action, "opp_action")
    return payoff_value(own_action, opp_action, params.b, params.c)


def rule_action(rule: int, own_rep: int, opp_rep: int) -> int:
    """Action prescribed by an action rule for a (own, opponent) reputation pair."""
    _check_code(rule, "rule")
    _check_bit(own_rep, "own_rep")
    _check_bit(opp_rep, "opp_rep")
    return code_bit(rule, own_rep, opp_rep)


def norm_judgment(norm: int, focal_action: int, opp_rep: int) -> int:
    """New focal reputation assigned by a norm; noise-free at this layer."""
    _check_code(norm, "norm")
    _check_bit(focal_action, "focal_action")
    _check_bit(opp_rep, "opp_rep")
    return code_bit(norm, focal_action, opp_rep)


def assign_with_error(intended: int, chi: float, rng: np.random.Generator) -> int:
    """Flip the intended reputation with probability ``chi``.

    Consumes exactly one draw from ``rng``. The error keeps long-run
    reputation dynamics independent of initial labels.
    """
    _check_bit(intended, "intended")
    if not 0.0 <= chi < 0.5:
        raise ValueError(f"chi must be in [0, 0.5), got {chi}")
    if rng.random() < chi:
        return 1 - intended
    return intended


def code_bits(code: int) -> tuple[int, int, int, int]:
    """The 4 bits of a rule/norm code as (bit3, bit2, bit1, bit0)."""
    _check_code(code, "rule/norm")
    return ((code >> 3) & 1, (code >> 2) & 1, (code >> 1) & 1, code & 1)


def code_from_bits(bits: tuple[int, int, int, int]) -> int:
    """Inverse of :func:`code_bits`."""
    for b in bits:
        _check_bit(b, "bit")
    return (bits[0] << 3) | (bits[1] << 2) | (bits[2] << 1) | bits[3]
