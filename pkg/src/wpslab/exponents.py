"""Exact rational bookkeeping for the nine-exponent admissibility system.

Everything here is Fraction arithmetic.  Floats are rejected at the door so
that thresholds and boundary cases are decided exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConsistencyError, PreconditionError
from .ps_core import Exponent

__all__ = [
    "GammaVector",
    "ExponentBudget",
    "CasePartition",
    "as_fraction",
    "delta_vector",
    "constraint_values",
    "admissible",
    "threshold",
    "budget",
    "case_partition",
    "sample_admissible",
    "sample_evec",
]

S = 9
K80 = Fraction(80, 3)
THREE_EIGHTHS = Fraction(3, 8)


def as_fraction(value) -> Fraction:
    """Fraction from an int, Fraction, Exponent or decimal/ratio string."""
    if isinstance(value, Exponent):
        return value.fraction
    if isinstance(value, (float, complex)):
        raise PreconditionError("exact rationals required; pass '0.95' or Fraction, not a float")
    try:
        return Fraction(value.strip()) if isinstance(value, str) else Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise PreconditionError(f"not a rational number: {value!r}") from exc


@dataclass(frozen=True)
class GammaVector:
    gammas: tuple
    deltas: tuple


def _gammas(gammas) -> tuple:
    if isinstance(gammas, (str, int, Fraction, Exponent)):
        gammas = [gammas] * S
    gammas = tuple(Exponent.of(g) for g in gammas)
    if len(gammas) != S:
        raise PreconditionError(f"need {S} exponents, got {len(gammas)}")
    return gammas


def delta_vector(gammas) -> GammaVector:
    """Delta_i = (3/8) sum_{j>i} (1 - gamma_j); Delta_9 = 0."""
    gammas = _gammas(gammas)
    deltas = [Fraction(0)] * S
    tail = Fraction(0)
    for i in range(S - 1, -1, -1):
        deltas[i] = THREE_EIGHTHS * tail
        tail += 1 - gammas[i].fraction
    return GammaVector(gammas, tuple(deltas))


def constraint_values(gammas) -> list[Fraction]:
    """Left sides (80/3)(1 - gamma_i) + (80/3) Delta_i, i = 1..9."""
    vec = delta_vector(gammas)
    return [K80 * (1 - g.fraction) + K80 * d for g, d in zip(vec.gammas, vec.deltas)]


def admissible(gammas) -> bool:
    return all(v < 1 for v in constraint_values(gammas))


def threshold(fixed: Iterable[int] = ()) -> Fraction:
    """Least gamma* such that the pattern is admissible for every gamma in (gamma*, 1).

    ``fixed`` lists the 1-based positions held at gamma = 1; the others share
    gamma.  With x = 1 - gamma, constraint i reads kappa_i x < 1 where
    kappa_i = (80/3)([i free] + (3/8) #{free j > i}).
    """
    fixed = set(fixed)
    if any(not 1 <= i <= S for i in fixed):
        raise PreconditionError(f"positions must lie in 1..{S}")
    free = [i not in fixed for i in range(1, S + 1)]
    if not any(free):
        raise PreconditionError("every position is fixed at 1; no threshold to solve")
    kappa = []
    for i in range(S):
        later = sum(free[i + 1 :])
        kappa.append(K80 * (int(free[i]) + THREE_EIGHTHS * later))
    return max(Fraction(1, 2), 1 - 1 / max(kappa))


def pattern_vector(gamma, fixed: Iterable[int] = ()) -> tuple:
    fixed = set(fixed)
    g = Exponent.of(gamma)
    return tuple(Exponent(1, 1) if i in fixed else g for i in range(1, S + 1))


@dataclass(frozen=True)
class ExponentBudget:
    gamma: Fraction
    Delta: Fraction
    epsilon: Fraction
    a_frak: Fraction
    b_frak: Fraction
    c_frak: Fraction
    h0_exp: Fraction
    h1_exp: Fraction
    b_lt_two_thirds: bool
    gap_ok: bool
    b_lt_a: bool
    admissible: bool

    @property
    def flags_ok(self) -> bool:
        return self.b_lt_two_thirds and self.gap_ok and self.b_lt_a


def budget(gamma, Delta, epsilon=0) -> ExponentBudget:
    """Type I / Type II ranges for one exponent, a saving Delta and slack epsilon."""
    g, d, e = as_fraction(gamma), as_fraction(Delta), as_fraction(epsilon)
    if not Fraction(1, 2) < g <= 1:
        raise PreconditionError(f"gamma = {g} outside (1/2, 1]")
    if not 0 <= d < Fraction(1, 2):
        raise PreconditionError(f"Delta = {d} outside [0, 1/2)")
    if e < 0:
        raise PreconditionError("epsilon must be >= 0")
    x = 1 - g
    a = min(Fraction(3, 4) - Fraction(7, 2) * x - Fraction(15, 4) * d - 27 * e,
            1 - 8 * x - 8 * d - 56 * e)
    b = 16 * x + 16 * d + 112 * e
    c = min(Fraction(16, 17) - Fraction(16, 17) * x - Fraction(32, 17) * d - Fraction(224, 17) * e,
            2 - 32 * x - 32 * d - 224 * e)
    out = ExponentBudget(
        g, d, e, a, b, c,
        h0_exp=x + d + 7 * e,
        h1_exp=x,
        b_lt_two_thirds=b < Fraction(2, 3),
        gap_ok=1 - c < c - b,
        b_lt_a=b < a,
        admissible=K80 * x + K80 * d < 1,
    )
    if out.admissible and e == 0 and not out.flags_ok:
        raise ConsistencyError(f"admissible (gamma, Delta) = ({g}, {d}) violates the budget flags")
    return out


@dataclass(frozen=True)
class CasePartition:
    case: int
    kind: str
    m_exp: Fraction
    k_exp: Fraction
    index: Optional[int]
    ell: Optional[int]
    permutation: tuple


def case_partition(evec: Sequence, bud: ExponentBudget) -> CasePartition:
    """Assign a factorisation exponent vector to Case 1, 2 or 3.

    Case 1: some e_i >= 1 - b (Type I with k = e_i).  Case 2: the first e_i
    in [1 - c, 1 - b) (Type II with k = e_i).  Case 3: sort descending and
    take the least ell with e_1 + ... + e_ell >= 1 - c.  ``index`` is 1-based
    in the caller's order; ``permutation`` maps sorted slots to it.
    """
    e = [as_fraction(v) for v in evec]
    if len(e) != 6:
        raise PreconditionError("exponent vector must have 6 entries")
    if any(v < 0 for v in e) or sum(e) != 1:
        raise PreconditionError("entries must be nonnegative and sum to 1")
    if any(v > Fraction(1, 3) for v in e[3:]):
        raise PreconditionError("entries 4-6 must be <= 1/3")
    if not bud.flags_ok:
        raise PreconditionError("budget flags do not all hold")
    lo, hi = 1 - bud.c_frak, 1 - bud.b_frak
    ident = tuple(range(1, 7))

    for i, v in enumerate(e):
        if v >= hi:
            if i >= 3:
                raise ConsistencyError(f"entry {i + 1} = {v} >= 1 - b although it is <= 1/3")
            m = 1 - v
            if m > bud.a_frak:
                raise ConsistencyError(f"Type I range m = {m} exceeds a = {bud.a_frak}")
            return CasePartition(1, "I", m, v, i + 1, None, ident)

    for i, v in enumerate(e):
        if lo <= v < hi:
            return CasePartition(2, "II", 1 - v, v, i + 1, None, ident)

    order = sorted(range(6), key=lambda i: (-e[i], i))
    total = Fraction(0)
    for ell, i in enumerate(order, start=1):
        total += e[i]
        if total >= lo:
            if total >= hi:
                raise ConsistencyError(f"partial sum {total} reached 1 - b = {hi}")
            m = 1 - total
            if not bud.b_frak <= m <= bud.c_frak:
                raise ConsistencyError(f"Type II range m = {m} outside [b, c]")
            return CasePartition(3, "II", m, total, None, ell, tuple(i + 1 for i in order))
    raise ConsistencyError("no case applies")


def sample_admissible(rng: np.random.Generator, den: int = 10**6, near_edge: bool = False):
    """Seeded rational (gamma, Delta) with (80/3)(1 - gamma + Delta) < 1.

    ``near_edge`` draws 1 - gamma + Delta from (7/192, 3/80), the band where
    1 - c exceeds 1/6 so that all three cases can occur.
    """
    lo, hi = (Fraction(7, 192), Fraction(3, 80)) if near_edge else (Fraction(0), Fraction(3, 80))
    s = lo + (hi - lo) * Fraction(int(rng.integers(1, den)), den)
    x = s * Fraction(int(rng.integers(0, den + 1)), den)
    return 1 - x, s - x


def sample_evec(rng: np.random.Generator, den: int = 3000, style: int = 0):
    """Seeded 6-vector of rationals summing to 1 with entries 4-6 <= 1/3.

    style 0 splits freely, style 1 jitters every entry around 1/6.
    """
    if style == 1:
        jitter = [Fraction(int(j), 60 * den) for j in rng.integers(-den, den + 1, size=5)]
        e = [Fraction(1, 6) + j for j in jitter]
        return e + [1 - sum(e)]
    tail = [Fraction(int(rng.integers(0, den // 3 + 1)), den) for _ in range(3)]
    rest = 1 - sum(tail)
    cuts = sorted(Fraction(int(c), den) * rest for c in rng.integers(0, den + 1, size=2))
    head = [cuts[0], cuts[1] - cuts[0], rest - cuts[1]]
    return head + tail
