"""Sums of nine prime cubes: exact counts, weighted counts, singular series.

Counts are built by exact shift-and-add convolution of sparse cube
indicators; every output index receives its contributions in the same
order no matter how the output range is split between threads.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import config
from ._numeric import cis2pi_frac
from .errors import BudgetError, PreconditionError
from .ps_core import Exponent, PsPrimeTable, iroot_floor, primes_upto, ps_primes

__all__ = [
    "RepArray",
    "SingularSeriesValue",
    "CompareRow",
    "CompareReport",
    "tables_for",
    "rep_count",
    "weighted_T",
    "naive_rep_count",
    "naive_rep_counts",
    "local_factor",
    "prime_power_terms",
    "singular_series",
    "singular_series_many",
    "main_term",
    "main_term_formula",
    "compare_window",
]

S = 9
MIN_SUM = S * 8


@dataclass(frozen=True)
class RepArray:
    Nmax: int
    gammas: tuple
    counts: np.ndarray
    weighted: Optional[np.ndarray] = field(default=None)

    def total(self) -> int:
        return sum(int(c) for c in self.counts) if self.counts.dtype == object else int(self.counts.sum(dtype=np.int64))


def tables_for(Nmax: int, gammas) -> list[PsPrimeTable]:
    """Nine tables of sequence primes with p^3 <= Nmax (one gamma repeats)."""
    if isinstance(gammas, (str, int, Exponent)) or not isinstance(gammas, Sequence):
        gammas = [gammas] * S
    if len(gammas) != S:
        raise PreconditionError(f"need {S} exponents, got {len(gammas)}")
    bound = max(iroot_floor(Nmax, 3), 2)
    cache: dict = {}
    out = []
    for g in gammas:
        g = Exponent.of(g)
        if g not in cache:
            cache[g] = ps_primes(bound, g)
        out.append(cache[g])
    return out


def _check_tables(tables) -> list[PsPrimeTable]:
    tables = list(tables)
    if len(tables) != S:
        raise PreconditionError(f"need {S} prime tables, got {len(tables)}")
    return tables


def _shift_add(acc: np.ndarray, shifts: np.ndarray, weights: np.ndarray, workers: int) -> np.ndarray:
    """out[n] = sum_j weights[j] * acc[n - shifts[j]], in the order of j."""
    n = len(acc)
    out = np.zeros(n, dtype=acc.dtype)

    def block(lo: int, hi: int):
        for c, w in zip(shifts.tolist(), weights.tolist()):
            a = max(lo, c)
            if a >= hi:
                continue
            if w == 1:
                out[a:hi] += acc[a - c : hi - c]
            else:
                out[a:hi] += w * acc[a - c : hi - c]

    if workers <= 1 or n < 1 << 16:
        block(0, n)
    else:
        step = -(-n // workers)
        with ThreadPoolExecutor(workers) as ex:
            list(ex.map(lambda lo: block(lo, min(lo + step, n)), range(0, n, step)))
    return out


def _cubes(table: PsPrimeTable, Nmax: int) -> np.ndarray:
    c = table.primes.astype(np.int64) ** 3
    return c[c <= Nmax]


def _budget_check(Nmax: int, itemsize: int, max_mem_mb: int | None):
    max_bytes = (max_mem_mb or config.current().max_mem_mb) << 20
    need = 3 * (Nmax + 1) * itemsize
    if need > max_bytes:
        raise BudgetError(f"Nmax = {Nmax} needs {need >> 20} MB, over the {max_bytes >> 20} MB budget")


def rep_count(Nmax: int, tables, *, workers: int = 1, max_mem_mb: int | None = None) -> RepArray:
    """counts[N] = #{(p_1..p_9) : p_i in table i, sum p_i^3 = N} for N <= Nmax."""
    tables = _check_tables(tables)
    if Nmax < 1:
        raise PreconditionError("Nmax must be positive")
    sizes = [len(_cubes(t, Nmax)) for t in tables]
    exact64 = math.prod(sizes) < 1 << 63
    dtype = np.int64 if exact64 else object
    _budget_check(Nmax, 8, max_mem_mb)
    acc = np.zeros(Nmax + 1, dtype=dtype)
    acc[0] = 1
    for t in tables:
        c = _cubes(t, Nmax)
        acc = _shift_add(acc, c, np.ones(len(c), dtype=np.int64), workers)
    return RepArray(Nmax, tuple(t.gamma for t in tables), acc)


def weighted_T(Nmax: int, tables, *, workers: int = 1, max_mem_mb: int | None = None,
               with_counts: bool = True) -> RepArray:
    """Weighted count sum over representations of prod (1/g_i) p_i^(1-g_i) log p_i."""
    tables = _check_tables(tables)
    if Nmax < 1:
        raise PreconditionError("Nmax must be positive")
    _budget_check(Nmax, 8, max_mem_mb)
    acc = np.zeros(Nmax + 1)
    acc[0] = 1.0
    for t in tables:
        c = _cubes(t, Nmax)
        acc = _shift_add(acc, c, t.ps_weights[: len(c)], workers)
    counts = rep_count(Nmax, tables, workers=workers, max_mem_mb=max_mem_mb).counts if with_counts else None
    return RepArray(Nmax, tuple(t.gamma for t in tables), counts, acc)


# ---------------------------------------------------------------------------
# independent oracle: meet in the middle over tuples


def _tuple_sums(cube_lists, cap: int, budget: list) -> Counter:
    out: Counter = Counter()
    tails = [sum(int(c[0]) for c in cube_lists[i:]) if all(len(c) for c in cube_lists[i:]) else 0
             for i in range(len(cube_lists) + 1)]
    if any(len(c) == 0 for c in cube_lists):
        return out

    def dfs(depth: int, acc: int):
        if depth == len(cube_lists):
            out[acc] += 1
            return
        budget[0] -= 1
        if budget[0] < 0:
            raise BudgetError("oracle search budget exceeded")
        for c in cube_lists[depth]:
            if acc + c + tails[depth + 1] > cap:
                break
            dfs(depth + 1, acc + c)

    dfs(0, 0)
    return out


def _halves(Nmax: int, tables, max_terms: int | None):
    tables = _check_tables(tables)
    cubes = [sorted(int(p) ** 3 for p in t.primes) for t in tables]
    budget = [max_terms or 10**8]
    return _tuple_sums(cubes[:4], Nmax, budget), _tuple_sums(cubes[4:], Nmax, budget)


def naive_rep_count(N: int, tables, *, max_terms: int | None = None) -> int:
    """Depth-first enumeration of both halves of the tuple, joined on N."""
    left, right = _halves(N, tables, max_terms)
    return sum(c * right.get(N - s, 0) for s, c in left.items())


def naive_rep_counts(Nmax: int, tables, *, max_terms: int | None = None) -> list[int]:
    """naive_rep_count for every N <= Nmax at once."""
    left, right = _halves(Nmax, tables, max_terms)
    out = [0] * (Nmax + 1)
    rs = sorted(right.items())
    for s, c in sorted(left.items()):
        for t, d in rs:
            if s + t > Nmax:
                break
            out[s + t] += c * d
    return out


# ---------------------------------------------------------------------------
# singular series


def _unit_cube_counts(q: int) -> np.ndarray:
    """c[r] = #{m mod q : gcd(m, q) = 1, m^3 = r mod q}."""
    m = np.arange(q, dtype=np.int64)
    units = m[np.gcd(m, q) == 1]
    r = (units * units % q) * units % q
    return np.bincount(r, minlength=q).astype(np.int64)


def _factor(n: int) -> list[tuple[int, int]]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


def _phi(q: int) -> int:
    out = q
    for p, _ in _factor(q):
        out = out // p * (p - 1)
    return out


def local_factor(p: int, N: int, h: int = 1, *, max_terms: int | None = None) -> float:
    """p^h * #{x in (Z/p^h)^*9 : sum x_i^3 = N} / phi(p^h)^9, by exact cyclic convolution."""
    if p < 2 or _factor(p) != [(p, 1)]:
        raise PreconditionError(f"{p} is not prime")
    if h < 1:
        raise PreconditionError("h must be >= 1")
    q = p**h
    if q > 10**6:
        raise BudgetError(f"modulus {q} exceeds 10^6")
    c = _unit_cube_counts(q)
    support = np.flatnonzero(c)
    work = S * len(support) * q
    if work > (max_terms or config.current().max_terms) // 10:
        raise BudgetError(f"cyclic convolution mod {q} needs {work} steps")
    phi = _phi(q)
    counts = _nine_fold_counts(q)
    count = counts[N % q]
    return q * count / phi**S


@lru_cache(maxsize=256)
def _nine_fold_counts(q: int) -> tuple:
    """Number of unit 9-tuples mod q with each cube sum residue, exactly."""
    c = _unit_cube_counts(q)
    support = np.flatnonzero(c).tolist()
    phi = _phi(q)
    acc = c.copy()
    for k in range(2, S + 1):
        dtype = np.int64 if phi**k < 1 << 62 else object
        acc = acc.astype(dtype)
        nxt = np.zeros(q, dtype=dtype)
        for r in support:
            nxt += int(c[r]) * np.roll(acc, r)
        acc = nxt
    return tuple(int(x) for x in acc)


def _reduced_weights(q: int, p: int) -> np.ndarray:
    """Unit cube counts with each fibre {t + i q/p} lowered to minimum zero.

    For gcd(a, p) = 1 a constant on a fibre contributes nothing to
    sum_t c[t] e(a t / q), so the exponential sums are unchanged while
    structurally vanishing ones become exactly zero.
    """
    c = _unit_cube_counts(q).reshape(p, q // p)
    return (c - c.min(axis=0)).ravel()


def _prime_power_table(p: int, j: int) -> np.ndarray:
    """A(p^j, r) for every residue r mod p^j."""
    q = p**j
    phi = q - q // p
    c = _reduced_weights(q, p)
    t = np.flatnonzero(c)
    w = c[t].astype(np.float64)
    a = np.arange(1, q)
    a = a[a % p != 0]
    if len(t) == 0:
        return np.zeros(q)
    # S(q, a) over the reduced residue support, then S^9 by repeated products
    sa = np.asarray([complex(math.fsum((w * z.real).tolist()), math.fsum((w * z.imag).tolist()))
                     for z in (cis2pi_frac(int(ai) * t % q, q) for ai in a)])
    sa9 = np.ones_like(sa)
    for _ in range(S):
        sa9 = sa9 * sa
    out = np.empty(q)
    for r in range(q):
        ph = cis2pi_frac((-a * r) % q, q)
        out[r] = math.fsum((sa9 * ph).real.tolist())
    return out / float(phi) ** S


def prime_power_terms(Q: int) -> dict[int, np.ndarray]:
    """A(p^j, .) tables for all prime powers p^j <= Q."""
    out = {}
    for p in primes_upto(Q).tolist():
        q, j = p, 1
        while q <= Q:
            out[q] = _cached_table(p, j)
            q *= p
            j += 1
    return out


_TABLES: dict = {}


def _cached_table(p: int, j: int) -> np.ndarray:
    key = (p, j)
    if key not in _TABLES:
        _TABLES[key] = _prime_power_table(p, j)
    return _TABLES[key]


@dataclass(frozen=True)
class SingularSeriesValue:
    N: int
    Q: int
    partial: float
    local_factors: tuple


def singular_series_many(Ns, Q: int) -> np.ndarray:
    """sum_{q <= Q} A(q, N) for each N, with A assembled multiplicatively."""
    if Q < 1:
        raise PreconditionError("Q must be >= 1")
    Ns = np.asarray(Ns, dtype=np.int64)
    pp = prime_power_terms(Q)
    # accumulate in ascending q so each N sees the same order in any batch
    acc = np.ones(len(Ns))
    for q in range(2, Q + 1):
        v = np.ones(len(Ns))
        for p, e in _factor(q):
            v = v * pp[p**e][Ns % p**e]
        acc = acc + v
    return acc


def singular_series(N: int, Q: int = 200) -> SingularSeriesValue:
    partial = float(singular_series_many([N], Q)[0])
    pp = prime_power_terms(Q)
    factors = []
    for p in primes_upto(Q).tolist():
        vals = [1.0]
        q = p
        while q <= Q:
            vals.append(float(pp[q][N % q]))
            q *= p
        factors.append((p, math.fsum(vals)))
    return SingularSeriesValue(N, Q, partial, tuple(factors))


# ---------------------------------------------------------------------------
# main term and comparison


def main_term_formula() -> str:
    return "Gamma(4/3)^9 / Gamma(3) * S(N) * N^2"


def main_term(N, s_value: float, gammas=None, *, allow_mixed: bool = False):
    """Gamma(4/3)^9 / Gamma(3) * s_value * N^2.

    The weighted count normalises each prime by its sequence density, so the
    constant is the same for every common exponent.  Unequal exponents raise
    unless ``allow_mixed`` is set.
    """
    if gammas is not None:
        if isinstance(gammas, (str, int, Exponent)):
            gammas = [gammas]
        distinct = {Exponent.of(g) for g in gammas}
        if len(distinct) > 1 and not allow_mixed:
            raise PreconditionError(
                "mixed exponents: main term emitted only for a common exponent; "
                f"general form {main_term_formula()}"
            )
    const = math.gamma(4.0 / 3.0) ** S / math.gamma(3.0)
    return const * s_value * np.asarray(N, dtype=np.float64) ** 2 if np.ndim(N) else const * s_value * float(N) ** 2


@dataclass(frozen=True)
class CompareRow:
    N: int
    count: int
    weighted: float
    mainterm: float
    ratio: Optional[float]


@dataclass(frozen=True)
class CompareReport:
    rows: list
    mean_ratio: Optional[float]
    Q: int


def compare_window(Nlo: int, Nhi: int, gammas, Q: int = 200, *, include_even: bool = False,
                   workers: int = 1, max_mem_mb: int | None = None, allow_mixed: bool = False) -> CompareReport:
    """Weighted count against the main term for N in [Nlo, Nhi]."""
    if Nlo > Nhi or Nlo < 1:
        raise PreconditionError("need 1 <= Nlo <= Nhi")
    tables = tables_for(max(Nhi, 8), gammas)
    main_term(1, 1.0, [t.gamma for t in tables], allow_mixed=allow_mixed)
    rep = weighted_T(Nhi, tables, workers=workers, max_mem_mb=max_mem_mb)
    Ns = np.arange(Nlo, Nhi + 1, dtype=np.int64)
    if not include_even:
        Ns = Ns[Ns % 2 == 1]
    sser = singular_series_many(Ns, Q)
    mains = main_term(Ns, 1.0, None) * sser
    rows, ratios = [], []
    for N, s, m in zip(Ns.tolist(), sser.tolist(), mains.tolist()):
        if N % 2 == 0:
            # the 2-adic factor 1 + A(2, N) is exactly 0; truncation would hide that
            m = 0.0
        w = float(rep.weighted[N])
        ratio = w / m if m > 0 else None
        if ratio is not None:
            ratios.append(ratio)
        rows.append(CompareRow(N, int(rep.counts[N]), w, m, ratio))
    mean = math.fsum(ratios) / len(ratios) if ratios else None
    return CompareReport(rows, mean, Q)
