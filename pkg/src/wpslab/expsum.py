"""Cubic exponential sums over primes and their moments.

Series are stored sparsely as (frequency, weight) lists with frequency p^3.
Moments of |f|^(2t) are computed as exact solution counts of
p_1^3 + ... + p_t^3 = p_{t+1}^3 + ... + p_{2t}^3 (orthogonality), never by
quadrature.  The probe sums of the Type I / Type II decomposition are
evaluated by direct summation.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import config
from ._numeric import cis2pi, cis2pi_frac, fsum_complex
from .errors import BudgetError, PreconditionError
from .identities import _mobius, tables_upto
from .ps_core import Exponent, PsPrimeTable, iroot_floor, primes_upto, ps_primes

__all__ = [
    "RationalPhase",
    "CubicExpSum",
    "MomentCount",
    "build_series",
    "evaluate",
    "evaluate_many",
    "cube_phases",
    "moment",
    "naive_moment",
    "diagonal_count",
    "hua_moment",
    "naive_hua_moment",
    "ScanResult",
    "sup_diff_scan",
    "ProbeResult",
    "bilinear_probe",
    "ScriptSResult",
    "script_S_probe",
    "half_open",
]

DEFAULT_MOMENT_CAP = 150


@dataclass(frozen=True)
class RationalPhase:
    """alpha = a/q reduced, 0 <= a < q."""

    a: int
    q: int

    def __post_init__(self):
        if self.q < 1 or not (0 <= self.a < self.q):
            raise PreconditionError(f"phase {self.a}/{self.q} not in [0, 1)")
        if math.gcd(self.a, self.q) != 1 and (self.a, self.q) != (0, 1):
            raise PreconditionError(f"phase {self.a}/{self.q} is not reduced")

    @classmethod
    def of(cls, value) -> "RationalPhase":
        if isinstance(value, RationalPhase):
            return value
        if isinstance(value, float):
            raise PreconditionError("rational phase expected; pass real phases as floats to evaluate()")
        fr = Fraction(value) if not isinstance(value, str) else Fraction(value.strip())
        fr -= math.floor(fr)
        return cls(fr.numerator, fr.denominator)

    def __float__(self):
        return self.a / self.q

    def __str__(self):
        return f"{self.a}/{self.q}"


def half_open(Y) -> np.ndarray:
    """Integers n with Y < n <= 2Y."""
    return np.arange(math.floor(Y) + 1, math.floor(2 * Y) + 1, dtype=np.int64)


def _mulmod(x: np.ndarray, y, q: int) -> np.ndarray:
    if q < (1 << 31):
        return (x * y) % q
    return np.asarray([(int(s) * int(t)) % q for s, t in np.broadcast(x, y)], dtype=object)


def cube_phases(n: np.ndarray, alpha: RationalPhase) -> np.ndarray:
    """e(n^3 alpha) with n^3 a reduced exactly modulo q."""
    q = alpha.q
    if alpha.a == 0:
        return np.ones(np.shape(n), dtype=np.complex128)
    r = np.asarray(n, dtype=np.int64) % q
    r3 = _mulmod(_mulmod(r, r, q), r, q)
    t = _mulmod(np.asarray(r3), alpha.a, q)
    return cis2pi_frac(np.asarray(t, dtype=np.int64), q)


# ---------------------------------------------------------------------------
# series


@dataclass(frozen=True)
class CubicExpSum:
    kind: str
    gamma: Optional[Exponent]
    frequencies: np.ndarray
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.kind not in ("G", "F", "f"):
            raise PreconditionError(f"unknown series kind {self.kind!r}")
        if len(self.frequencies) != len(self.weights):
            raise PreconditionError("frequency and weight lists differ in length")

    def __len__(self):
        return len(self.frequencies)

    @property
    def primes(self) -> np.ndarray:
        return np.rint(np.cbrt(self.frequencies.astype(np.float64))).astype(np.int64)

    @property
    def weight_mass(self) -> float:
        return math.fsum(np.abs(self.weights).tolist())


def _from_primes(kind, gamma, primes: np.ndarray, weights: np.ndarray) -> CubicExpSum:
    if len(primes) == 0:
        raise PreconditionError("series is empty (bound < 2)")
    if primes[-1] > 2_000_000:
        raise BudgetError("prime bound too large for 64-bit cube frequencies")
    return CubicExpSum(kind, gamma, primes.astype(np.int64) ** 3, weights.astype(np.float64))


def build_series(kind: str, bound: int, gamma=None) -> CubicExpSum:
    """G, F or f with primes drawn up to ``bound`` (caller picks N^(1/3) or x).

    G: weights log p over all primes; F: (1/gamma) p^(1-gamma) log p over
    sequence primes; f: weight 1 over sequence primes.
    """
    if bound < 2:
        raise PreconditionError("series is empty (bound < 2)")
    if kind == "G":
        if gamma is not None:
            raise PreconditionError("G takes no exponent")
        p = primes_upto(bound)
        return _from_primes("G", None, p, np.log(p.astype(np.float64)))
    if kind not in ("F", "f"):
        raise PreconditionError(f"unknown series kind {kind!r}")
    if gamma is None:
        raise PreconditionError(f"{kind} needs an exponent")
    table = ps_primes(bound, gamma)
    return series_from_table(kind, table)


def series_from_table(kind: str, table: PsPrimeTable) -> CubicExpSum:
    if kind == "F":
        w = table.ps_weights
    elif kind == "f":
        w = np.ones(len(table.primes))
    else:
        raise PreconditionError("tables carry F or f series only")
    return _from_primes(kind, table.gamma, table.primes, w)


def evaluate(series: CubicExpSum, alpha) -> complex:
    """sum_j w_j e(n_j alpha), in ascending frequency order with exact rounding.

    Rational phases (RationalPhase, Fraction, 'a/q') reduce n_j mod q
    exactly; floats are taken as real phases.
    """
    if isinstance(alpha, (float, np.floating)):
        a = float(alpha) - math.floor(alpha)
        phases = cis2pi(series.frequencies.astype(np.float64) * a)
    else:
        phases = cube_phases_frequencies(series.frequencies, RationalPhase.of(alpha))
    return fsum_complex(series.weights * phases)


def cube_phases_frequencies(freq: np.ndarray, alpha: RationalPhase) -> np.ndarray:
    if alpha.a == 0:
        return np.ones(len(freq), dtype=np.complex128)
    r = freq % alpha.q
    t = _mulmod(r, alpha.a, alpha.q)
    return cis2pi_frac(np.asarray(t, dtype=np.int64), alpha.q)


def evaluate_many(series: CubicExpSum, alphas, workers: int = 1) -> np.ndarray:
    alphas = list(alphas)

    def run(chunk):
        return [evaluate(series, a) for a in chunk]

    if workers <= 1 or len(alphas) < 2:
        return np.asarray(run(alphas), dtype=np.complex128)
    step = -(-len(alphas) // workers)
    chunks = [alphas[i : i + step] for i in range(0, len(alphas), step)]
    with ThreadPoolExecutor(workers) as ex:
        parts = list(ex.map(run, chunks))
    return np.asarray([v for part in parts for v in part], dtype=np.complex128)


# ---------------------------------------------------------------------------
# moments as solution counts


@dataclass(frozen=True)
class MomentCount:
    half_order: int
    set_size: int
    count: int


def _aggregate(sums: np.ndarray, weights: np.ndarray):
    order = np.argsort(sums, kind="stable")
    s, w = sums[order], weights[order]
    if len(s) == 0:
        return s, w
    starts = np.flatnonzero(np.concatenate([[True], s[1:] != s[:-1]]))
    return s[starts], np.add.reduceat(w, starts)


def _fold(v1, c1, v2, c2, max_bytes: int):
    """Multiplicities of a + b for a from (v1, c1) and b from (v2, c2)."""
    n_pairs = len(v1) * len(v2)
    if n_pairs * 32 > max_bytes:
        raise BudgetError(f"{n_pairs} pair sums exceed the {max_bytes >> 20} MB memory budget")
    if c1.size and c2.size and int(c1.max()) * int(c2.max()) >= 1 << 62:
        raise BudgetError("multiplicities overflow 64-bit accumulation")
    sums = (v1[:, None] + v2[None, :]).ravel()
    w = (c1[:, None] * c2[None, :]).ravel()
    return _aggregate(sums, w)


def _exact_sum_sq(r: np.ndarray) -> int:
    if r.size == 0:
        return 0
    peak = int(np.abs(r).max())
    if peak * peak * r.size < (1 << 63):
        return int(np.sum(r * r))
    return sum(int(x) * int(x) for x in r.tolist())


def _energy(v: np.ndarray, c: np.ndarray, *, band_pairs: int = 1 << 22, workers: int = 1) -> int:
    """sum_s (sum_{a+b=s} c_a c_b)^2 for sorted distinct v, processed in bands of s.

    Each band collects every pair with sum in [lo, hi) by binary search on
    the sorted support, so bands are independent and the reduction is exact.
    """
    if len(v) == 0:
        return 0
    if int(c.max()) ** 2 >= 1 << 62:
        raise BudgetError("multiplicities overflow 64-bit accumulation")

    def pair_bounds(lo, hi):
        return np.searchsorted(v, lo - v, "left"), np.searchsorted(v, hi - v, "left")

    def count_pairs(lo, hi):
        a, b = pair_bounds(lo, hi)
        return int(np.maximum(b - a, 0).sum())

    bands = []
    stack = [(int(2 * v[0]), int(2 * v[-1]) + 1)]
    while stack:
        lo, hi = stack.pop()
        if count_pairs(lo, hi) > band_pairs and hi - lo > 1:
            mid = (lo + hi) // 2
            stack.append((mid, hi))
            stack.append((lo, mid))
        else:
            bands.append((lo, hi))

    def band_energy(band):
        lo, hi = band
        a, b = pair_bounds(lo, hi)
        cnt = np.maximum(b - a, 0)
        total = int(cnt.sum())
        if total == 0:
            return 0
        i_idx = np.repeat(np.arange(len(v)), cnt)
        offsets = np.repeat(np.cumsum(cnt) - cnt, cnt)
        j_idx = np.repeat(a, cnt) + (np.arange(total) - offsets)
        _, r = _aggregate(v[i_idx] + v[j_idx], c[i_idx] * c[j_idx])
        return _exact_sum_sq(r)

    if workers > 1 and len(bands) > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(band_energy, bands))
    else:
        parts = [band_energy(b) for b in bands]
    return sum(parts)


def _power_sum_counts(values: np.ndarray, t: int, max_bytes: int):
    """Sorted support and multiplicities r_t(s) of ordered t-fold sums."""
    v, c = _aggregate(values.astype(np.int64), np.ones(len(values), dtype=np.int64))
    acc_v, acc_c = v, c
    for _ in range(t - 1):
        acc_v, acc_c = _fold(acc_v, acc_c, v, c, max_bytes)
    return acc_v, acc_c


def _even_moment(values: np.ndarray, t: int, max_bytes: int, workers: int = 1) -> int:
    """Number of ordered 2t-tuples with equal half-sums, t a power of two."""
    if t == 1:
        return len(values)
    half_v, half_c = _power_sum_counts(values, t // 2, max_bytes)
    return _energy(half_v, half_c, workers=workers)


def moment(series: CubicExpSum, t: int, *, cap: int = DEFAULT_MOMENT_CAP, workers: int = 1,
           max_mem_mb: int | None = None) -> MomentCount:
    """Exact integral of |f|^(2t) over [0, 1] as a count of prime-cube solutions."""
    if series.kind != "f":
        raise PreconditionError("moments are defined for unweighted series f")
    if t not in (1, 2, 4):
        raise PreconditionError("t must be 1, 2 or 4")
    size = len(series)
    if t == 4 and size > cap:
        raise BudgetError(f"|P| = {size} exceeds the eighth-moment cap of {cap}")
    max_bytes = (max_mem_mb or config.current().max_mem_mb) << 20
    return MomentCount(t, size, _even_moment(series.frequencies, t, max_bytes, workers))


def naive_moment(values, t: int) -> int:
    """Direct loop over all (|P|^t)^2 tuples; for oracle use at small sizes."""
    from itertools import product

    values = [int(x) for x in values]
    counts: dict[int, int] = {}
    for tup in product(values, repeat=t):
        s = sum(tup)
        counts[s] = counts.get(s, 0) + 1
    total = 0
    for left in product(values, repeat=t):
        total += counts.get(sum(left), 0)
    return total


def _partitions(n: int, largest: int | None = None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def diagonal_count(size: int, t: int) -> int:
    """Ordered 2t-tuples whose right half is a rearrangement of the left half.

    Sums (t! / prod m_i!)^2 over all multisets of size t from ``size`` symbols.
    """
    total = 0
    for lam in _partitions(t):
        parts = len(lam)
        if parts > size:
            continue
        arrangements = math.factorial(t)
        for m in lam:
            arrangements //= math.factorial(m)
        repeats = 1
        for k in set(lam):
            repeats *= math.factorial(lam.count(k))
        multisets = math.perm(size, parts) // repeats
        total += multisets * arrangements**2
    return total


def hua_moment(Y: int, k: int, j: int, *, workers: int = 1, max_mem_mb: int | None = None) -> MomentCount:
    """Exact integral of |sum_{m<=Y} e(m^k alpha)|^(2^j) as a solution count."""
    if Y < 1 or k < 1 or not (1 <= j <= k):
        raise PreconditionError("need Y >= 1, k >= 1, 1 <= j <= k")
    max_bytes = (max_mem_mb or config.current().max_mem_mb) << 20
    if max(Y, 2) ** (2 ** (j - 1)) * 16 > max_bytes * 64:
        raise BudgetError(f"{2 ** (j - 1)}-fold power sums of [1, {Y}] exceed the memory budget")
    values = np.arange(1, Y + 1, dtype=object) ** k
    if int(values[-1]) * 2 ** (j - 1) >= 1 << 62:
        raise BudgetError("power sums overflow 64-bit integers")
    count = _even_moment(values.astype(np.int64), 2 ** (j - 1), max_bytes, workers)
    return MomentCount(2 ** (j - 1), Y, count)


def naive_hua_moment(Y: int, k: int, j: int) -> int:
    return naive_moment([m**k for m in range(1, Y + 1)], 2 ** (j - 1))


# ---------------------------------------------------------------------------
# F - G scan


@dataclass(frozen=True)
class ScanResult:
    max_abs_diff: float
    argmax: float
    F0: float
    G0: float
    points: int

    @property
    def ratio(self) -> float:
        return self.max_abs_diff / self.G0


def sup_diff_scan(N: int, gamma, grid: int, random_samples: int = 0, seed: int = 0,
                  workers: int = 1) -> ScanResult:
    """Largest |F(alpha) - G(alpha)| over j/grid and seeded uniform alpha."""
    gamma = Exponent.of(gamma)
    if N < 8:
        raise PreconditionError("N must be >= 8")
    bound = iroot_floor(N, 3)
    G = build_series("G", bound)
    F = build_series("F", bound, gamma)
    # F - G as one series over all primes <= N^(1/3)
    w = -G.weights.copy()
    idx = np.searchsorted(G.frequencies, F.frequencies)
    w[idx] += F.weights
    diff = CubicExpSum("G", None, G.frequencies, w)

    alphas: list = [Fraction(j, grid) for j in range(grid)]
    if random_samples:
        rng = np.random.default_rng(seed)
        alphas += rng.random(random_samples).tolist()
    values = np.abs(evaluate_many(diff, alphas, workers))
    best = int(np.argmax(values))
    return ScanResult(
        float(values[best]), float(alphas[best]), evaluate(F, Fraction(0)).real,
        evaluate(G, Fraction(0)).real, len(alphas),
    )


# ---------------------------------------------------------------------------
# Type I / Type II and script-S probes


def _liouville(n: int) -> int:
    omega, m, p = 0, n, 2
    while p * p <= m:
        while m % p == 0:
            m //= p
            omega += 1
        p += 1
    if m > 1:
        omega += 1
    return -1 if omega % 2 else 1


def coefficients(spec: str, idx: np.ndarray, seed: int = 0) -> np.ndarray:
    """Bounded coefficient sequences: 'one', 'mobius', 'liouville', 'random'."""
    if spec == "one":
        return np.ones(len(idx), dtype=np.complex128)
    if spec == "mobius":
        return np.asarray([_mobius(int(n)) for n in idx], dtype=np.complex128)
    if spec == "liouville":
        return np.asarray([_liouville(int(n)) for n in idx], dtype=np.complex128)
    if spec == "random":
        rng = np.random.default_rng(seed)
        return cis2pi(rng.random(len(idx)))
    raise PreconditionError(f"unknown coefficient family {spec!r}")


@dataclass(frozen=True)
class ProbeResult:
    kind: str
    raw: float
    prefactor: float
    value: float
    trivial_bound: float
    terms: int

    @property
    def ratio(self) -> float:
        return self.value / self.trivial_bound if self.trivial_bound else 0.0


def bilinear_probe(kind: str, M, K, H, alpha, gamma, u: float = 0.0, a_spec: str = "one",
                   b_spec: str = "one", seed: int = 0, h1_exponent=None,
                   max_terms: int | None = None) -> ProbeResult:
    """min{1, H1/H} sum_{h~H} |sum_{m~M} sum_{k~K} a_m [b_k] e((mk)^3 alpha + h (mk+u)^gamma)|.

    Type I uses b_k = 1.  X = MK and H1 = X^(1-gamma) unless ``h1_exponent``
    is given.  The trivial bound is the prefactor times the number of terms.
    """
    if kind not in ("I", "II"):
        raise PreconditionError("kind must be 'I' or 'II'")
    gamma = Exponent.of(gamma)
    alpha = RationalPhase.of(alpha)
    if not 0 <= u <= 1:
        raise PreconditionError("u must lie in [0, 1]")
    ms, ks, hs = half_open(M), half_open(K), half_open(H)
    terms = len(ms) * len(ks) * len(hs)
    max_terms = max_terms or config.current().max_terms
    if terms > max_terms:
        raise BudgetError(f"{terms} term evaluations exceed the budget {max_terms}")
    a = coefficients(a_spec, ms, seed)
    b = coefficients(b_spec, ks, seed + 1) if kind == "II" else np.ones(len(ks), dtype=np.complex128)
    mk = np.outer(ms, ks)
    coef = np.outer(a, b) * cube_phases(mk, alpha)
    base = np.power(mk.astype(np.float64) + u, float(gamma))
    inner = [abs(fsum_complex(coef * cis2pi(int(h) * base))) for h in hs]
    raw = math.fsum(inner)
    X = float(M) * float(K)
    h1_exp = float(1 - gamma.fraction) if h1_exponent is None else float(h1_exponent)
    H1 = X**h1_exp
    pref = min(1.0, H1 / float(H))
    return ProbeResult(kind, raw, pref, pref * raw, pref * terms, terms)


@dataclass(frozen=True)
class ScriptSResult:
    value: float
    target: float
    H0: float
    H1: float

    @property
    def ratio(self) -> float:
        return self.value / self.target


def _script_S_value(ns, lam, alpha: RationalPhase, hs, gamma: float, u: float) -> float:
    keep = lam != 0
    ns, lam = ns[keep], lam[keep]
    if len(ns) == 0:
        return 0.0
    coef = lam * cube_phases(ns, alpha)
    base = np.power(ns.astype(np.float64) + u, gamma)
    return math.fsum(abs(fsum_complex(coef * cis2pi(int(h) * base))) for h in hs)


def script_S_probe(X: int, alpha, H: int, gamma, u: float, Delta, *, epsilon=0) -> ScriptSResult:
    """min{1, H1/H} sum_{h~H} |sum_{n~X} Lambda(n) e(n^3 alpha + h (n+u)^gamma)| vs X^(1-Delta).

    Requires H <= H0 = X^(1-gamma+Delta+7 epsilon), decided exactly.
    """
    gamma = Exponent.of(gamma)
    alpha = RationalPhase.of(alpha)
    Delta, epsilon = Fraction(Delta), Fraction(epsilon)
    if X < 1 or H < 1:
        raise PreconditionError("X and H must be positive integers")
    e0 = 1 - gamma.fraction + Delta + 7 * epsilon
    if e0 < 0:
        raise PreconditionError("H0 exponent is negative")
    # H <= X^(p/q)  <=>  H^q <= X^p
    if H**e0.denominator > X**e0.numerator:
        raise PreconditionError(f"H = {H} exceeds H0 = X^{e0} = {X ** float(e0):.6g}")
    ns = half_open(X)
    lam = tables_upto(int(ns[-1])).mangoldt[ns]
    value_raw = _script_S_value(ns, lam, alpha, half_open(H), float(gamma), u)
    H1 = X ** float(1 - gamma.fraction)
    pref = min(1.0, H1 / H)
    return ScriptSResult(pref * value_raw, X ** float(1 - Delta), X ** float(e0), H1)
