"""Combinatorial identities and counting lemmas, checked by exact enumeration.

Contents: von Mangoldt / Moebius tables, Heath-Brown's identity, the
truncated Fourier expansion of the sawtooth psi, the spacing count
N(Delta) for h k^alpha, Srinivasan's optimisation principle, and
second / (q+2)-th derivative test probes.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np
from scipy.optimize import brentq

from . import config
from ._numeric import cis2pi, cis2pi_frac, fsum_complex
from .errors import BudgetError, PreconditionError
from .ps_core import Exponent, primes_upto

__all__ = [
    "ArithmeticTables",
    "hb_sum",
    "hb_check",
    "psi_value",
    "psi_partial_sum",
    "psi_error_ratio",
    "psi_ratio_grid",
    "g_envelope",
    "g_coefficients",
    "count_N_Delta",
    "MonomialObjective",
    "SrinivasanResult",
    "srinivasan_min",
    "random_objective",
    "VdcResult",
    "vdc_probe",
    "phase_derivative",
]


# ---------------------------------------------------------------------------
# arithmetic tables


@dataclass(frozen=True)
class ArithmeticTables:
    limit: int
    mangoldt: np.ndarray = field(repr=False)
    moebius: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, limit: int) -> "ArithmeticTables":
        if limit < 1:
            raise PreconditionError("table limit must be >= 1")
        lam = np.zeros(limit + 1, dtype=np.float64)
        mu = np.ones(limit + 1, dtype=np.int8)
        mu[0] = 0
        for p in primes_upto(limit).tolist():
            mu[p::p] *= -1
            if p * p <= limit:
                mu[p * p :: p * p] = 0
            logp = math.log(p)
            pk = p
            while pk <= limit:
                lam[pk] = logp
                pk *= p
        return cls(limit, lam, mu)

    def mobius(self, n: int) -> int:
        return int(self.moebius[n])

    def von_mangoldt(self, n: int) -> float:
        return float(self.mangoldt[n])


@lru_cache(maxsize=8)
def _tables(limit: int) -> ArithmeticTables:
    return ArithmeticTables.build(limit)


def tables_upto(limit: int) -> ArithmeticTables:
    """Cached tables covering at least ``limit`` (rounded up to a power of two)."""
    size = 1 << max(10, (max(limit, 1) - 1).bit_length())
    return _tables(size)


# ---------------------------------------------------------------------------
# Heath-Brown identity


@lru_cache(maxsize=1 << 16)
def _divisors(n: int) -> tuple[int, ...]:
    small, large = [], []
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
    return tuple(small + large[::-1])


@lru_cache(maxsize=1 << 16)
def _mobius(n: int) -> int:
    result, m, p = 1, n, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            result = -result
        p += 1
    return -result if m > 1 else result


@lru_cache(maxsize=1 << 20)
def _hb_rec(m: int, n_mu: int, n_one: int, z: float) -> tuple[tuple[int, int], ...]:
    """Integer coefficients c_r with sum_r c_r log r equal to the peeled sum at m.

    Peels ``n_mu`` Moebius factors d <= z, then ``n_one`` unweighted factors,
    by recursive divisor decomposition; the remaining cofactor r carries log r.
    """
    if n_mu == 0 and n_one == 0:
        return ((m, 1),)
    acc: dict[int, int] = {}
    for d in _divisors(m):
        if n_mu > 0:
            if d > z:
                break
            w = _mobius(d)
            if w == 0:
                continue
            sub = _hb_rec(m // d, n_mu - 1, n_one, z)
        else:
            w = 1
            sub = _hb_rec(m // d, 0, n_one - 1, z)
        for r, c in sub:
            acc[r] = acc.get(r, 0) + w * c
    return tuple((r, c) for r, c in sorted(acc.items()) if c)


def hb_sum(n: int, z: float, k: int) -> float:
    """Right-hand side of Heath-Brown's identity at n.

    The j-th inner sum runs over ordered n_1 ... n_{2j} = n with
    n_{j+1}, ..., n_{2j} <= z, weighted by (log n_1) mu(n_{j+1}) ... mu(n_{2j}).
    Coefficients are accumulated as exact integers before taking logs.
    """
    total: dict[int, int] = {}
    for j in range(1, k + 1):
        coeff = (1 if j % 2 == 1 else -1) * math.comb(k, j)
        for r, c in _hb_rec(n, j, j - 1, z):
            total[r] = total.get(r, 0) + coeff * c
    return math.fsum(c * math.log(r) for r, c in sorted(total.items()) if c and r > 1)


def hb_check(n: int, z: float, k: int) -> float:
    """|Lambda(n) - identity sum|, requiring 1 <= n <= 2 z^k."""
    if k < 1 or z < 1:
        raise PreconditionError("need z >= 1 and k >= 1")
    if n < 1 or n > 2 * z**k:
        raise PreconditionError(f"n = {n} outside [1, 2 z^k] = [1, {2 * z ** k}]")
    lam = tables_upto(n).von_mangoldt(n)
    return abs(lam - hb_sum(n, z, k))


# ---------------------------------------------------------------------------
# sawtooth approximation


def psi_value(theta: float) -> float:
    return theta - math.floor(theta) - 0.5


def psi_partial_sum(theta: float, H: int) -> float:
    """-sum_{0<|h|<=H} e(h theta) / (2 pi i h) = -sum_{h<=H} sin(2 pi h theta) / (pi h)."""
    h = np.arange(1, H + 1, dtype=np.float64)
    s = cis2pi(h * theta).imag
    return -math.fsum((s / (math.pi * h)).tolist())


def g_envelope(theta: float, H: int) -> float:
    dist = abs(theta - round(theta))
    if dist == 0:
        return 1.0
    return min(1.0, 1.0 / (H * dist))


def psi_error_ratio(theta: float, H: int) -> tuple[float, float, float]:
    """(|psi - S_H|, g(theta, H), ratio)."""
    if H < 1:
        raise PreconditionError("H must be >= 1")
    err = abs(psi_value(theta) - psi_partial_sum(theta, H))
    g = g_envelope(theta, H)
    return err, g, err / g


def psi_ratio_grid(H: int, grid: int) -> np.ndarray:
    """err/g at theta = j/grid, j = 0..grid-1, with exactly reduced phases."""
    if H < 1 or grid < 1:
        raise PreconditionError("H and grid must be >= 1")
    h = np.arange(1, H + 1, dtype=np.int64)
    out = np.empty(grid, dtype=np.float64)
    for j in range(grid):
        s = cis2pi_frac(h * j, grid).imag
        partial = -math.fsum((s / (math.pi * h)).tolist())
        theta = j / grid
        dist = min(j, grid - j) / grid
        g = 1.0 if dist == 0 else min(1.0, 1.0 / (H * dist))
        out[j] = abs(psi_value(theta) - partial) / g
    return out


def g_coefficients(H: int, hmax: int, samples: int = 1 << 16) -> np.ndarray:
    """Fourier coefficients a(0..hmax) of g(theta, H) by trapezoidal FFT quadrature."""
    theta = np.arange(samples) / samples
    dist = np.minimum(theta, 1.0 - theta)
    g = np.ones(samples)
    nz = dist > 0
    g[nz] = np.minimum(1.0, 1.0 / (H * dist[nz]))
    coeffs = np.fft.rfft(g).real / samples
    return coeffs[: hmax + 1]


# ---------------------------------------------------------------------------
# spacing count N(Delta)


def _half_open(Y) -> np.ndarray:
    lo = math.floor(Y) + 1
    hi = math.floor(2 * Y)
    return np.arange(lo, hi + 1, dtype=np.int64)


def count_N_Delta(H, K, alpha, Delta, *, workers: int = 1, max_terms: int | None = None):
    """Exact count of |h1 k1^alpha - h2 k2^alpha| <= Delta over h ~ H, k ~ K.

    Returns (count, bound, ratio) with bound = Delta H K^(2-alpha) + HK log(HK).
    Float comparisons are used only away from the boundary; pairs within
    rounding distance of |difference| = Delta are settled exactly (integer
    powers when Delta = 0, 50-digit arithmetic otherwise).
    """
    if isinstance(alpha, float):
        if not 0.5 < alpha < 1:
            raise PreconditionError("alpha must lie in (1/2, 1)")
        exact_alpha = None
        a_f = alpha
    else:
        exact_alpha = Exponent.of(alpha)
        a_f = float(exact_alpha)
    Delta = Fraction(Delta) if not isinstance(Delta, float) else Delta
    if Delta < 0:
        raise PreconditionError("Delta must be >= 0")
    max_terms = max_terms or config.current().max_terms
    hs, ks = _half_open(H), _half_open(K)
    n_pts = len(hs) * len(ks)
    if n_pts * n_pts > max_terms:
        raise BudgetError(f"H^2 K^2 = {n_pts ** 2} pairs exceeds the budget {max_terms}")
    if n_pts == 0:
        return 0, 0.0, 0.0

    hh, kk = np.meshgrid(hs, ks, indexing="ij")
    hh, kk = hh.ravel(), kk.ravel()
    vals = hh * np.power(kk.astype(np.float64), a_f)
    order = np.argsort(vals, kind="stable")
    vals, hh, kk = vals[order], hh[order], kk[order]
    d_f = float(Delta)
    tol = 1e-9 * max(1.0, float(vals[-1]))

    def exact_close(i: int, j: int) -> bool:
        h1, k1, h2, k2 = int(hh[i]), int(kk[i]), int(hh[j]), int(kk[j])
        if exact_alpha is not None and Delta == 0:
            a, b = exact_alpha.num, exact_alpha.den
            return h1**b * k1**a == h2**b * k2**a
        with mpmath.workdps(50):
            al = mpmath.mpf(exact_alpha.num) / exact_alpha.den if exact_alpha else mpmath.mpf(a_f)
            diff = abs(h1 * mpmath.power(k1, al) - h2 * mpmath.power(k2, al))
            dd = mpmath.mpf(Delta.numerator) / Delta.denominator if isinstance(Delta, Fraction) else mpmath.mpf(Delta)
            return bool(diff <= dd)

    def block(lo: int, hi: int) -> int:
        idx = np.arange(lo, hi)
        v = vals[lo:hi]
        inner = max(d_f - tol, -1.0)
        if inner >= 0:
            a = np.searchsorted(vals, v - inner, side="left")
            b = np.searchsorted(vals, v + inner, side="right")
            total = int((b - a).sum())
        else:
            a = b = idx  # nothing certain
            total = 0
        # uncertain shells: (inner, Delta + tol] on both sides
        lo_out = np.searchsorted(vals, v - d_f - tol, side="left")
        hi_out = np.searchsorted(vals, v + d_f + tol, side="right")
        for t, i in enumerate(idx.tolist()):
            for j in range(int(lo_out[t]), int(a[t])):
                total += exact_close(i, j)
            for j in range(int(b[t]), int(hi_out[t])):
                total += exact_close(i, j)
        return total

    n = len(vals)
    step = max(1, -(-n // max(1, workers)))
    bounds = [(s, min(n, s + step)) for s in range(0, n, step)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            count = sum(ex.map(lambda b: block(*b), bounds))
    else:
        count = sum(block(*b) for b in bounds)

    Hf, Kf = float(H), float(K)
    bound = d_f * Hf * Kf ** (2.0 - a_f) + Hf * Kf * math.log(Hf * Kf)
    ratio = count / bound if bound > 0 else math.inf
    return count, bound, ratio


# ---------------------------------------------------------------------------
# Srinivasan's optimisation principle


@dataclass(frozen=True)
class MonomialObjective:
    """L(q) = sum A_i q^u_i + sum B_j q^-v_j on [Q1, Q2]."""

    ascending: tuple[tuple[float, float], ...]
    descending: tuple[tuple[float, float], ...]
    Q1: float
    Q2: float

    def __post_init__(self):
        if not self.ascending and not self.descending:
            raise PreconditionError("objective has no terms")
        for A, u in self.ascending + self.descending:
            if not (A > 0 and u > 0):
                raise PreconditionError("coefficients and exponents must be positive")
        if not (0 <= self.Q1 <= self.Q2):
            raise PreconditionError("need 0 <= Q1 <= Q2")

    def __call__(self, q: float) -> float:
        if q == 0:
            return math.inf if self.descending else 0.0
        return math.fsum(
            [A * q**u for A, u in self.ascending] + [B * q ** (-v) for B, v in self.descending]
        )

    def log_derivative(self, t: float) -> float:
        """dL/dt for q = e^t; increasing in t."""
        return math.fsum(
            [A * u * math.exp(u * t) for A, u in self.ascending]
            + [-B * v * math.exp(-v * t) for B, v in self.descending]
        )

    def rhs(self) -> float:
        cross = [
            (A**v * B**u) ** (1.0 / (u + v)) for A, u in self.ascending for B, v in self.descending
        ]
        lower = [A * self.Q1**u for A, u in self.ascending]
        upper = [B * self.Q2 ** (-v) for B, v in self.descending] if self.Q2 > 0 else []
        return math.fsum(cross + lower + upper)

    @property
    def constant(self) -> int:
        m, n = len(self.ascending), len(self.descending)
        return m * n + m + n


@dataclass(frozen=True)
class SrinivasanResult:
    q_star: float
    L_min: float
    rhs: float
    constant: int

    @property
    def sound(self) -> bool:
        return self.L_min <= self.constant * self.rhs


def srinivasan_min(obj: MonomialObjective) -> SrinivasanResult:
    """Minimise L on [Q1, Q2]; L is convex in log q so dL/dlog q has one sign change."""
    if obj.Q2 == 0:
        q = 0.0
    else:
        t_hi = math.log(obj.Q2)
        if obj.Q1 > 0:
            t_lo = math.log(obj.Q1)
        elif not obj.descending:
            t_lo = None  # infimum at q = 0
        else:
            t_lo = t_hi - 1.0
            while obj.log_derivative(t_lo) > 0:
                t_lo = t_hi - 2 * (t_hi - t_lo)
        if t_lo is None:
            q = 0.0
        elif obj.log_derivative(t_lo) >= 0:
            q = obj.Q1 if obj.Q1 > 0 else math.exp(t_lo)
        elif obj.log_derivative(t_hi) <= 0:
            q = obj.Q2
        else:
            t = brentq(obj.log_derivative, t_lo, t_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
            q = math.exp(t)
    return SrinivasanResult(q, obj(q), obj.rhs(), obj.constant)


# ---------------------------------------------------------------------------
# derivative-test probes


def phase_derivative(r: int, x, alpha: float, h: float, gamma: float, u: float):
    """r-th derivative of f(x) = alpha x^3 + h (x+u)^gamma."""
    x = np.asarray(x, dtype=np.float64)
    cubic = {0: alpha * x**3, 1: 3 * alpha * x**2, 2: 6 * alpha * x, 3: 6 * alpha + 0 * x}
    falling = 1.0
    for i in range(r):
        falling *= gamma - i
    return cubic.get(r, 0 * x) + h * falling * np.power(x + u, gamma - r)


@dataclass(frozen=True)
class VdcResult:
    sum_abs: float
    lemma_bound: float
    ratio: float
    lam: float
    derivative_ratio: float
    order: int


def vdc_probe(order: int, alpha, h: int, gamma, u: float, A: float, B: float | None = None,
              samples: int = 64) -> VdcResult:
    """|sum_{A<n<=B} e(alpha n^3 + h (n+u)^gamma)| against a derivative-test bound.

    order 2 uses A lam^(1/2) + lam^(-1/2); order q+2 (q >= 1) uses
    |I|(r^2 lam)^(1/(4Q-2)) + |I|^(1-1/(2Q)) r^(1/(2Q)) + |I|^(1-2/Q+1/Q^2) lam^(-1/(2Q)),
    Q = 2^q.  Here lam is the least |f^(order)| on the interval and r the
    measured max/min ratio (endpoints plus ``samples`` interior points).
    """
    from .expsum import RationalPhase, cube_phases  # local: expsum imports this module

    if order < 2:
        raise PreconditionError("order must be 2 or q+2 with q >= 1")
    alpha = RationalPhase.of(alpha)
    gamma = Exponent.of(gamma)
    B = 2 * A if B is None else B
    if not (0 < A < B <= 2 * A):
        raise PreconditionError("need 0 < A < B <= 2A")
    a_f, g_f = float(alpha), float(gamma)
    xs = np.concatenate([[A, B], np.linspace(A, B, samples + 2)[1:-1]])
    xs.sort()
    d = phase_derivative(order, xs, a_f, h, g_f, u)
    if np.any(d == 0) or np.any(np.sign(d) != np.sign(d[0])):
        raise PreconditionError(f"f^({order}) vanishes or changes sign on ({A}, {B}]")
    mags = np.abs(d)
    lam = float(mags.min())
    dratio = float(mags.max() / lam)

    n = np.arange(math.floor(A) + 1, math.floor(B) + 1, dtype=np.int64)
    if len(n) == 0:
        raise PreconditionError("empty summation interval")
    terms = cube_phases(n, alpha) * cis2pi(h * np.power(n + u, g_f))
    total = abs(fsum_complex(terms))

    if order == 2:
        bound = A * math.sqrt(lam) + 1.0 / math.sqrt(lam)
    else:
        q = order - 2
        Q = 2**q
        size = float(len(n))
        bound = (
            size * (dratio**2 * lam) ** (1.0 / (4 * Q - 2))
            + size ** (1 - 1 / (2 * Q)) * dratio ** (1 / (2 * Q))
            + size ** (1 - 2 / Q + 1 / Q**2) * lam ** (-1 / (2 * Q))
        )
    return VdcResult(total, bound, total / bound, lam, dratio, order)


def random_objective(rng: np.random.Generator) -> MonomialObjective:
    """Seeded objective with one to three terms of each kind on a random interval."""
    m, n = (int(x) for x in rng.integers(1, 4, size=2))
    asc = tuple((float(rng.uniform(0.1, 10)), float(rng.uniform(0.1, 3))) for _ in range(m))
    desc = tuple((float(rng.uniform(0.1, 10)), float(rng.uniform(0.1, 3))) for _ in range(n))
    q1 = float(rng.uniform(0.01, 2))
    q2 = q1 * float(rng.uniform(1, 100))
    return MonomialObjective(asc, desc, q1, q2)
