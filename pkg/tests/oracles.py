"""Independent reference computations used by the tests.

None of these share code with the package: they use trial division,
high-precision mpmath floors, plain loops and dense grids.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction

import mpmath
import numpy as np

mpmath.mp.dps = 60


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def floor_power(n: int, num: int, den: int) -> int:
    """floor(n^(num/den)) from a 60-digit evaluation, corrected exactly."""
    m = int(mpmath.floor(mpmath.power(n, mpmath.mpf(num) / den)))
    while (m + 1) ** den <= n**num:
        m += 1
    while m**den > n**num:
        m -= 1
    return m


def ps_values(x: int, a: int, b: int) -> list[int]:
    """Distinct floor(n^(b/a)) <= x by direct evaluation for every n."""
    out = set()
    n = 1
    while True:
        m = floor_power(n, b, a)
        if m > x:
            return sorted(out)
        out.add(m)
        n += 1


def primes(limit: int) -> list[int]:
    return [n for n in range(2, limit + 1) if is_prime(n)]


def von_mangoldt(n: int) -> float:
    for p in range(2, n + 1):
        if n % p == 0:
            while n % p == 0:
                n //= p
            return math.log(p) if n == 1 else 0.0
    return 0.0


def mobius(n: int) -> int:
    out, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            out = -out
        p += 1
    return -out if n > 1 else out


def ordered_factorisations(n: int, parts: int):
    if parts == 1:
        yield (n,)
        return
    for d in range(1, n + 1):
        if n % d == 0:
            for rest in ordered_factorisations(n // d, parts - 1):
                yield (d,) + rest


def heath_brown_sum(n: int, z: float, k: int) -> float:
    """Right side of the identity by listing every ordered factorisation."""
    total = []
    for j in range(1, k + 1):
        sign = (-1) ** (j - 1) * math.comb(k, j)
        for f in ordered_factorisations(n, 2 * j):
            if all(x <= z for x in f[j:]):
                mu = 1
                for x in f[j:]:
                    mu *= mobius(x)
                if mu:
                    total.append(sign * mu * math.log(f[0]))
    return math.fsum(total)


def equal_sum_tuples(values, t: int) -> int:
    """Ordered 2t-tuples with equal half sums by listing all half sums."""
    sums = Counter(sum(c) for c in itertools.product(values, repeat=t))
    return sum(v * v for v in sums.values())


def quadruples_broadcast(values) -> int:
    """a + b = c + d over all |values|^4 quadruples with a dense comparison."""
    v = np.asarray(values, dtype=np.int64)
    pair = v[:, None] + v[None, :]
    return int(np.count_nonzero(pair[:, :, None, None] == pair[None, None, :, :]))


def nine_cube_count(N: int, plist) -> int:
    """Ordered 9-tuples of primes from plist with cube sum N, by dictionary convolution."""
    cur = Counter({0: 1})
    cubes = [p**3 for p in plist]
    for _ in range(9):
        nxt = Counter()
        for s, c in cur.items():
            for q in cubes:
                if s + q <= N:
                    nxt[s + q] += c
        cur = nxt
    return cur.get(N, 0)


def local_density(p: int, N: int) -> Fraction:
    """p * #{units x_1..x_9 mod p : sum x^3 = N} / (p-1)^9, by residue dictionaries."""
    dist = Counter({0: 1})
    for _ in range(9):
        nxt = Counter()
        for r, c in dist.items():
            for x in range(1, p):
                nxt[(r + x**3) % p] += c
        dist = nxt
    return Fraction(p * dist[N % p], (p - 1) ** 9)


def singular_term(q: int, N: int) -> complex:
    """A(q, N) by mpmath sums over all reduced residues."""
    units = [m for m in range(1, q + 1) if math.gcd(m, q) == 1]
    total = mpmath.mpc(0)
    for a in units:
        s = mpmath.fsum(mpmath.expjpi(2 * mpmath.mpf(a * m**3 % q) / q) for m in units)
        total += s**9 * mpmath.expjpi(-2 * mpmath.mpf(a * N % q) / q)
    return complex(total / len(units) ** 9)


def gamma43_9_over_2() -> float:
    return float(mpmath.gamma(mpmath.mpf(4) / 3) ** 9 / mpmath.gamma(3))


def spacing_count(H: int, K: int, alpha: Fraction, Delta: Fraction) -> int:
    hs = range(H + 1, 2 * H + 1)
    ks = range(K + 1, 2 * K + 1)
    a = mpmath.mpf(alpha.numerator) / alpha.denominator
    d = mpmath.mpf(Delta.numerator) / Delta.denominator
    vals = [h * mpmath.power(k, a) for h in hs for k in ks]
    return sum(1 for x in vals for y in vals if abs(x - y) <= d)


def grid_minimum(obj, points: int = 200001) -> float:
    lo = math.log(obj.Q1)
    hi = math.log(obj.Q2)
    q = np.exp(np.linspace(lo, hi, points))
    L = np.zeros_like(q)
    for A, u in obj.ascending:
        L += A * q**u
    for B, v in obj.descending:
        L += B * q ** (-v)
    return float(min(L.min(), obj(obj.Q1), obj(obj.Q2)))


def threshold_by_bisection(admissible_at, lo: Fraction, hi: Fraction, steps: int = 60) -> Fraction:
    """Shrink [lo, hi] around the admissibility boundary, lo inadmissible, hi admissible."""
    for _ in range(steps):
        mid = (lo + hi) / 2
        if admissible_at(mid):
            hi = mid
        else:
            lo = mid
    return hi
