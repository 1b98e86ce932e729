"""Piatetski-Shapiro sequences and primes for rational exponents.

A rational exponent gamma = a/b in (1/2, 1] defines the sequence of
floor(n^(1/gamma)), n >= 1.  Membership of m is decided with integer
arithmetic only:

    m = floor(n^(1/gamma))  <=>  m^gamma <= n < (m+1)^gamma
                            <=>  m^a <= n^b < (m+1)^a.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import numpy as np

from . import config
from .errors import BudgetError, PreconditionError

__all__ = [
    "Exponent",
    "PsPrimeTable",
    "parse_gamma",
    "is_member",
    "indicator",
    "ps_sequence",
    "primes_upto",
    "ps_primes",
    "pi_gamma",
    "iroot_floor",
    "iroot_ceil",
]


@dataclass(frozen=True, order=True)
class Exponent:
    """gamma = num/den in lowest terms with 1/2 < gamma <= 1."""

    num: int
    den: int

    def __post_init__(self):
        a, b = self.num, self.den
        if not isinstance(a, int) or not isinstance(b, int) or isinstance(a, bool):
            raise PreconditionError(f"exponent parts must be integers, got {a!r}/{b!r}")
        if a <= 0 or b <= 0:
            raise PreconditionError(f"exponent parts must be positive, got {a}/{b}")
        if math.gcd(a, b) != 1:
            raise PreconditionError(f"exponent {a}/{b} is not in lowest terms")
        if not (2 * a > b and a <= b):
            raise PreconditionError(f"gamma = {a}/{b} outside (1/2, 1]")

    @classmethod
    def of(cls, value) -> "Exponent":
        """Coerce an Exponent, Fraction, int, or 'a/b' string."""
        if isinstance(value, Exponent):
            return value
        if isinstance(value, str):
            return parse_gamma(value)
        if isinstance(value, float):
            raise PreconditionError("floating-point exponents are not accepted; use a/b")
        fr = Fraction(value)
        return cls(fr.numerator, fr.denominator)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    @property
    def is_one(self) -> bool:
        return self.num == self.den

    def __float__(self) -> float:
        return self.num / self.den

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"


def parse_gamma(text: str) -> Exponent:
    """Strict parser for 'a/b' (the bare integer '1' is accepted as 1/1)."""
    s = text.strip()
    if s == "1":
        return Exponent(1, 1)
    parts = s.split("/")
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise PreconditionError(f"gamma must be written as a/b, got {text!r}")
    a, b = int(parts[0]), int(parts[1])
    if b == 0:
        raise PreconditionError("gamma denominator is zero")
    return Exponent(a, b)


def iroot_floor(x: int, k: int) -> int:
    """floor(x^(1/k)) for integers x >= 0, k >= 1."""
    if x < 0:
        raise PreconditionError("root of a negative integer")
    return int(gmpy2.iroot(gmpy2.mpz(x), k)[0])


def iroot_ceil(x: int, k: int) -> int:
    r, exact = gmpy2.iroot(gmpy2.mpz(x), k)
    return int(r) if exact else int(r) + 1


def _check_bits(m: int, gamma: Exponent, max_bits: int | None):
    if max_bits is None:
        max_bits = config.current().max_bits
    bits = gamma.num * (m + 1).bit_length()
    if bits > max_bits:
        raise BudgetError(
            f"({m}+1)^{gamma.num} needs about {bits} bits, over the {max_bits}-bit budget"
        )


def is_member(m: int, gamma, *, max_bits: int | None = None) -> bool:
    """True iff m = floor(n^(1/gamma)) for some positive integer n."""
    gamma = Exponent.of(gamma)
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise PreconditionError(f"m must be a positive integer, got {m!r}")
    m = int(m)
    if gamma.is_one:
        return True
    _check_bits(m, gamma, max_bits)
    a, b = gamma.num, gamma.den
    # least n with n^b >= m^a, then test n^b < (m+1)^a
    n = iroot_ceil(m**a, b)
    return n**b < (m + 1) ** a


def indicator(m: int, gamma, *, max_bits: int | None = None) -> int:
    """[-m^gamma] - [-(m+1)^gamma], with [.] the integer part.

    Since [-t] = -ceil(t) this counts the integers in [m^gamma, (m+1)^gamma),
    the same half-open window the defining map uses.
    """
    gamma = Exponent.of(gamma)
    m = int(m)
    if m < 1:
        raise PreconditionError(f"m must be a positive integer, got {m!r}")
    _check_bits(m, gamma, max_bits)
    a, b = gamma.num, gamma.den
    floor_neg_lo = -iroot_ceil(m**a, b)
    floor_neg_hi = -iroot_ceil((m + 1) ** a, b)
    return floor_neg_lo - floor_neg_hi


def ps_sequence(x: int, gamma) -> list[int]:
    """Distinct values floor(n^(1/gamma)) <= x, ascending, by iterating n."""
    gamma = Exponent.of(gamma)
    if x < 1:
        raise PreconditionError("x must be >= 1")
    if gamma.is_one:
        return list(range(1, x + 1))
    a, b = gamma.num, gamma.den
    out = []
    n = 1
    while True:
        # floor(n^(b/a)) = floor((n^b)^(1/a))
        m = iroot_floor(n**b, a)
        if m > x:
            break
        out.append(m)
        n += 1
    # gamma < 1 makes the map strictly increasing, so no deduplication is needed
    return out


def _simple_sieve(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def primes_upto(limit: int, segment: int = 1 << 20) -> np.ndarray:
    """All primes <= limit by a segmented sieve of Eratosthenes."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    root = math.isqrt(limit)
    base = _simple_sieve(root)
    if limit <= segment:
        return _simple_sieve(limit)
    chunks = [base]
    low = root + 1
    while low <= limit:
        high = min(low + segment, limit + 1)
        flags = np.ones(high - low, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= high:
                break
            start = max(p * p, -(-low // p) * p)
            flags[start - low :: p] = False
        chunks.append(np.flatnonzero(flags).astype(np.int64) + low)
        low = high
    return np.concatenate(chunks)


@dataclass(frozen=True)
class PsPrimeTable:
    """Ascending primes p <= limit lying in the sequence, with weights.

    ``log_weights`` holds log p; ``ps_weights`` holds (1/gamma) p^(1-gamma) log p,
    the weight carried by each prime in the weighted representation count.
    """

    gamma: Exponent
    limit: int
    primes: np.ndarray
    log_weights: np.ndarray = field(repr=False)
    ps_weights: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.primes)

    @property
    def size(self) -> int:
        return len(self.primes)


def _weights(primes: np.ndarray, gamma: Exponent):
    logs = np.log(primes.astype(np.float64))
    if gamma.is_one:
        return logs, logs.copy()
    g = float(gamma)
    ps = np.power(primes.astype(np.float64), 1.0 - g) * logs / g
    return logs, ps


def ps_primes(x: int, gamma, *, via: str = "map") -> PsPrimeTable:
    """Table of the primes <= x of the form floor(n^(1/gamma)).

    ``via="map"`` intersects the sieve with ps_sequence; ``via="indicator"``
    filters the sieve through :func:`indicator`.  Both give the same table.
    """
    gamma = Exponent.of(gamma)
    if x < 2:
        raise PreconditionError("x must be >= 2")
    plist = primes_upto(x)
    if gamma.is_one:
        chosen = plist
    elif via == "map":
        seq = np.asarray(ps_sequence(x, gamma), dtype=np.int64)
        chosen = plist[np.isin(plist, seq, assume_unique=True)]
    elif via == "indicator":
        mask = np.fromiter((indicator(int(p), gamma) == 1 for p in plist), bool, len(plist))
        chosen = plist[mask]
    else:
        raise PreconditionError(f"unknown membership route {via!r}")
    logs, ps = _weights(chosen, gamma)
    return PsPrimeTable(gamma, int(x), chosen, logs, ps)


def pi_gamma(x: int, gamma) -> tuple[int, float]:
    """(count of primes <= x in the sequence, count * log x / x^gamma)."""
    gamma = Exponent.of(gamma)
    if x < 3:
        raise PreconditionError("x must be >= 3")
    count = ps_primes(x, gamma).size
    return count, count * math.log(x) / x ** float(gamma)
