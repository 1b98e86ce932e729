"""Evaluation of e(x) = exp(2 pi i x) with exact quadrant symmetry.

Arguments are reduced to the first octant before calling cos/sin, so that
e(x + 1/2) == -e(x) and e(-x) == conj(e(x)) hold bit-for-bit for rational
arguments t/q, and e(x) is exactly 1, i, -1, -i at quarter points.  This
makes structurally vanishing sums of roots of unity vanish exactly.
"""
from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def _octant_cis(rem, q4):
    # cos/sin of 2 pi rem / q4 for 0 <= rem < q4/4, via the nearer octant
    rem = np.asarray(rem, dtype=np.float64)
    quarter = q4 / 4.0
    upper = 2.0 * rem > quarter
    f = np.where(upper, quarter - rem, rem) / q4
    c = np.cos(TWO_PI * f)
    s = np.sin(TWO_PI * f)
    return np.where(upper, s, c), np.where(upper, c, s)


def _rotate(k, c, s):
    k = np.asarray(k) % 4
    re = np.select([k == 0, k == 1, k == 2], [c, -s, -c], s)
    im = np.select([k == 0, k == 1, k == 2], [s, c, -s], -c)
    return re, im


def cis2pi_frac(t, q: int) -> np.ndarray:
    """e(t/q) for integer arrays t, computed from the exact residue of 4t mod 4q."""
    q = int(q)
    t = np.asarray(t, dtype=np.int64) % q
    four_t = 4 * t
    k = four_t // q
    rem = four_t - k * q
    c, s = _octant_cis(rem.astype(np.float64), 4.0 * q)
    re, im = _rotate(k, c, s)
    return re + 1j * im


def cis2pi(x) -> np.ndarray:
    """e(x) for real x, reduced to [0, 1) and then to the first octant."""
    x = np.asarray(x, dtype=np.float64)
    r = x - np.floor(x)
    k = np.floor(4.0 * r)
    k = np.minimum(k, 3.0)
    rem = r - 0.25 * k
    c, s = _octant_cis(rem, 1.0)
    re, im = _rotate(k.astype(np.int64), c, s)
    return re + 1j * im


def sin2pi(x: float) -> float:
    return float(cis2pi(x).imag)


def fsum_complex(values) -> complex:
    """Correctly rounded sum of complex values in the given order."""
    values = np.asarray(values, dtype=np.complex128).ravel()
    return complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist()))
