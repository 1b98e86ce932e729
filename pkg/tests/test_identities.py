import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wpslab import PreconditionError, BudgetError
from wpslab import identities as I

import oracles


def test_tables_invariants():
    t = I.ArithmeticTables.build(3000)
    for n in range(1, 3001):
        divs = [d for d in range(1, int(math.isqrt(n)) + 1) if n % d == 0]
        divs = sorted(set(divs + [n // d for d in divs]))
        assert abs(math.fsum(t.mangoldt[d] for d in divs) - math.log(n)) < 1e-9
        assert sum(int(t.moebius[d]) for d in divs) == (1 if n == 1 else 0)
    for n in range(1, 300):
        assert t.mobius(n) == oracles.mobius(n)
        assert t.von_mangoldt(n) == pytest.approx(oracles.von_mangoldt(n), abs=1e-15)


def test_hb_examples():
    assert I.hb_check(1, 10, 3) == 0
    assert I.hb_check(8, 2, 3) < 1e-12
    assert I.hb_check(6, 10, 2) < 1e-12
    with pytest.raises(PreconditionError):
        I.hb_check(2001, 10, 3)


@pytest.mark.parametrize("z,k", [(10, 3), (30, 2), (1000, 1)])
def test_hb_exhaustive(z, k):
    worst = max(I.hb_check(n, z, k) for n in range(1, 2 * z**k + 1))
    assert worst < 1e-9


@pytest.mark.parametrize("z,k", [(3, 2), (2, 3), (5, 2)])
def test_hb_sum_matches_factorisation_listing(z, k):
    for n in range(1, min(2 * z**k, 60) + 1):
        assert I.hb_sum(n, z, k) == pytest.approx(oracles.heath_brown_sum(n, z, k), abs=1e-12)


def test_psi_examples():
    assert I.psi_value(0.25) == -0.25
    assert I.psi_value(3.0) == -0.5
    err, g, ratio = I.psi_error_ratio(0.5, 1)
    assert err == 0 and ratio == 0
    assert I.psi_error_ratio(0.0, 17) == (0.5, 1.0, 0.5)


def test_psi_partial_sum_against_direct():
    for theta in (0.1, 0.37, 0.9):
        ref = -sum(math.sin(2 * math.pi * h * theta) / (math.pi * h) for h in range(1, 51))
        assert I.psi_partial_sum(theta, 50) == pytest.approx(ref, abs=1e-13)


def test_psi_grid_matches_pointwise():
    grid = I.psi_ratio_grid(30, 101)
    for j in (0, 1, 17, 50, 100):
        assert grid[j] == pytest.approx(I.psi_error_ratio(j / 101, 30)[2], abs=1e-12)


def test_g_coefficients_decay():
    H = 16
    a = I.g_coefficients(H, 200)
    h = np.arange(1, 201)
    # |a(h)| is bounded by a multiple of min(log(H)/H, H/h^2)
    env = np.minimum(np.log(2 * H) / H, H / h**2.0)
    assert np.all(np.abs(a[1:]) <= 4 * env)


def test_count_N_Delta_examples():
    assert I.count_N_Delta(1, 1, Fraction(3, 4), 0)[0] == 1
    assert I.count_N_Delta(2, 2, Fraction(3, 4), Fraction(1, 10))[0] == 4
    count, bound, ratio = I.count_N_Delta(32, 32, Fraction(9, 10), 1)
    assert ratio <= 16 and count >= 32 * 32


@pytest.mark.parametrize("H,K,alpha,Delta", [
    (4, 4, Fraction(3, 4), Fraction(1, 2)),
    (5, 3, Fraction(9, 10), Fraction(3)),
    (3, 6, Fraction(2, 3), Fraction(1, 10)),
    (4, 4, Fraction(1), Fraction(0)),
])
def test_count_N_Delta_against_mpmath(H, K, alpha, Delta):
    assert I.count_N_Delta(H, K, alpha, Delta)[0] == oracles.spacing_count(H, K, alpha, Delta)


def test_count_N_Delta_monotone_and_threads():
    prev = 0
    for d in (0, Fraction(1, 100), Fraction(1, 10), 1, 5, 50):
        c = I.count_N_Delta(10, 12, Fraction(3, 4), d)[0]
        assert c >= prev
        assert c == I.count_N_Delta(10, 12, Fraction(3, 4), d, workers=3)[0]
        prev = c
    with pytest.raises(BudgetError):
        I.count_N_Delta(100, 100, Fraction(3, 4), 1, max_terms=10**6)


def test_srinivasan_examples():
    r = I.srinivasan_min(I.MonomialObjective(((1, 1),), ((1, 1),), 1, 4))
    assert (r.q_star, r.L_min, r.rhs) == (1, 2, 2.25)
    r = I.srinivasan_min(I.MonomialObjective(((1, 2),), (), 2, 3))
    assert (r.q_star, r.L_min, r.rhs) == (2, 4, 4)
    r = I.srinivasan_min(I.MonomialObjective((), ((4, 1),), 1, 2))
    assert (r.q_star, r.L_min, r.rhs) == (2, 2, 2)
    with pytest.raises(PreconditionError):
        I.MonomialObjective((), (), 1, 2)


def test_srinivasan_interior_optimum():
    # q^2 + 8/q has its minimum at q = 2^(2/3)
    r = I.srinivasan_min(I.MonomialObjective(((1, 2),), ((8, 1),), 0.1, 10))
    assert r.q_star == pytest.approx(2 ** (2 / 3), rel=1e-12)
    assert r.sound


@given(st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_srinivasan_against_grid(seed):
    obj = I.random_objective(np.random.default_rng(seed))
    r = I.srinivasan_min(obj)
    grid = oracles.grid_minimum(obj)
    assert r.L_min <= grid * (1 + 1e-12)
    assert grid <= r.L_min * (1 + 1e-6)
    assert r.sound


def test_vdc_examples():
    r = I.vdc_probe(2, 0, 1, "9/10", 0.0, 100)
    assert r.ratio <= 4
    with pytest.raises(PreconditionError):
        I.vdc_probe(2, 0, 0, "9/10", 0.0, 100)
    r = I.vdc_probe(4, "1/1000", 3, "3/4", 0.5, 10**4)
    assert math.isfinite(r.ratio) and r.ratio > 0


def test_vdc_direct_sum():
    r = I.vdc_probe(2, "1/7", 2, "3/4", 0.5, 50)
    total = sum(complex(math.cos(t), math.sin(t)) for t in
                (2 * math.pi * (n**3 / 7 + 2 * (n + 0.5) ** 0.75) for n in range(51, 101)))
    assert r.sum_abs == pytest.approx(abs(total), rel=1e-10)


def test_phase_derivative():
    x = np.array([10.0, 20.0])
    d2 = I.phase_derivative(2, x, 0.01, 3, 0.75, 0.5)
    assert np.allclose(d2, 6 * 0.01 * x + 3 * 0.75 * -0.25 * (x + 0.5) ** -1.25)
