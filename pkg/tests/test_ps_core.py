import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wpslab import BudgetError, PreconditionError
from wpslab.ps_core import (
    Exponent,
    indicator,
    iroot_ceil,
    iroot_floor,
    is_member,
    parse_gamma,
    pi_gamma,
    primes_upto,
    ps_primes,
    ps_sequence,
)

import oracles

GAMMAS = ["3/4", "9/10", "199/200", "5/8", "2/3", "11/12"]


def test_exponent_validation():
    assert Exponent(9, 10).fraction == Fraction(9, 10)
    assert Exponent.of("1").is_one
    assert str(Exponent.of(Fraction(18, 20))) == "9/10"
    for bad in [(1, 2), (3, 2), (2, 4), (0, 1)]:
        with pytest.raises(PreconditionError):
            Exponent(*bad)
    with pytest.raises(PreconditionError):
        Exponent.of(0.9)
    for text in ["0.9", "9/", "a/b", "9/10/1", "9/0"]:
        with pytest.raises(PreconditionError):
            parse_gamma(text)


def test_membership_examples():
    assert [is_member(m, "3/4") for m in (1, 2, 3)] == [True, True, False]
    with pytest.raises(PreconditionError):
        is_member(0, "3/4")


def test_sequence_examples():
    assert ps_sequence(8, "3/4") == [1, 2, 4, 6, 8]
    assert ps_sequence(5, "1") == [1, 2, 3, 4, 5]
    assert ps_sequence(1, "9/10") == [1]


@pytest.mark.parametrize("gamma", GAMMAS)
def test_sequence_matches_high_precision_floors(gamma):
    g = parse_gamma(gamma)
    assert ps_sequence(3000, g) == oracles.ps_values(3000, g.num, g.den)


@pytest.mark.parametrize("gamma", GAMMAS)
def test_sequence_matches_membership(gamma):
    seq = ps_sequence(20000, gamma)
    members = [m for m in range(1, 20001) if is_member(m, gamma)]
    assert seq == members


@pytest.mark.parametrize("gamma", GAMMAS)
def test_indicator_agrees_with_map_on_primes(gamma):
    for p in primes_upto(100000)[::7]:
        assert indicator(int(p), gamma) == int(is_member(int(p), gamma))


@given(st.integers(1, 10**6), st.sampled_from(GAMMAS))
@settings(max_examples=300, deadline=None)
def test_indicator_is_half_open_window_for_all_m(m, gamma):
    # [m^g, (m+1)^g) holds exactly one integer iff m is in the sequence
    assert indicator(m, gamma) == int(is_member(m, gamma))


def test_integer_roots():
    for x in [0, 1, 7, 8, 9, 10**30, 10**30 + 1]:
        r = iroot_floor(x, 3)
        assert r**3 <= x < (r + 1) ** 3
        c = iroot_ceil(x, 3)
        assert (c - 1) ** 3 < x <= c**3 or x == 0


def test_bit_budget():
    with pytest.raises(BudgetError):
        is_member(10**6, "999/1000", max_bits=1000)


def test_primes_upto_segmented():
    assert primes_upto(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    p = primes_upto(3_000_000, segment=1 << 16)
    assert len(p) == 216816
    assert np.all(np.diff(p) > 0)
    assert p[:200].tolist() == oracles.primes(p[199])


def test_ps_primes_examples():
    assert ps_primes(20, "9/10").primes.tolist() == [2, 3, 5, 7, 11, 17]
    assert ps_primes(10, "1").primes.tolist() == [2, 3, 5, 7]
    assert ps_primes(2, "9/10").primes.tolist() == [2]


@pytest.mark.parametrize("gamma", GAMMAS)
def test_ps_primes_routes_agree(gamma):
    a = ps_primes(50000, gamma, via="map")
    b = ps_primes(50000, gamma, via="indicator")
    assert np.array_equal(a.primes, b.primes)
    expected = [m for m in oracles.ps_values(3000, parse_gamma(gamma).num, parse_gamma(gamma).den)
                if oracles.is_prime(m)]
    assert a.primes[a.primes <= 3000].tolist() == expected


def test_weights():
    t = ps_primes(1000, "9/10")
    p = t.primes.astype(float)
    assert np.allclose(t.log_weights, np.log(p), rtol=0, atol=1e-15)
    assert np.allclose(t.ps_weights, p**0.1 * np.log(p) / 0.9, rtol=1e-14)
    one = ps_primes(1000, "1")
    assert np.array_equal(one.primes, primes_upto(1000))
    assert np.array_equal(one.ps_weights, one.log_weights)


def test_pi_gamma():
    assert pi_gamma(20, "9/10")[0] == 6
    assert pi_gamma(10, "1")[0] == 4
    assert pi_gamma(3, "9/10")[0] == 2
    count, ratio = pi_gamma(10**5, "9/10")
    assert ratio == pytest.approx(count * math.log(10**5) / 10**4.5)
    with pytest.raises(PreconditionError):
        pi_gamma(2, "9/10")


def test_pi_gamma_monotone_and_below_pi():
    prev = 0
    for x in range(3, 3000, 37):
        c = pi_gamma(x, "3/4")[0]
        assert prev <= c <= len(primes_upto(x))
        prev = c
