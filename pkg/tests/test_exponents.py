from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wpslab import ConsistencyError, PreconditionError
from wpslab import exponents as X
from wpslab.exponents import sample_admissible, sample_evec

import oracles


def test_delta_vector_examples():
    v = X.delta_vector("317/320")
    assert v.deltas[0] == F(9, 320)
    assert v.deltas[8] == 0
    assert all(d == 0 for d in X.delta_vector("1").deltas)


@given(st.lists(st.sampled_from(["1", "9/10", "3/4", "199/200", "317/320", "2/3"]), min_size=9, max_size=9))
@settings(max_examples=100, deadline=None)
def test_delta_vector_formula(gs):
    v = X.delta_vector(gs)
    fr = [F(g) for g in gs]
    for i in range(9):
        assert v.deltas[i] == F(3, 8) * sum(1 - g for g in fr[i + 1:])
    assert all(a >= b for a, b in zip(v.deltas, v.deltas[1:]))


def test_admissible_examples():
    assert X.admissible("1")
    assert not X.admissible("317/320")
    assert X.constraint_values("317/320")[0] == 1
    assert X.admissible("199/200")
    assert X.constraint_values("199/200")[0] == F(8, 15)


def test_threshold_examples():
    assert X.threshold() == F(317, 320)
    assert X.threshold(range(1, 9)) == F(77, 80)
    assert X.threshold(range(1, 8)) == F(107, 110)
    with pytest.raises(PreconditionError):
        X.threshold(range(1, 10))


@pytest.mark.parametrize("fixed", [(), tuple(range(1, 9)), tuple(range(1, 8)), (1,), (9,), (2, 5, 7), (1, 2, 3, 4)])
def test_threshold_matches_bisection(fixed):
    t = X.threshold(fixed)

    def ok(g):
        return X.admissible(X.pattern_vector(g, fixed))

    assert not ok(t)
    assert ok(t + F(1, 10**9))
    found = oracles.threshold_by_bisection(ok, F(51, 100), F(1) - F(1, 10**12))
    assert abs(found - t) < F(1, 10**15)


def test_budget_examples():
    b = X.budget(F(199, 200), F(1, 1000))
    assert b.a_frak == F(583, 800)
    assert b.b_frak == F(12, 125)
    # direct substitution: 16/17 - (16/17)(1/200) - (32/17)(1/1000)
    assert b.c_frak == F(16, 17) - F(16, 17) * F(1, 200) - F(32, 17) * F(1, 1000) == F(15888, 17000)
    assert b.flags_ok and b.admissible
    assert b.h0_exp == F(6, 1000) and b.h1_exp == F(1, 200)
    b = X.budget(1, 0)
    assert (b.b_frak, b.a_frak, b.c_frak) == (0, F(3, 4), F(16, 17))
    b = X.budget(F(97, 100), F(7, 1000))
    assert b.c_frak == F(102, 125)


def test_budget_errors():
    for args in [(F(1, 2), 0), (F(11, 10), 0), (F(9, 10), F(1, 2)), (F(9, 10), -1)]:
        with pytest.raises(PreconditionError):
            X.budget(*args)
    with pytest.raises(PreconditionError):
        X.budget(0.9, 0)
    with pytest.raises(PreconditionError):
        X.budget(F(9, 10), 0, -1)


def test_budget_flags_on_admissible_samples():
    rng = np.random.default_rng(11)
    for i in range(2000):
        g, d = sample_admissible(rng, near_edge=i % 2 == 1)
        b = X.budget(g, d)
        assert b.admissible and b.flags_ok


def test_partition_examples():
    b = X.budget(F(199, 200), F(1, 1000))
    p = X.case_partition(["0.95", "0.05", 0, 0, 0, 0], b)
    assert (p.case, p.kind, p.k_exp, p.index) == (1, "I", F(95, 100), 1)
    p = X.case_partition(["0.3", "0.3", "0.1", "0.1", "0.1", "0.1"], b)
    assert (p.case, p.kind, p.k_exp, p.index) == (2, "II", F(3, 10), 1)
    assert 1 - b.c_frak <= F(3, 10) < 1 - b.b_frak
    b = X.budget(F(97, 100), F(7, 1000))
    assert 1 - b.c_frak == F(23, 125)
    p = X.case_partition([F(1, 6)] * 6, b)
    assert (p.case, p.ell, p.k_exp) == (3, 2, F(1, 3))


def test_partition_reports_sort_permutation():
    b = X.budget(F(97, 100), F(7, 1000))
    e = [F(15, 100), F(18, 100), F(17, 100), F(16, 100), F(17, 100), F(17, 100)]
    p = X.case_partition(e, b)
    assert p.case == 3
    assert [e[i - 1] for i in p.permutation] == sorted(e, reverse=True)


def test_partition_preconditions():
    b = X.budget(F(199, 200), F(1, 1000))
    with pytest.raises(PreconditionError):
        X.case_partition([F(1, 2), F(1, 2), 0, 0, 0], b)
    with pytest.raises(PreconditionError):
        X.case_partition([F(1, 2), F(1, 4), 0, 0, 0, 0], b)
    with pytest.raises(PreconditionError):
        X.case_partition([0, 0, 0, F(1, 2), F(1, 4), F(1, 4)], b)
    with pytest.raises(PreconditionError):
        X.case_partition([0.5, 0.5, 0, 0, 0, 0], b)


def test_partition_totality_and_ranges():
    rng = np.random.default_rng(5)
    for i in range(2000):
        g, d = sample_admissible(rng, near_edge=i % 2 == 1)
        b = X.budget(g, d)
        e = sample_evec(rng, style=i % 2)
        p = X.case_partition(e, b)
        if p.kind == "I":
            assert p.m_exp <= b.a_frak and p.k_exp >= 1 - b.b_frak
        else:
            assert b.b_frak <= p.m_exp <= b.c_frak
        if p.case == 3:
            assert 1 - b.c_frak <= p.k_exp < 1 - b.b_frak
            assert all(v < 1 - b.c_frak for v in e)


def test_consistency_error_is_raised_on_broken_budget():
    # a forged budget with 1 - c > c - b cannot always partition
    b = X.budget(F(97, 100), F(7, 1000))
    forged = X.ExponentBudget(b.gamma, b.Delta, b.epsilon, b.a_frak, F(3, 5), F(13, 20), b.h0_exp,
                              b.h1_exp, True, True, True, True)
    with pytest.raises(ConsistencyError):
        X.case_partition([F(1, 6)] * 6, forged)
