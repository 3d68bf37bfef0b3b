import cmath
import random

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdlseries.compositions import enumerate_compositions
from mdlseries.kernel import (
    SPoint,
    in_domain_D,
    in_domain_D0,
    kernel_eval,
    kernel_table,
    lemma1_lhs,
    lemma1_product,
    lemma1_product_dt1,
    lemma1_rhs,
    pochhammer,
)

cplx = st.complex_numbers(max_magnitude=6, allow_nan=False, allow_infinity=False)


def test_pochhammer_examples():
    assert pochhammer(3 + 2j, 0) == 1
    assert pochhammer(2, 3) == 24
    assert pochhammer(1j, 2) == -1 + 1j
    with pytest.raises(ValueError):
        pochhammer(1, -1)


@given(s=cplx, k=st.integers(0, 8))
def test_pochhammer_recurrence(s, k):
    lhs = pochhammer(s, k + 1)
    rhs = pochhammer(s, k) * (s + k)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_spoint_validation():
    p = SPoint([1.5, 2 + 1j], 3)
    assert p.r == 2 and p.sigma == (1.5, 2.0) and p.n0 == 3
    for bad in ([], ):
        with pytest.raises(ValueError):
            SPoint(bad)
    with pytest.raises(ValueError):
        SPoint([1], -1)
    with pytest.raises(ValueError):
        SPoint([1], 0.5)


def test_region_examples():
    assert in_domain_D(SPoint([-0.5, 1.0]))
    assert not in_domain_D(SPoint([0.5, -0.2]))
    assert in_domain_D(SPoint([-1, 0.5, 0.6]))
    assert in_domain_D0(SPoint([1.5]))
    assert in_domain_D0(SPoint([2, 2]))
    assert not in_domain_D0(SPoint([0.5, 0.7]))


def test_kernel_examples():
    assert kernel_eval([1], SPoint([2])).value == pytest.approx(2)
    assert kernel_eval([1, 1], SPoint([1, 1])).value == pytest.approx(0.5, abs=1e-15)
    # five terms 1/36 + 1/27 + 1/36 + 1/27 + 1/27, expanded by hand
    v = kernel_eval([1, 1, 1], SPoint([1, 1, 1]), explain=True)
    assert v.value == pytest.approx(1 / 6, abs=1e-15)
    assert len(v.terms) == 5
    assert sum(t[2] for t in v.terms) == pytest.approx(v.value)
    assert lemma1_rhs([1, 1, 1], SPoint([1, 1, 1])) == v.value
    with pytest.raises(ValueError):
        kernel_eval([0.5], SPoint([1]))
    with pytest.raises(ValueError):
        kernel_eval([1, 1], SPoint([1]))


def test_rank_two_kernel_matches_explicit_form():
    rng = random.Random(1)
    for _ in range(100):
        s1 = complex(rng.uniform(-2, 3), rng.uniform(-4, 4))
        s2 = complex(rng.uniform(-2, 3), rng.uniform(-4, 4))
        n0 = rng.choice([0, 1, 7])
        t1, t2 = rng.uniform(1, 50), rng.uniform(1, 50)
        a, b = n0 + t1, n0 + t1 + t2
        explicit = s1 * s2 / (a ** (s1 + 1) * b ** (s2 + 1)) + s2 * (s2 + 1) / (a**s1 * b ** (s2 + 2))
        got = kernel_eval([t1, t2], SPoint([s1, s2], n0)).value
        assert abs(got - explicit) <= 1e-13 * max(1.0, abs(explicit))


@settings(max_examples=100, deadline=None)
@given(
    s=st.lists(cplx, min_size=1, max_size=4),
    n0=st.integers(0, 5),
    data=st.data(),
)
def test_kernel_conjugation_and_table(s, n0, data):
    t = data.draw(st.lists(st.floats(1, 100), min_size=len(s), max_size=len(s)))
    p = SPoint(s, n0)
    v = kernel_eval(t, p).value
    assert abs(kernel_eval(t, p.conj()).value - v.conjugate()) <= 1e-12 * max(1, abs(v))
    tau = [np.array([x]) for x in n0 + np.cumsum(t)]
    tab = kernel_table(p)(tau)[0]
    assert abs(tab - v) <= 1e-11 * max(1, abs(v))


@pytest.mark.parametrize("s", [(2.0,), (0.5 + 1j, 1.5), (-0.3, 1.2), (1, 1, 2 - 1j)])
def test_last_axis_tail_table(s):
    p = SPoint(s, 2)
    tab = kernel_table(p).tail_last_axis()
    head = [1.7, 2.4][: p.r - 1]
    x = 3.5
    mp.mp.dps = 20
    f = lambda u: kernel_eval(head + [float(u)], p).value  # noqa: E731
    ref = complex(mp.quad(lambda u: mp.mpc(f(u)), [x, 10 * x, mp.inf]))
    tau = [np.array([v]) for v in p.n0 + np.cumsum(head + [x])]
    assert abs(tab(tau)[0] - ref) <= 1e-9 * max(1, abs(ref))


def random_point(rng, r):
    s = [complex(rng.uniform(-1, 3), rng.uniform(-5, 5)) for _ in range(r)]
    t = [rng.uniform(1, 5) for _ in range(r)]
    return t, SPoint(s, rng.choice([0, 1, 7]))


@pytest.mark.parametrize("r", [3, 4, 5])
def test_lemma1_identity(r):
    rng = random.Random(r)
    for _ in range(100):
        t, p = random_point(rng, r)
        rhs = lemma1_rhs(t, p)
        assert abs(lemma1_lhs(t, p) - rhs) <= 1e-10 * (1 + abs(rhs))


def test_lemma1_examples():
    p = SPoint([1, 1, 1])
    assert lemma1_lhs([1, 1, 1], p) == pytest.approx(lemma1_rhs([1, 1, 1], p), abs=1e-15)
    p = SPoint([0.5 + 1j, -0.2, 1.1], 2)
    t = [2, 1.5, 3]
    assert abs(lemma1_lhs(t, p) - lemma1_rhs(t, p)) < 1e-14
    with pytest.raises(ValueError):
        lemma1_lhs([1, 1], SPoint([1, 1]))


def test_lemma1_derivative_against_finite_differences():
    rng = random.Random(7)
    h = 1e-5
    for _ in range(50):
        r = rng.choice([3, 4, 5])
        t, p = random_point(rng, r)
        for term in enumerate_compositions(r - 1):
            tp, tm = list(t), list(t)
            tp[0] += h
            tm[0] -= h
            fd = (lemma1_product(tp, p, term.k) - lemma1_product(tm, p, term.k)) / (2 * h)
            an = lemma1_product_dt1(t, p, term.k)
            assert abs(fd - an) <= 1e-6 * abs(an)


def test_term_counts():
    assert len(kernel_eval([1, 1, 1], SPoint([1, 1, 1]), explain=True).terms) == 5
    brute4 = sum(
        1
        for k in np.ndindex(5, 5, 5, 5)
        if sum(k) == 4 and all(sum(k[: i + 1]) <= i + 1 for i in range(4))
    )
    assert len(kernel_eval([1] * 4, SPoint([1] * 4), explain=True).terms) == brute4 == 14


def test_complex_power_uses_real_log():
    p = SPoint([0.3 + 7j])
    v = kernel_eval([2.5], p).value
    assert v == pytest.approx((0.3 + 7j) * cmath.exp(-(1.3 + 7j) * cmath.log(2.5)))
