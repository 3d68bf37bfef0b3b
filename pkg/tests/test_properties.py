"""Cross-method agreement on a grid of absolutely convergent points."""

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from mdlseries.characters import alternating_sequence, character_sequence, enumerate_characters
from mdlseries.integrator import evaluate_integral
from mdlseries.kernel import SPoint, in_domain_D, in_domain_D0
from mdlseries.oracle import evaluate_direct


def chars(q):
    return [character_sequence(c) for c in enumerate_characters(q) if not c.is_principal]


GRID = [
    ((3,), (1.5,)),
    ((4,), (2.0,)),
    ((5,), (1.2 + 3j,)),
    ((7,), (1.8 - 1j,)),
    ((8,), (2.5,)),
    ((12,), (1.4 + 0.5j,)),
    (("alt",), (1.1,)),
    ((5,), (3.0 - 4j,)),
    ((4, 4), (2, 2)),
    ((3, 4), (1, 2)),
    ((5, 4), (1.5, 1.6 + 1j)),
    ((4, 3), (0.5, 2.5)),
    (("alt", 5), (3, 1.5)),
    ((4, "alt"), (1.2, 1.8 - 0.5j)),
    ((7, 3), (2 + 1j, 2 - 1j)),
    ((8, 5), (0.2, 3.0)),
    ((3, 3), (1.5, 1.5 + 2j)),
    ((5, 5), (-0.5, 3.5)),
    (("alt", "alt"), (1.3, 1.9)),
    ((12, 4), (2.5, 1.3)),
]


def make(tag, j):
    if tag == "alt":
        return alternating_sequence()
    cs = chars(tag)
    return cs[j % len(cs)]


@pytest.mark.parametrize("tags,s", GRID)
def test_integral_matches_direct(tags, s):
    p = SPoint(s)
    assert in_domain_D(p) and in_domain_D0(p)
    seqs = [make(t, j + 1) for j, t in enumerate(tags)]
    tol = 1e-5
    a = evaluate_integral(seqs, p, tol)
    b = evaluate_direct(seqs, p, tol)
    assert a.error_estimate <= tol and b.tail_bound <= tol
    assert abs(a.value - b.value) <= a.error_estimate + b.tail_bound


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(
    q=st.integers(3, 13),
    j=st.integers(0, 20),
    sigma=st.floats(1.2, 4.0),
    tau=st.floats(-6, 6),
    n0=st.integers(0, 6),
)
def test_random_rank_one_points(q, j, sigma, tau, n0):
    cs = chars(q)
    seq = cs[j % len(cs)]
    p = SPoint([complex(sigma, tau)], n0)
    a = evaluate_integral([seq], p, 1e-7)
    b = evaluate_direct([seq], p, 1e-7)
    assert abs(a.value - b.value) <= a.error_estimate + b.tail_bound

