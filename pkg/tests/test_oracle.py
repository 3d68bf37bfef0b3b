import math
from fractions import Fraction

import pytest

from mdlseries.characters import (
    alternating_sequence,
    character_sequence,
    make_character,
    periodic_sequence,
)
from mdlseries.errors import BudgetError, RegionError
from mdlseries.kernel import SPoint
from mdlseries.oracle import evaluate_direct, evaluate_iterated_abel, partial_sum_trajectory


def seq(q, *e):
    return character_sequence(make_character(q, list(e)))


def test_direct_catalan(chi4, golden):
    rep = evaluate_direct([chi4], SPoint([2]), 1e-10)
    assert rep.mode == "direct" and 0 <= rep.tail_bound <= 1e-10
    assert abs(rep.value - golden["series"]["r1_chi4_s2"]) <= 1e-10
    assert abs(rep.value - 0.9159656) < 1e-7


def test_direct_principal_character():
    rep = evaluate_direct([seq(4, 0)], SPoint([2]), 1e-6)
    assert abs(rep.value - math.pi**2 / 8) <= 1e-6


def test_direct_rank_two_golden(chi4, golden):
    rep = evaluate_direct([chi4, chi4], SPoint([2, 2]), 1e-8)
    assert abs(rep.value - golden["series"]["r2_chi4_chi4_s2_2"]) <= rep.tail_bound <= 1e-8


def test_direct_errors(chi4):
    with pytest.raises(RegionError):
        evaluate_direct([chi4, chi4], SPoint([0.5, 0.7]), 1e-4)
    with pytest.raises(ValueError):
        evaluate_direct([chi4] * 4, SPoint([3] * 4), 1e-4)
    with pytest.raises(ValueError):
        evaluate_direct([chi4], SPoint([2]), 1e-4, order="reversed")
    with pytest.raises(BudgetError) as exc:
        evaluate_direct([chi4, chi4], SPoint([1.5, 1.6]), 1e-9, max_terms=10**5)
    assert exc.value.best.tail_bound > 1e-9


ORDER_POINTS = [
    ((4, 4), (2, 2)),
    ((3, 4), (1, 2)),
    ((5, 4), (1.5, 1.6 + 1j)),
    ((4, 3), (0.5, 2.5)),
    ((3, 3), (3, 1.5)),
]


@pytest.mark.parametrize("mods,s", ORDER_POINTS)
def test_summation_order(mods, s):
    seqs = [seq(q, 1) for q in mods]
    p = SPoint(s)
    a = evaluate_direct(seqs, p, 1e-6)
    b = evaluate_direct(seqs, p, 1e-6, order="reversed")
    assert a.horizons == b.horizons
    assert abs(a.value - b.value) <= a.tail_bound + b.tail_bound


AGREEMENT_POINTS = [
    ("chi4", (1.5,)),
    ("chi3", (2 + 1j,)),
    ("chi5", (1.3 - 2j,)),
    ("alt", (1.1,)),
    ("chi4", (3.0,)),
    (("chi4", "chi4"), (2, 2)),
    (("chi3", "chi4"), (1, 2)),
    (("chi5", "chi4"), (1.5, 1.6 + 1j)),
    (("chi4", "chi3"), (0.5, 2.5)),
    (("alt", "chi5"), (3, 1.5)),
    (("chi4", "alt"), (1.2, 1.8 - 0.5j)),
]

NAMED = {
    "chi3": lambda: seq(3, 1),
    "chi4": lambda: seq(4, 1),
    "chi5": lambda: seq(5, 1),
    "alt": alternating_sequence,
}


def build(names):
    names = (names,) if isinstance(names, str) else names
    return [NAMED[n]() for n in names]


@pytest.mark.parametrize("names,s", AGREEMENT_POINTS)
def test_direct_and_conditional_oracles_agree(names, s):
    seqs, p = build(names), SPoint(s)
    a = evaluate_direct(seqs, p, 1e-6)
    b = evaluate_iterated_abel(seqs, p, 1e-7)
    assert abs(a.value - b.value) <= a.error_estimate + b.error_estimate


def test_conditional_rank_one(chi4):
    rep = evaluate_iterated_abel([chi4], SPoint([0.5]), 1e-8)
    assert math.isfinite(abs(rep.value)) and rep.spread < 1e-8
    finer = evaluate_iterated_abel([chi4], SPoint([0.5]), 1e-10)
    assert abs(finer.value - rep.value) <= 2 * rep.spread + finer.spread


@pytest.mark.parametrize(
    "names,s,key",
    [
        (("chi4", "chi4"), (0.5, 0.7), "r2_chi4_chi4_s0.5_0.7"),
        (("chi3", "chi4"), (-0.3, 1.2), "r2_chi3_chi4_s-0.3_1.2"),
        (("chi4", "chi3"), (-0.3, 1.2), "r2_chi4_chi3_s-0.3_1.2"),
        (("alt", "alt"), (0.6, 0.6), "r2_alt_alt_s0.6_0.6"),
    ],
)
def test_conditional_rank_two_golden(names, s, key, golden):
    rep = evaluate_iterated_abel(build(names), SPoint(s), 1e-6)
    assert rep.mode == "iterated-abel" and rep.spread >= 0 and rep.inner_bound >= 0
    assert abs(rep.value - golden["series"][key]) <= rep.error_estimate <= 1e-6


def test_conditional_errors(chi4):
    with pytest.raises(RegionError):
        evaluate_iterated_abel([chi4, chi4], SPoint([0.5, -0.2]), 1e-4)
    with pytest.raises(RegionError):
        evaluate_iterated_abel([seq(4, 0)], SPoint([2]), 1e-4)
    with pytest.raises(ValueError):
        evaluate_iterated_abel([chi4] * 3, SPoint([1] * 3), 1e-4)
    with pytest.raises(BudgetError) as exc:
        evaluate_iterated_abel([chi4], SPoint([0.1]), 1e-12, max_horizon=256)
    assert exc.value.best.spread >= 1e-12


def spread_at(seqs, p, tol, budget):
    try:
        return evaluate_iterated_abel(seqs, p, tol, max_horizon=budget).spread
    except BudgetError as exc:
        return exc.best.spread


@pytest.mark.parametrize("names,s", [("chi4", (0.3,)), (("chi4", "chi3"), (0.4, 0.5))])
def test_doubling_budget_never_increases_spread(names, s):
    seqs, p = build(names), SPoint(s)
    spreads = [spread_at(seqs, p, 1e-9, 2**k) for k in range(7, 13)]
    assert all(b <= a for a, b in zip(spreads, spreads[1:]))


def test_trajectory_examples(chi4):
    traj = partial_sum_trajectory([chi4], SPoint([1]), 8)
    assert len(traj) == 8
    exact = [Fraction(1), 1, Fraction(2, 3), Fraction(2, 3), Fraction(13, 15), Fraction(13, 15)]
    exact += [Fraction(76, 105), Fraction(76, 105)]
    for got, want in zip(traj, exact):
        assert got == pytest.approx(float(want), abs=1e-15)
    zero = periodic_sequence([0.0])
    assert partial_sum_trajectory([zero], SPoint([1]), 5) == [0j] * 5
    assert partial_sum_trajectory([zero, zero], SPoint([0.5, 0.5]), 5) == [0j] * 5


def test_rank_two_trajectory_is_cauchy(chi4, chi3):
    p = SPoint([-0.3, 1.2])
    traj = partial_sum_trajectory([chi3, chi4], p, 4096)
    fluct = []
    for X in (256, 1024, 4096):
        window = traj[X // 2 - 1 : X]
        fluct.append(max(abs(a - b) for a in window for b in window[::37]))
    assert fluct[0] > fluct[1] > fluct[2]


def test_trajectory_errors(chi4):
    with pytest.raises(ValueError):
        partial_sum_trajectory([chi4] * 3, SPoint([1] * 3), 5)
    with pytest.raises(ValueError):
        partial_sum_trajectory([chi4], SPoint([1]), 0)
    with pytest.raises(RegionError):
        partial_sum_trajectory([chi4, chi4], SPoint([1, -0.5]), 5)
