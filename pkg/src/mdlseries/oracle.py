"""Series-side evaluators, independent of the multiple-integral quadrature.

``evaluate_direct`` sums the truncated nested series with a certified tail
(absolute convergence region only).  ``evaluate_iterated_abel`` handles the
conditional region for r <= 2: the outer index is summed to period-aligned
horizons and averaged over one period window, and the inner series is
summed by parts with its tail replaced by a mean/fluctuation correction.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .characters import BoundedSequence, partial_sum_bound
from .errors import BudgetError, RegionError
from .integrator import AxisStats, axis_stats
from .kernel import SPoint, in_domain_D, in_domain_D0
from .majorants import Monomial, chain_bound, derivative, monomials_bound

__all__ = [
    "SummationReport",
    "evaluate_direct",
    "evaluate_iterated_abel",
    "partial_sum_trajectory",
]

DIRECT_MAX_TERMS = 2 * 10**8
ABEL_MAX_HORIZON = 2**21
_CHUNK = 1 << 21


@dataclass(frozen=True)
class SummationReport:
    value: complex
    horizons: tuple[int, ...]
    mode: str  # "direct" | "iterated-abel"
    tail_bound: float | None = None
    spread: float | None = None
    inner_bound: float = 0.0
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def error_estimate(self) -> float:
        if self.mode == "direct":
            return float(self.tail_bound)
        return float(self.spread) + self.inner_bound

    def to_json(self) -> dict:
        return {
            "horizons": list(self.horizons),
            "mode": self.mode,
            "tail_bound": self.tail_bound,
            "spread": self.spread,
            "inner_bound": self.inner_bound,
        }


def _powers(base: np.ndarray, s: complex) -> np.ndarray:
    return np.exp(-s * np.log(base))


def _weight_bound(seq: BoundedSequence) -> float:
    """sup |a(n)|; never more than twice the partial-sum bound."""
    if seq.character is not None:
        return 1.0
    if seq.period is not None:
        sup = float(np.max(np.abs(seq(np.arange(1, seq.period + 1)))))
    else:
        sup = math.inf
    if seq.is_bounded:
        sup = min(sup, 2 * seq.alpha)
    if math.isinf(sup):
        raise ValueError(f"cannot bound the terms of sequence {seq.label!r}")
    return sup


def _sum_bound(seq: BoundedSequence) -> float:
    """sup_t |S(t)|: exact from the prefix table when periodic, else alpha."""
    if not seq.is_bounded:
        return math.inf
    if seq.prefix is not None:
        return float(np.max(np.abs(seq.prefix)))
    return seq.alpha


# ----------------------------------------------------------------------------
# absolutely convergent region


def _direct_axis_bound(p: SPoint, weights, alphas, axis: int, H: int) -> float:
    """Bound on the part of the series with n_axis > H (other indices free).

    Takes the smaller of the absolute majorant and a summation-by-parts
    bound on ``axis``: with g the remaining summand as a smooth function of
    n_axis, |sum_{n > H} a(n) g(n)| <= 2 alpha int_H^oo |g'|.
    """
    sig = list(p.sigma)
    r = p.r
    lower = [0.0] * r
    lower[axis] = float(H)
    absolute = math.prod(weights) * chain_bound(sig, lower, p.n0)
    if math.isinf(alphas[axis]):
        return absolute
    others = math.prod(w for j, w in enumerate(weights) if j != axis)
    base = [Monomial(1.0, tuple(p.s))]
    best = min(absolute, 2 * alphas[axis] * others * monomials_bound(derivative(base, axis), lower, p.n0))
    if axis != r - 1:
        return best
    # innermost index: the boundary term is explicit
    s_r, sg = p.s[-1], sig[-1]
    lead = alphas[-1] * (1 + abs(s_r) / sg)
    if r == 1:
        return min(best, lead * (p.n0 + H + 1) ** (-sg))
    for rho in np.linspace(0.0, 1.0, 41):
        th = rho * sg
        e = sig[:-2] + [sig[-2] + sg - th]
        b = chain_bound(e, [0.0] * (r - 1), p.n0)
        best = min(best, lead * others * (H + 1) ** (-th) * b)
    return best


def _smallest_horizon(bound_of, target: float, h_max: int) -> tuple[int, float]:
    lo, hi = 0, 1
    b = bound_of(hi)
    while b > target:
        if hi >= h_max:
            return hi, b
        lo, hi = hi, min(2 * hi, h_max)
        b = bound_of(hi)
    while hi - lo > 1 and hi > 1.01 * lo + 1:
        mid = (lo + hi) // 2
        bm = bound_of(mid)
        if bm <= target:
            hi, b = mid, bm
        else:
            lo = mid
    return hi, b


def _nested_cost(H: Sequence[int]) -> int:
    cost, span = 0, 1
    for h in H:
        cost += span * h
        span += h
    return cost


def _nested_sum(seqs, p: SPoint, H: Sequence[int]) -> complex:
    """Box-truncated series, innermost index n_r summed first.

    F_l(c) = sum_{n <= H_l} a_l(n) (c + n)^-s_l F_{l+1}(c + n) depends on the
    outer indices only through c = n0 + n_1 + ... + n_{l-1}.
    """
    r = p.r
    lo_c = [p.n0 + l for l in range(r)]
    hi_c = [p.n0 + sum(H[:l]) for l in range(r)]
    nxt = None
    for l in range(r - 1, -1, -1):
        n = np.arange(1, H[l] + 1)
        a = seqs[l](n).astype(complex)
        C = np.arange(lo_c[l], hi_c[l] + 1)
        out = np.empty(len(C), dtype=complex)
        rows = max(1, _CHUNK // max(H[l], 1))
        for i0 in range(0, len(C), rows):
            c = C[i0 : i0 + rows, None] + n[None, :]
            term = _powers(c.astype(float), p.s[l]) * a[None, :]
            if nxt is not None:
                term = term * nxt[c - lo_c[l + 1]]
            out[i0 : i0 + rows] = term.sum(axis=1)
        nxt = out
    return complex(nxt[0])


def _reversed_sum(seqs, p: SPoint, H: Sequence[int]) -> complex:
    """Same box for r = 2, but with n_1 summed innermost."""
    n1 = np.arange(1, H[0] + 1)
    w1 = seqs[0](n1).astype(complex) * _powers((p.n0 + n1).astype(float), p.s[0])
    n2 = np.arange(1, H[1] + 1)
    a2 = seqs[1](n2).astype(complex)
    total = []
    rows = max(1, _CHUNK // H[0])
    for j0 in range(0, len(n2), rows):
        c = p.n0 + n1[None, :] + n2[j0 : j0 + rows, None]
        inner = (_powers(c.astype(float), p.s[1]) * w1[None, :]).sum(axis=1)
        total.append(complex(np.sum(inner * a2[j0 : j0 + rows])))
    return complex(math.fsum(z.real for z in total), math.fsum(z.imag for z in total))


def evaluate_direct(
    seqs: Sequence[BoundedSequence],
    p: SPoint,
    tol: float,
    max_terms: int = DIRECT_MAX_TERMS,
    order: str = "nested",
) -> SummationReport:
    """Truncated nested summation in the absolutely convergent region.

    Horizons are chosen so the certified tail (term majorants compared with
    integrals, plus summation by parts on the innermost index when its
    partial sums are bounded) is at most ``tol``.  ``order="reversed"``
    sums the same box with n_1 innermost (r = 2 only).
    """
    t0 = time.perf_counter()
    if not tol > 0:
        raise ValueError("tol must be positive")
    if p.r > 3:
        raise ValueError("direct summation supports r <= 3")
    if len(seqs) != p.r:
        raise ValueError(f"need {p.r} sequences, got {len(seqs)}")
    if not in_domain_D0(p):
        raise RegionError(f"s = {p.s} is outside the absolute convergence region")
    if order not in ("nested", "reversed"):
        raise ValueError(f"unknown summation order {order!r}")
    if order == "reversed" and p.r != 2:
        raise ValueError("reversed order is implemented for r = 2")
    weights = [_weight_bound(q) for q in seqs]
    alphas = [_sum_bound(q) for q in seqs]
    h_max = int(max_terms)
    H, bounds = [], []
    for i in range(p.r):
        h, b = _smallest_horizon(lambda h, i=i: _direct_axis_bound(p, weights, alphas, i, h), tol / p.r, h_max)
        H.append(h)
        bounds.append(b)
    over = _nested_cost(H) > max_terms or sum(bounds) > tol
    if over:
        scale = (max_terms / max(_nested_cost(H), 1)) ** (1.0 / p.r)
        H = [max(1, min(h, int(h * scale))) for h in H]
        bounds = [_direct_axis_bound(p, weights, alphas, i, H[i]) for i in range(p.r)]
    total = _reversed_sum(seqs, p, H) if order == "reversed" else _nested_sum(seqs, p, H)
    report = SummationReport(total, tuple(H), "direct", tail_bound=float(sum(bounds)), wall_time=time.perf_counter() - t0)
    if over:
        raise BudgetError(f"tail bound {sum(bounds):.3g} exceeds tol {tol:.3g} within {max_terms} terms", best=report)
    return report


# ----------------------------------------------------------------------------
# conditional region


def _inner_series(seq: BoundedSequence, st: AxisStats, s: complex, c: np.ndarray, T: int) -> np.ndarray:
    """sum_{n >= 1} a(n) (c + n)^-s for every base c, by parts with a corrected tail.

    Up to T-1 the sum is exact; on [T, oo) the partial-sum function is its
    period mean plus a point mass at T.
    """
    n = np.arange(1, T)
    a = seq(n).astype(complex)
    S_last = complex(seq.partial_sums(np.array([T - 1]))[0])
    out = np.empty(len(c), dtype=complex)
    rows = max(1, _CHUNK // max(T, 1))
    for i0 in range(0, len(c), rows):
        cc = c[i0 : i0 + rows].astype(float)
        head = (_powers(cc[:, None] + n[None, :], s) * a[None, :]).sum(axis=1)
        edge = _powers(cc + T, s)
        out[i0 : i0 + rows] = head + (st.mean - S_last) * edge + st.nu * s * edge / (cc + T)
    return out


def _inner_error(st: AxisStats, s: complex, c: np.ndarray, T: int) -> np.ndarray:
    """Bound on the neglected fluctuation integral for every base c."""
    sg = s.real
    k = abs(s * (s + 1) * (s + 2)) / (sg + 2)
    return st.gamma * k * (c + T) ** (-(sg + 2))


def _inner_cutoff(st: AxisStats, s: complex, weight: np.ndarray, c: np.ndarray, target: float) -> int:
    per = st.period
    T = st.offset
    while T < 2:
        T += per
    while float(np.sum(weight * _inner_error(st, s, c, T))) > target:
        T += per * max(1, T // (2 * per))
    return T


class _OuterTerms:
    """Lazily extended outer terms b(n_1) for the r = 2 conditional sum."""

    def __init__(self, seqs, p: SPoint, tol: float):
        self.seqs, self.p, self.tol = seqs, p, tol
        self.st = axis_stats(seqs[1])
        if not self.st.periodic:
            raise ValueError("the conditional oracle needs a periodic inner sequence")
        self.terms = np.zeros(0, dtype=complex)
        self.err = 0.0
        self.cutoffs: list[int] = []

    def extend(self, n_max: int) -> None:
        """Append b(n_1) for n_1 up to n_max.

        The inner series F obeys F(c) = F(c + q) + sum_{m <= q} a(m) (c + m)^-s
        exactly, so only the last q bases (the largest, where a short cutoff
        suffices) are evaluated with the corrected tail; the rest follow by
        the recursion within each residue class.
        """
        start = len(self.terms) + 1
        if n_max < start:
            return
        p, st = self.p, self.st
        s2 = p.s[1]
        n1 = np.arange(start, n_max + 1)
        c = (p.n0 + n1).astype(float)
        w = np.abs(_powers(c, p.s[0])) * np.abs(self.seqs[0](n1))
        L, q = len(c), st.period
        k = min(q, L)
        anchors = np.arange(L - k, L)
        # each anchor's error is inherited by its whole residue class
        class_w = np.array([w[a::-q].sum() for a in anchors])
        T = _inner_cutoff(st, s2, class_w, c[anchors], self.tol * 1e-2 * L / n_max)
        F = np.empty(L, dtype=complex)
        F[anchors] = _inner_series(self.seqs[1], st, s2, c[anchors], T)
        if L > q:
            m = np.arange(1, q + 1)
            a = self.seqs[1](m).astype(complex)
            G = np.empty(L - q, dtype=complex)
            rows = max(1, _CHUNK // q)
            for i0 in range(0, L - q, rows):
                cc = c[i0 : min(i0 + rows, L - q), None] + m[None, :]
                G[i0 : i0 + rows] = (_powers(cc, s2) * a[None, :]).sum(axis=1)
            for top in anchors:
                idx = np.arange(top - q, -1, -q)
                F[idx] = F[top] + np.cumsum(G[idx])
        b = self.seqs[0](n1).astype(complex) * _powers(c, p.s[0]) * F
        self.err += float(np.sum(class_w * _inner_error(st, s2, c[anchors], T)))
        self.cutoffs.append(T)
        self.terms = np.concatenate([self.terms, b])


def _window_average(terms: np.ndarray, X: int, period: int) -> complex:
    """Mean of the partial sums A(x), x = X .. X + period - 1."""
    base = math.fsum(terms[:X].real) + 1j * math.fsum(terms[:X].imag)
    steps = np.concatenate([[0j], np.cumsum(terms[X : X + period - 1])])
    return complex(base + np.mean(steps))


def evaluate_iterated_abel(
    seqs: Sequence[BoundedSequence],
    p: SPoint,
    tol: float,
    max_horizon: int = ABEL_MAX_HORIZON,
) -> SummationReport:
    """Conditionally convergent series for r <= 2 by period-window averaging.

    The outer partial sums are averaged over one period starting at
    X = period * 2^j; the value at the first X whose average differs from
    the one at X/2 by less than ``tol`` is returned, with that difference
    as the spread.  For r = 2 the reported ``inner_bound`` certifies the
    inner series evaluation.
    """
    t0 = time.perf_counter()
    if not tol > 0:
        raise ValueError("tol must be positive")
    if p.r > 2:
        raise ValueError("the conditional oracle supports r <= 2")
    if len(seqs) != p.r:
        raise ValueError(f"need {p.r} sequences, got {len(seqs)}")
    if not in_domain_D(p):
        raise RegionError(f"s = {p.s} is outside the convergence region")
    for q in seqs:
        partial_sum_bound(q)
    per = seqs[0].period or 1

    if p.r == 1:
        terms = np.zeros(0, dtype=complex)

        def grow(n_max: int) -> np.ndarray:
            nonlocal terms
            start = len(terms) + 1
            if n_max >= start:
                n = np.arange(start, n_max + 1)
                b = seqs[0](n).astype(complex) * _powers((p.n0 + n).astype(float), p.s[0])
                terms = np.concatenate([terms, b])
            return terms

        inner_err = lambda: 0.0  # noqa: E731
        cutoffs = None
    else:
        outer = _OuterTerms(seqs, p, tol)

        def grow(n_max: int) -> np.ndarray:
            outer.extend(n_max)
            return outer.terms

        inner_err = lambda: outer.err  # noqa: E731
        cutoffs = outer.cutoffs

    X = per * 16
    prev = _window_average(grow(X + per), X, per)
    while True:
        X *= 2
        cur = _window_average(grow(X + per), X, per)
        spread = abs(cur - prev)
        if spread < tol or X * 2 > max_horizon:
            break
        prev = cur
    extra = {"inner_cutoffs": list(cutoffs)} if cutoffs is not None else {}
    report = SummationReport(
        cur, (X,), "iterated-abel", spread=spread, inner_bound=inner_err(),
        wall_time=time.perf_counter() - t0, extra=extra,
    )
    if spread >= tol:
        raise BudgetError(f"spread {spread:.3g} still above tol {tol:.3g} at horizon {X}", best=report)
    return report


def partial_sum_trajectory(seqs: Sequence[BoundedSequence], p: SPoint, X: int, tol: float = 1e-12) -> list[complex]:
    """Outer partial sums at x = 1..X; for r = 2 the inner series is summed in full."""
    if p.r > 2:
        raise ValueError("trajectories are available for r <= 2")
    if len(seqs) != p.r:
        raise ValueError(f"need {p.r} sequences, got {len(seqs)}")
    if int(X) != X or X < 1:
        raise ValueError("X must be a positive integer")
    n = np.arange(1, int(X) + 1)
    b = seqs[0](n).astype(complex) * _powers((p.n0 + n).astype(float), p.s[0])
    if p.r == 2:
        if not in_domain_D(p):
            raise RegionError(f"s = {p.s} is outside the convergence region")
        partial_sum_bound(seqs[1])
        outer = _OuterTerms(seqs, p, tol)
        outer.extend(int(X))
        b = outer.terms
    return [complex(z) for z in np.cumsum(b)]
