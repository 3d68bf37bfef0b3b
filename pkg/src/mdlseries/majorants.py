"""Closed-form upper bounds for integrals (or sums) of power-product majorants.

A monomial is ``coef * prod_l (n0 + tau_l)^(-a_l)`` with tau_l = t_1 + ... + t_l
and complex exponents a_l; its modulus is governed by Re(a_l).  Bounds are
obtained by integrating the innermost axis first,

    int_L^inf (c + t)^(-x) dt = (c + L)^(1 - x) / (x - 1),

and, when the lower limit L of an inner axis exceeds 1, trading part of the
exponent for decay in L via (c + L)^(-y) <= c^(-(y - theta)) L^(-theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

_THETA_FINE = [j / 40 for j in range(1, 40)] + [0.985, 0.995]
_THETA_COARSE = [0.3, 0.5, 0.7, 0.85, 0.95]


@dataclass(frozen=True)
class Monomial:
    coef: float
    a: tuple[complex, ...]


def derivative(monos: Iterable[Monomial], axis: int) -> list[Monomial]:
    """Majorant of |d/dt_axis| (0-based axis): factors h >= axis depend on t_axis."""
    acc: dict[tuple[complex, ...], float] = {}
    for m in monos:
        for h in range(axis, len(m.a)):
            c = m.coef * abs(m.a[h])
            if c == 0.0:
                continue
            a = list(m.a)
            a[h] += 1
            key = tuple(a)
            acc[key] = acc.get(key, 0.0) + c
    return [Monomial(c, a) for a, c in acc.items()]


def scaled(monos: Iterable[Monomial], factor: float) -> list[Monomial]:
    return [Monomial(m.coef * factor, m.a) for m in monos if m.coef * factor != 0.0]


def _chain(e: Sequence[float], lower: Sequence[float], n0: float, thetas: dict[int, float]) -> float:
    log_b = 0.0
    y = 0.0
    for l in range(len(e) - 1, -1, -1):
        x = e[l] + y
        if x <= 1.0:
            return math.inf
        log_b -= math.log(x - 1.0)
        if l == 0:
            base = n0 + lower[0]
            if base <= 0.0:
                # discrete sum over n >= 1 of n^-x is at most x / (x - 1)
                return math.exp(log_b) * x
            return math.exp(log_b - (x - 1.0) * math.log(base))
        th = thetas.get(l, 0.0)
        if th:
            if th > x - 1.0:
                return math.inf
            log_b -= th * math.log(lower[l])
        y = x - 1.0 - th
    return math.exp(log_b)  # pragma: no cover


def _theta_cap(e: Sequence[float], l: int) -> float:
    """Largest admissible theta at axis l when no other axis is split."""
    y = 0.0
    for j in range(len(e) - 1, l - 1, -1):
        x = e[j] + y
        if x <= 1.0:
            return 0.0
        y = x - 1.0
    cap = y
    for j in range(l - 1, -1, -1):
        x = e[j] + y
        cap = min(cap, x - 1.0)
        y = x - 1.0
    return max(cap, 0.0)


def chain_bound(e: Sequence[float], lower: Sequence[float], n0: float = 0.0) -> float:
    """Bound for int over t_l >= lower[l] of prod_l (n0 + tau_l)^(-e[l]).

    ``lower[l]`` is the continuous lower limit of axis l.  A sum over
    integers n_l >= N is covered by lower = N - 1 (the summand decreases);
    ``n0 + lower[0] == 0`` marks the full sum over n_1 >= 1 with n0 = 0.
    Returns inf when the majorant is not integrable.
    """
    splits = [l for l in range(1, len(e)) if lower[l] > 1.0]
    best = _chain(e, lower, n0, {})
    if not splits:
        return best
    caps = {l: _theta_cap(e, l) for l in splits}
    grid = _THETA_FINE if len(splits) == 1 else _THETA_COARSE
    for rhos in product(grid, repeat=len(splits)):
        thetas = {l: rho * caps[l] for l, rho in zip(splits, rhos)}
        best = min(best, _chain(e, lower, n0, thetas))
    return best


def monomials_bound(monos: Iterable[Monomial], lower: Sequence[float], n0: float = 0.0) -> float:
    total = 0.0
    for m in monos:
        total += m.coef * chain_bound([z.real for z in m.a], lower, n0)
        if math.isinf(total):
            return math.inf
    return total
