"""Pochhammer symbols, region predicates and the multiple-integral kernel.

The kernel at t = (t_1, ..., t_r), t_i >= 1, is

    K(t) = sum_k coeff(k) prod_i (s_i)_{k_i} / (n0 + t_1 + ... + t_i)^(s_i + k_i)

summed over the constrained compositions k of rank r.  Every base is a real
number >= 1, so complex powers are taken as exp(-w * log(base)) with the
real logarithm.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .compositions import CompositionTerm, enumerate_compositions, lower_family

__all__ = [
    "SPoint",
    "KernelValue",
    "KernelTable",
    "pochhammer",
    "in_domain_D",
    "in_domain_D0",
    "kernel_eval",
    "kernel_table",
    "lemma1_lhs",
    "lemma1_rhs",
    "lemma1_product",
    "lemma1_product_dt1",
]


@dataclass(frozen=True)
class SPoint:
    s: tuple[complex, ...]
    n0: int = 0

    def __init__(self, s: Sequence[complex], n0: int = 0):
        s = tuple(complex(x) for x in s)
        if not s:
            raise ValueError("need at least one s_i")
        if int(n0) != n0 or n0 < 0:
            raise ValueError(f"n0 must be a non-negative integer, got {n0}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "n0", int(n0))

    @property
    def r(self) -> int:
        return len(self.s)

    @property
    def sigma(self) -> tuple[float, ...]:
        return tuple(x.real for x in self.s)

    def suffix_sums(self) -> list[float]:
        """sigma_r + ... + sigma_{r-i} for i = 0..r-1."""
        out, acc = [], 0.0
        for x in reversed(self.sigma):
            acc += x
            out.append(acc)
        return out

    def conj(self) -> SPoint:
        return SPoint([x.conjugate() for x in self.s], self.n0)


def pochhammer(s: complex, k: int) -> complex:
    """Rising factorial s (s+1) ... (s+k-1); (s)_0 = 1."""
    if k < 0:
        raise ValueError("k must be non-negative")
    out = 1
    for j in range(k):
        out *= s + j
    return out


def in_domain_D(p: SPoint) -> bool:
    return all(x > 0 for x in p.suffix_sums())


def in_domain_D0(p: SPoint) -> bool:
    return all(x > i + 1 for i, x in enumerate(p.suffix_sums()))


@dataclass(frozen=True)
class KernelValue:
    value: complex
    terms: tuple[tuple[tuple[int, ...], int, complex], ...] | None = None


def _check_t(t) -> tuple[float, ...]:
    t = tuple(float(x) for x in t)
    if any(x < 1 for x in t):
        raise ValueError(f"kernel needs every t_i >= 1, got {t}")
    return t


def _cpow(base: float, w: complex) -> complex:
    return cmath.exp(-w * np.log(base))


def kernel_eval(t, p: SPoint, comps: Sequence[CompositionTerm] | None = None, explain: bool = False) -> KernelValue:
    """Kernel value at a single point t, optionally with its per-term breakdown."""
    t = _check_t(t)
    if len(t) != p.r:
        raise ValueError(f"t has length {len(t)}, expected {p.r}")
    if comps is None:
        comps = enumerate_compositions(p.r)
    tau = p.n0 + np.cumsum(t)
    total = 0j
    terms = []
    for term in comps:
        v = complex(term.coeff)
        for si, ki, b in zip(p.s, term.k, tau):
            v *= pochhammer(si, ki) * _cpow(float(b), si + ki)
        total += v
        if explain:
            terms.append((term.k, term.coeff, v))
    return KernelValue(total, tuple(terms) if explain else None)


@dataclass(frozen=True)
class KernelTable:
    """Kernel in factored form: prod_i tau_i^{-s_i} * sum_m c_m prod_i tau_i^{-powers[m, i]}.

    ``powers`` are integers; a table with the last power lowered by one and
    the coefficient divided by (s_r + k_r - 1) represents the kernel with its
    last axis integrated from t_r to infinity.
    """

    s: np.ndarray
    coeffs: np.ndarray
    powers: np.ndarray = field(repr=False)

    def __call__(self, tau: Sequence[np.ndarray]) -> np.ndarray:
        """Evaluate at prefix sums ``tau[i] = n0 + t_1 + ... + t_{i+1}`` (broadcastable arrays)."""
        logs = [np.log(x) for x in tau]
        expo = -self.s[0] * logs[0]
        for i in range(1, len(logs)):
            expo = expo - self.s[i] * logs[i]
        base = np.exp(expo)
        maxp = int(self.powers.max(initial=0))
        inv = [[None] * (maxp + 1) for _ in tau]
        for i, x in enumerate(tau):
            inv[i][0] = 1.0
            if maxp >= 1:
                inv[i][1] = 1.0 / x
            for j in range(2, maxp + 1):
                inv[i][j] = inv[i][j - 1] * inv[i][1]
        poly = 0j
        for c, row in zip(self.coeffs, self.powers):
            term = c
            for i, j in enumerate(row):
                if j:
                    term = term * inv[i][j]
            poly = poly + term
        return base * poly

    def tail_last_axis(self) -> KernelTable:
        """Table for int_{t_r}^infty K dt_r, evaluated with tau_r at the lower limit."""
        r = len(self.s)
        powers = self.powers.copy()
        powers[:, r - 1] -= 1
        denom = self.s[r - 1] + self.powers[:, r - 1] - 1
        return KernelTable(self.s, self.coeffs / denom, powers)


def kernel_table(p: SPoint, comps: Sequence[CompositionTerm] | None = None) -> KernelTable:
    if comps is None:
        comps = enumerate_compositions(p.r)
    coeffs = np.array(
        [term.coeff * np.prod([pochhammer(si, ki) for si, ki in zip(p.s, term.k)]) for term in comps],
        dtype=complex,
    )
    powers = np.array([term.k for term in comps], dtype=np.int64)
    return KernelTable(np.array(p.s, dtype=complex), coeffs, powers)


def _P(s: complex, k: int, base: float) -> complex:
    return pochhammer(s, k) * _cpow(base, s + k)


def lemma1_product(t, p: SPoint, k_tail: Sequence[int]) -> complex:
    """(n0+t_1)^{-s_1} prod_{i>=2} (s_i)_{k_i} / tau_i^{s_i+k_i} for k_tail = (k_2, ..., k_r)."""
    tau = p.n0 + np.cumsum(t)
    out = _cpow(float(tau[0]), p.s[0])
    for si, ki, b in zip(p.s[1:], k_tail, tau[1:]):
        out *= _P(si, ki, float(b))
    return out


def lemma1_product_dt1(t, p: SPoint, k_tail: Sequence[int]) -> complex:
    """Closed-form d/dt_1 of :func:`lemma1_product`.

    Uses d/dt_1 P_h(k_h) = -P_h(k_h + 1), where P_h(k) = (s_h)_k / tau_h^{s_h+k}.
    """
    tau = [float(x) for x in p.n0 + np.cumsum(t)]
    s1 = p.s[0]
    rest = [_P(si, ki, b) for si, ki, b in zip(p.s[1:], k_tail, tau[1:])]
    head = -s1 * _cpow(tau[0], s1 + 1)
    for v in rest:
        head *= v
    spread = 0j
    for h, (sh, kh, bh) in enumerate(zip(p.s[1:], k_tail, tau[1:])):
        v = _P(sh, kh + 1, bh)
        for i, w in enumerate(rest):
            if i != h:
                v *= w
        spread += v
    return head - _cpow(tau[0], s1) * spread


def lemma1_lhs(t, p: SPoint) -> complex:
    """-sum over the rank-(r-1) family of coeff * d/dt_1 [ (n0+t_1)^{-s_1} prod P_i(k_i) ]."""
    if p.r < 3:
        raise ValueError("the derivative identity is stated for r >= 3")
    t = _check_t(t)
    total = 0j
    for term in lower_family(p.r):
        total -= term.coeff * lemma1_product_dt1(t, p, term.k)
    return total


def lemma1_rhs(t, p: SPoint) -> complex:
    return kernel_eval(t, p).value
