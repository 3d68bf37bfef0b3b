"""Constrained compositions indexing the terms of the multiple-integral kernel.

A term is a vector k = (k_1, ..., k_r) of non-negative integers with

    k_1 + ... + k_r = r,   k_1 + ... + k_i <= i,   0 <= k_i <= i,

weighted by the integer C(1, k_1) * prod_{i>=2} C(i - k_1 - ... - k_{i-1}, k_i).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

MAX_RANK = 12


@dataclass(frozen=True)
class CompositionTerm:
    k: tuple[int, ...]
    coeff: int

    @property
    def r(self) -> int:
        return len(self.k)

    def to_json(self) -> dict:
        return {"k": list(self.k), "coeff": self.coeff}


def satisfies_constraints(k) -> bool:
    r = len(k)
    if r == 0 or sum(k) != r:
        return False
    run = 0
    for i, ki in enumerate(k, start=1):
        if not 0 <= ki <= i:
            return False
        run += ki
        if run > i:
            return False
    return True


def binom(n: int, j: int) -> int:
    """C(n, j), zero when j < 0 or j > n."""
    if j < 0 or n < 0 or j > n:
        return 0
    return comb(n, j)


def coefficient(k) -> int:
    k = tuple(int(x) for x in k)
    if not satisfies_constraints(k):
        raise ValueError(f"{k} violates the composition constraints")
    c = binom(1, k[0])
    used = k[0]
    for i in range(2, len(k) + 1):
        c *= binom(i - used, k[i - 1])
        used += k[i - 1]
    return c


@lru_cache(maxsize=None)
def _enumerate(r: int) -> tuple[CompositionTerm, ...]:
    out: list[tuple[int, ...]] = []

    def extend(prefix: list[int], used: int) -> None:
        i = len(prefix) + 1
        if i > r:
            if used == r:
                out.append(tuple(prefix))
            return
        # remaining slots i..r can absorb at most r - used more; prefix cap is i
        for ki in range(min(i, i - used, r - used), -1, -1):
            prefix.append(ki)
            extend(prefix, used + ki)
            prefix.pop()

    extend([], 0)
    return tuple(CompositionTerm(k, coefficient(k)) for k in out)


def enumerate_compositions(r: int) -> list[CompositionTerm]:
    """All constrained compositions of rank r, in descending lexicographic order."""
    if not 1 <= r <= MAX_RANK:
        raise ValueError(f"rank must be in [1, {MAX_RANK}], got {r}")
    return list(_enumerate(r))


def lower_family(r: int) -> list[CompositionTerm]:
    """The rank-(r-1) family re-indexed as (k_2, ..., k_r).

    Its constraints read k_2 + ... + k_i <= i - 1 and 0 <= k_i <= i - 1,
    which is the rank-(r-1) family shifted by one index.
    """
    return enumerate_compositions(r - 1)
