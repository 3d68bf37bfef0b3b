"""Dirichlet characters mod q and bounded-partial-sum coefficient sequences.

Characters are addressed by ``(q, exponents)`` relative to a fixed set of
generators of the unit group (Z/qZ)^*:

* odd prime power p^k: the smallest primitive root mod p^k;
* 4: the class of -1 (i.e. 3), order 2;
* 2^k with k >= 3: -1 (order 2) and 5 (order 2^(k-2));

each lifted to mod q by CRT so that it is 1 mod the other prime-power
factors.  The character with exponent vector ``e`` sends generator ``g_j``
to ``exp(2*pi*i*e_j/d_j)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import RegionError

__all__ = [
    "UnitGroup",
    "DirichletCharacter",
    "BoundedSequence",
    "unit_group",
    "make_character",
    "enumerate_characters",
    "partial_sum",
    "partial_sum_bound",
    "character_sequence",
    "alternating_sequence",
    "periodic_sequence",
    "load_periodic_sequence",
    "custom_sequence",
    "root_of_unity",
    "euler_phi",
]


def factorize(n: int) -> list[tuple[int, int]]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            out.append((p, k))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def euler_phi(n: int) -> int:
    result = n
    for p, _ in factorize(n):
        result -= result // p
    return result


def _multiplicative_order(g: int, m: int) -> int:
    k, x = 1, g % m
    while x != 1:
        x = x * g % m
        k += 1
    return k


def _smallest_primitive_root(pk: int) -> int:
    phi = euler_phi(pk)
    for g in range(2, pk):
        if math.gcd(g, pk) == 1 and _multiplicative_order(g, pk) == phi:
            return g
    raise ArithmeticError(f"no primitive root mod {pk}")  # unreachable for odd p^k


def _crt_lift(residue: int, modulus: int, q: int) -> int:
    """x with x = residue (mod modulus) and x = 1 (mod q // modulus)."""
    other = q // modulus
    if other == 1:
        return residue % q
    # x = residue + modulus * y,  modulus * y = 1 - residue (mod other)
    y = (1 - residue) * pow(modulus, -1, other) % other
    return (residue + modulus * y) % q


def root_of_unity(frac: Fraction) -> complex:
    """exp(2*pi*i*frac), exact for eighth roots of unity."""
    frac = frac % 1
    exact = {
        Fraction(0): 1 + 0j,
        Fraction(1, 2): -1 + 0j,
        Fraction(1, 4): 1j,
        Fraction(3, 4): -1j,
    }
    if frac in exact:
        return exact[frac]
    h = math.sqrt(0.5)
    if frac.denominator == 8:
        return complex(*{1: (h, h), 3: (-h, h), 5: (-h, -h), 7: (h, -h)}[frac.numerator])
    angle = 2.0 * math.pi * float(frac)
    return complex(math.cos(angle), math.sin(angle))


@dataclass(frozen=True)
class UnitGroup:
    """(Z/qZ)^* as a product of cyclic groups with a discrete-log table."""

    modulus: int
    generators: tuple[int, ...]
    orders: tuple[int, ...]
    dlog: dict[int, tuple[int, ...]] = field(repr=False, compare=False)

    @property
    def order(self) -> int:
        return math.prod(self.orders)


@lru_cache(maxsize=256)
def unit_group(q: int) -> UnitGroup:
    if q < 1:
        raise ValueError(f"modulus must be >= 1, got {q}")
    gens: list[int] = []
    orders: list[int] = []
    for p, k in factorize(q):
        pk = p**k
        if p == 2:
            if k == 2:
                gens.append(_crt_lift(3, 4, q))
                orders.append(2)
            elif k >= 3:
                gens.append(_crt_lift(pk - 1, pk, q))
                orders.append(2)
                gens.append(_crt_lift(5, pk, q))
                orders.append(2 ** (k - 2))
        else:
            gens.append(_crt_lift(_smallest_primitive_root(pk), pk, q))
            orders.append(pk - pk // p)

    dlog: dict[int, tuple[int, ...]] = {}
    for exps in product(*(range(d) for d in orders)):
        x = 1
        for g, e in zip(gens, exps):
            x = x * pow(g, e, q) % q
        x %= q
        if x in dlog:
            raise ArithmeticError(f"generators for q={q} are not independent")
        dlog[x] = tuple(exps)
    return UnitGroup(q, tuple(gens), tuple(orders), dlog)


@dataclass(frozen=True)
class DirichletCharacter:
    """A Dirichlet character mod q.

    ``table[n]`` holds chi(n) for 0 <= n < q as a Fraction a/b meaning
    exp(2*pi*i*a/b), or None where gcd(n, q) > 1.  ``prefix[m]`` is
    sum_{1 <= n <= m} chi(n) for 0 <= m <= q.
    """

    modulus: int
    exponents: tuple[int, ...]
    table: tuple[Fraction | None, ...] = field(repr=False)
    values: np.ndarray = field(repr=False, compare=False)
    prefix: np.ndarray = field(repr=False, compare=False)

    @property
    def is_principal(self) -> bool:
        return all(e == 0 for e in self.exponents)

    def __call__(self, n: int) -> complex:
        return complex(self.values[n % self.modulus])

    def conj(self) -> DirichletCharacter:
        orders = unit_group(self.modulus).orders
        return make_character(self.modulus, [(-e) % d for e, d in zip(self.exponents, orders)])

    @property
    def label(self) -> str:
        return f"char:{self.modulus}:{','.join(map(str, self.exponents)) or '-'}"


def make_character(q: int, exponents: Sequence[int] = ()) -> DirichletCharacter:
    G = unit_group(q)
    exponents = tuple(int(e) for e in exponents)
    if len(exponents) != len(G.orders):
        raise ValueError(
            f"character mod {q} needs {len(G.orders)} exponents (orders {G.orders}), got {len(exponents)}"
        )
    for e, d in zip(exponents, G.orders):
        if not 0 <= e < d:
            raise ValueError(f"exponent {e} out of range [0, {d}) for modulus {q}")

    table: list[Fraction | None] = []
    for n in range(q):
        logs = G.dlog.get(n)
        if logs is None:
            table.append(None)
        else:
            table.append(sum((Fraction(e * l, d) for e, l, d in zip(exponents, logs, G.orders)), Fraction(0)) % 1)
    values = np.array([0j if f is None else root_of_unity(f) for f in table], dtype=complex)
    # chi(q) sits at index 0; prefix runs over n = 1..q
    ordered = np.concatenate([values[1:], values[:1]])
    prefix = np.concatenate([[0j], np.cumsum(ordered)])
    if any(exponents):
        prefix[q] = 0j  # full-period sum of a non-principal character, exactly
    return DirichletCharacter(q, exponents, tuple(table), values, prefix)


def enumerate_characters(q: int) -> list[DirichletCharacter]:
    G = unit_group(q)
    return [make_character(q, e) for e in product(*(range(d) for d in G.orders))]


@dataclass(frozen=True)
class BoundedSequence:
    """Arithmetic function a(n), n >= 1, with bounded partial sums.

    ``alpha`` is a bound on |sum_{m <= t} a(m)| for all t >= 1.  When
    ``period`` is set, a(n + period) = a(n) and the values over one period
    sum to zero; ``prefix[m]`` (0 <= m <= period) then gives every partial
    sum in O(1).
    """

    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    alpha: float
    label: str
    kind: str
    period: int | None = None
    prefix: np.ndarray | None = field(default=None, repr=False, compare=False)
    character: DirichletCharacter | None = field(default=None, repr=False)

    def __call__(self, n):
        return self.func(np.asarray(n, dtype=np.int64))

    @property
    def is_bounded(self) -> bool:
        return not (self.character is not None and self.character.is_principal)

    def partial_sums(self, m: np.ndarray) -> np.ndarray:
        """sum_{n <= m} a(n) for an integer array m >= 0."""
        m = np.asarray(m, dtype=np.int64)
        if self.period is not None:
            return self.prefix[m % self.period]
        top = int(m.max(initial=0))
        cums = np.concatenate([[0j], np.cumsum(self(np.arange(1, top + 1)))])
        return cums[m]

    def mean_partial_sum(self) -> complex:
        """Average of S(t) over one period."""
        if self.period is None:
            raise ValueError(f"{self.label}: no declared period")
        return complex(np.mean(self.prefix[: self.period]))

    def conj(self) -> BoundedSequence:
        if self.character is not None:
            return character_sequence(self.character.conj())
        prefix = None if self.prefix is None else np.conj(self.prefix)
        f = self.func
        return BoundedSequence(
            lambda n: np.conj(f(n)), self.alpha, f"conj({self.label})", self.kind, self.period, prefix
        )


def character_sequence(chi: DirichletCharacter) -> BoundedSequence:
    q = chi.modulus
    vals = chi.values

    def func(n):
        return vals[np.asarray(n) % q]

    if chi.is_principal:
        # constructible for the absolutely convergent region only
        return BoundedSequence(func, math.inf, chi.label, "character", None, None, chi)
    return BoundedSequence(func, float(q), chi.label, "character", q, chi.prefix[:q].copy(), chi)


def alternating_sequence() -> BoundedSequence:
    def func(n):
        return np.where(np.asarray(n) % 2 == 1, 1.0 + 0j, -1.0 + 0j)

    return BoundedSequence(func, 1.0, "alt", "alternating", 2, np.array([0j, 1 + 0j]))


def periodic_sequence(values: Sequence[complex], label: str = "periodic", atol: float = 1e-12) -> BoundedSequence:
    """Sequence with a(n) = values[(n - 1) % p]; the values must sum to zero."""
    vals = np.asarray(values, dtype=complex)
    p = len(vals)
    if p == 0:
        raise ValueError("periodic sequence needs at least one value")
    total = vals.sum()
    if abs(total) > atol * max(1.0, float(np.abs(vals).sum())):
        raise ValueError(f"period sum is {total}, expected 0")
    prefix = np.concatenate([[0j], np.cumsum(vals)[:-1]])
    alpha = float(np.abs(prefix).max())

    def func(n):
        return vals[(np.asarray(n) - 1) % p]

    return BoundedSequence(func, alpha, label, "periodic-table", p, prefix)


def load_periodic_sequence(path: str | Path) -> BoundedSequence:
    """Load ``{"period": p, "values": [[re, im], ...]}`` from a JSON file."""
    data = json.loads(Path(path).read_text())
    period = int(data["period"])
    values = [complex(float(re), float(im)) for re, im in data["values"]]
    if len(values) != period:
        raise ValueError(f"{path}: period {period} but {len(values)} values")
    return periodic_sequence(values, label=f"file:{path}")


def custom_sequence(func: Callable[[np.ndarray], np.ndarray], alpha: float, label: str = "custom") -> BoundedSequence:
    """User-supplied a(n) with a user-certified partial-sum bound ``alpha``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return BoundedSequence(func, float(alpha), label, "custom")


def partial_sum(seq: BoundedSequence | DirichletCharacter, t: float) -> complex:
    """sum_{n <= t} a(n); integer t includes n = t."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if isinstance(seq, DirichletCharacter):
        q = seq.modulus
        m = math.floor(t)
        return complex(seq.prefix[m % q] + (m // q) * seq.prefix[q])
    return complex(seq.partial_sums(np.array([math.floor(t)]))[0])


def partial_sum_bound(seq: BoundedSequence | DirichletCharacter) -> float:
    """The partial-sum bound alpha; q for a non-principal character mod q."""
    chi = seq if isinstance(seq, DirichletCharacter) else seq.character
    if chi is not None:
        if chi.is_principal:
            raise RegionError(
                f"{chi.label} is principal: unbounded partial sums, integral representation inapplicable"
            )
        return float(chi.modulus)
    return seq.alpha
