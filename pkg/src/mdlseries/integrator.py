"""Cell-decomposition quadrature for the multiple-integral representation.

The integrand prod_i S_i(t_i) * K(t) is piecewise smooth: each partial sum
S_i jumps only at integers, so [1, T_1) x ... x [1, T_r) is split into unit
cells and every cell is integrated by tensor Gauss-Legendre.

Beyond the box the integral is not simply dropped.  For a sequence with a
zero-sum period, S_i on [T_i, oo) is replaced by its period mean mu_i plus a
point mass nu_i at T_i (the mean of the integrated fluctuation).  What is
left is int R2_i(t) d^2K/dt_i^2 dt with a bounded periodic R2_i, and that
remainder is bounded in closed form (see ``majorants``).  The last axis of
the mean part is integrated analytically; earlier axes use geometric panels.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from .characters import BoundedSequence, partial_sum_bound
from .compositions import enumerate_compositions
from .errors import BudgetError, RegionError
from .kernel import KernelTable, SPoint, in_domain_D, in_domain_D0, kernel_table, pochhammer
from .majorants import Monomial, derivative, monomials_bound, scaled

__all__ = [
    "TruncationPlan",
    "EvaluationResult",
    "UnsupportedRankError",
    "tail_bound",
    "integrate_cells",
    "evaluate_integral",
    "default_max_cells",
]

MAX_RANK = 3
DEFAULT_MAX_CELLS = 10**7
PANEL_RATIO = 4.0
MAX_PANELS = 80
CHUNK_POINTS = 1 << 19


class UnsupportedRankError(ValueError):
    pass


def default_max_cells() -> int:
    env = os.environ.get("MDL_MAX_CELLS")
    return int(float(env)) if env else DEFAULT_MAX_CELLS


@dataclass(frozen=True)
class TruncationPlan:
    cutoffs: tuple[int, ...]
    nodes: int = 8
    tail_bound: float = math.nan
    quad_error: float = math.nan
    panel_remainder: float = 0.0
    panel_ends: tuple[float, ...] = ()

    @property
    def cells(self) -> int:
        return math.prod(T - 1 for T in self.cutoffs)

    def to_json(self) -> dict:
        return {
            "cutoffs": list(self.cutoffs),
            "nodes": self.nodes,
            "tail_bound": self.tail_bound,
            "quad_error": self.quad_error,
            "panel_remainder": self.panel_remainder,
            "panel_ends": list(self.panel_ends),
            "cells": self.cells,
        }


@dataclass(frozen=True)
class EvaluationResult:
    value: complex
    error_estimate: float
    method: str
    plan: TruncationPlan | dict
    in_D: bool
    in_D0: bool
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        plan = self.plan.to_json() if hasattr(self.plan, "to_json") else dict(self.plan)
        return {
            "value": {"re": self.value.real, "im": self.value.imag},
            "error_estimate": self.error_estimate,
            "method": self.method,
            "plan": plan,
            "in_D": self.in_D,
            "in_D0": self.in_D0,
            "wall_time": self.wall_time,
        }


# ----------------------------------------------------------------------------
# slab bound over t_1 >= T


def tail_bound(p: SPoint, alphas: Sequence[float], T: float) -> float:
    """Bound on the integral over the slab t_1 >= T (where every prefix exceeds T).

    (prod alpha_i) * sum_k coeff(k) prod_i |(s_i)_{k_i}| / (sigma_r + ... + sigma_i)
    * (n0 + T)^-(sigma_1 + ... + sigma_r).
    """
    if not in_domain_D(p):
        raise RegionError(f"s = {p.s} is outside the convergence region")
    if T < 1:
        raise ValueError("T must be >= 1")
    suffix = p.suffix_sums()[::-1]  # suffix[i] = sigma_{i+1} + ... + sigma_r
    denom = math.prod(suffix)
    total = 0.0
    for term in enumerate_compositions(p.r):
        total += term.coeff * math.prod(abs(pochhammer(si, ki)) for si, ki in zip(p.s, term.k))
    return math.prod(alphas) * total / denom * (p.n0 + T) ** (-sum(p.sigma))


# ----------------------------------------------------------------------------
# per-axis statistics of a periodic partial-sum function


@dataclass(frozen=True)
class AxisStats:
    sup: float  # sup |S|
    periodic: bool
    mean: complex = 0j  # mu
    nu: complex = 0j  # mean of the integrated fluctuation
    gamma: float = math.inf  # sup |R2|
    offset: int = 1  # cutoffs are = offset (mod period)
    period: int = 1


def _second_order_stats(prefix: np.ndarray, start: int) -> tuple[complex, complex, float]:
    p = len(prefix)
    mu = complex(np.mean(prefix))
    P = prefix[(start + np.arange(p)) % p] - mu
    Q = np.concatenate([[0j], np.cumsum(P)])
    nu = complex(np.sum(Q[:-1] + Q[1:]) / (2 * p))
    R = Q - nu
    R2 = np.concatenate([[0j], np.cumsum((R[:-1] + R[1:]) / 2)])
    u = np.linspace(0.0, 1.0, 33)
    inner = R2[:-1, None] + R[:-1, None] * u + (R[1:, None] - R[:-1, None]) * (u**2 / 2)
    slope = np.maximum(np.abs(R[:-1]), np.abs(R[1:]))
    gamma = float(np.max(np.abs(inner)) + np.max(slope) / 64)
    return mu, nu, gamma


def axis_stats(seq: BoundedSequence) -> AxisStats:
    if not seq.is_bounded:
        partial_sum_bound(seq)  # raises RegionError
    if seq.period is None:
        return AxisStats(sup=seq.alpha, periodic=False)
    prefix = np.asarray(seq.prefix, dtype=complex)
    sup = float(np.max(np.abs(prefix)))
    p = len(prefix)
    offsets = range(p) if p <= 2000 else [1 % p]
    best = None
    for off in offsets:
        mu, nu, gamma = _second_order_stats(prefix, off)
        if best is None or gamma < best[3] - 1e-15:
            best = (off, mu, nu, gamma)
    off, mu, nu, gamma = best
    return AxisStats(sup, True, mu, nu, gamma, off, p)


# ----------------------------------------------------------------------------
# certified bounds for the truncation


def _base_monomials(table: KernelTable) -> list[Monomial]:
    return [
        Monomial(abs(c), tuple(complex(si) + int(k) for si, k in zip(table.s, row)))
        for c, row in zip(table.coeffs, table.powers)
    ]


def _other_axes(monos: list[Monomial], stats: Sequence[AxisStats], skip: int) -> list[Monomial]:
    """Apply |weight| bounds of every axis except ``skip``.

    Axes before ``skip`` carry the true partial sums (|S_j| <= sup_j); axes
    after it carry the approximating measure, whose point mass nu_j at T_j
    is bounded through |h(T_j)| <= int_1^oo |dh/dt_j| dt_j.
    """
    for j, st in enumerate(stats):
        if j == skip:
            continue
        plain = scaled(monos, st.sup)
        if j > skip and st.periodic and st.nu != 0:
            monos = plain + scaled(derivative(monos, j), abs(st.nu))
        else:
            monos = plain
    return monos


def truncation_bound(p: SPoint, table: KernelTable, stats: Sequence[AxisStats], axis: int, T: float) -> float:
    """Bound on the error committed on ``axis`` by the corrected truncation at T."""
    monos = _base_monomials(table)
    st = stats[axis]
    if st.periodic:
        own = scaled(derivative(derivative(monos, axis), axis), st.gamma)
    else:
        own = scaled(monos, st.sup)
    own = _other_axes(own, stats, axis)
    lower = [1.0] * p.r
    lower[axis] = float(T)
    return monomials_bound(own, lower, p.n0)


def panel_remainder(p: SPoint, table: KernelTable, stats: Sequence[AxisStats], axis: int, t_end: float) -> float:
    """Bound on the mean part of ``axis`` beyond the last panel endpoint."""
    st = stats[axis]
    monos = scaled(_base_monomials(table), abs(st.mean))
    monos = _other_axes(monos, stats, axis)
    lower = [1.0] * p.r
    lower[axis] = float(t_end)
    return monomials_bound(monos, lower, p.n0)


def _choose_cutoff(bound_of, stats: AxisStats, target: float, t_max: int) -> tuple[int, float]:
    """Smallest admissible cutoff (aligned to the axis period) whose bound is <= target."""
    per = stats.period if stats.periodic else 1
    off = stats.offset % per

    def at(k: int) -> int:
        return off + per * k

    k_lo = 0
    while at(k_lo) < 2:
        k_lo += 1
    b = bound_of(at(k_lo))
    if b <= target:
        return at(k_lo), b
    k_hi = max(k_lo + 1, 2 * k_lo)
    while True:
        b = bound_of(at(k_hi))
        if b <= target:
            break
        if at(k_hi) >= t_max:
            return at(k_hi), b
        k_lo, k_hi = k_hi, min(2 * k_hi, max(k_hi + 1, (t_max - off) // per + 1))
    while k_hi - k_lo > 1 and at(k_hi) > 1.02 * at(k_lo) + 1:
        mid = (k_lo + k_hi) // 2
        bm = bound_of(at(mid))
        if bm <= target:
            k_hi, b = mid, bm
        else:
            k_lo = mid
    return at(k_hi), bound_of(at(k_hi))


# ----------------------------------------------------------------------------
# quadrature rules


@lru_cache(maxsize=64)
def _gauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


def cell_orders(G: int, m: np.ndarray) -> np.ndarray:
    """Gauss order on cell [m, m+1): cells far from the origin are nearly polynomial."""
    return np.where(m < 16, G, np.where(m < 256, max(G // 2, 2), max(G // 4, 2)))


def box_rule(seq: BoundedSequence, T: int, G: int) -> tuple[np.ndarray, np.ndarray]:
    m = np.arange(1, T)
    S = seq.partial_sums(m)
    orders = cell_orders(G, m)
    xs, ws = [], []
    for g in np.unique(orders):
        sel = orders == g
        u, w = _gauss(int(g))
        xs.append((m[sel, None] + u[None, :]).ravel())
        ws.append((S[sel, None] * w[None, :]).ravel())
    if not xs:
        return np.zeros(0), np.zeros(0, dtype=complex)
    x = np.concatenate(xs)
    w = np.concatenate(ws)
    order = np.argsort(x, kind="stable")
    return x[order], w[order]


def panel_rule(T: float, t_end: float, n: int, weight: complex) -> tuple[np.ndarray, np.ndarray]:
    u, w = _gauss(n)
    xs, ws = [], []
    a = float(T)
    while a < t_end * (1 - 1e-12):
        b = min(a * PANEL_RATIO, t_end)
        xs.append(a + (b - a) * u)
        ws.append((b - a) * w * weight)
        a = b
    if not xs:
        return np.zeros(0), np.zeros(0, dtype=complex)
    return np.concatenate(xs), np.concatenate(ws).astype(complex)


def _tensor_sum(rules, last_x, last_w, table: KernelTable, n0: int, workers: int) -> complex:
    """sum over the tensor grid of prod(weights) * table(prefix sums).

    The flattened outer grid is cut into fixed-size chunks whose partial sums
    are combined with math.fsum, so the result does not depend on ``workers``.
    """
    if len(last_x) == 0 or any(len(x) == 0 for x, _ in rules):
        return 0j
    sizes = [len(x) for x, _ in rules]
    n_outer = math.prod(sizes)
    chunk = max(1, CHUNK_POINTS // len(last_x))

    def work(start: int) -> complex:
        stop = min(start + chunk, n_outer)
        idx = np.unravel_index(np.arange(start, stop), sizes) if rules else ()
        acc = np.full(stop - start, float(n0))
        W = np.ones(stop - start, dtype=complex)
        taus = []
        for ax, (x, w) in enumerate(rules):
            acc = acc + x[idx[ax]]
            W = W * w[idx[ax]]
            taus.append(acc[:, None])
        taus.append(acc[:, None] + last_x[None, :])
        K = table(taus)
        return complex(np.sum((K @ last_w) * W))

    starts = range(0, n_outer, chunk)
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s0) for s0 in starts]
    return complex(math.fsum(z.real for z in parts), math.fsum(z.imag for z in parts))


def _check_inputs(seqs: Sequence[BoundedSequence], p: SPoint) -> None:
    if p.r > MAX_RANK:
        raise UnsupportedRankError(f"cell quadrature supports r <= {MAX_RANK}, got r = {p.r}")
    if len(seqs) != p.r:
        raise ValueError(f"need {p.r} sequences, got {len(seqs)}")
    for seq in seqs:
        if not seq.is_bounded:
            partial_sum_bound(seq)


def integrate_cells(
    seqs: Sequence[BoundedSequence], p: SPoint, plan: TruncationPlan, workers: int = 1
) -> complex:
    """Plain truncation: the integral over the box [1, T_1) x ... x [1, T_r) only."""
    _check_inputs(seqs, p)
    table = kernel_table(p)
    rules = [box_rule(seq, T, plan.nodes) for seq, T in zip(seqs[:-1], plan.cutoffs[:-1])]
    lx, lw = box_rule(seqs[-1], plan.cutoffs[-1], plan.nodes)
    return _tensor_sum(rules, lx, lw, table, p.n0, workers)


def _corrected_sum(seqs, p: SPoint, stats, table, tail_table, cutoffs, panel_ends, G, workers) -> complex:
    r = p.r
    choices = []
    for i in range(r):
        opts = [("box",)]
        if stats[i].periodic:
            if stats[i].mean != 0:
                opts.append(("tail",))
            if stats[i].nu != 0:
                opts.append(("face",))
        choices.append(opts)

    cache: dict = {}

    def rule(i: int, kind: str):
        key = (i, kind)
        if key not in cache:
            T = cutoffs[i]
            if kind == "box":
                cache[key] = box_rule(seqs[i], T, G)
            elif kind == "tail":
                cache[key] = panel_rule(T, panel_ends[i], G + 4, stats[i].mean)
            else:
                cache[key] = (np.array([float(T)]), np.array([stats[i].nu], dtype=complex))
        return cache[key]

    parts = []
    for pattern in product(*choices):
        outer = [rule(i, pattern[i][0]) for i in range(r - 1)]
        last = pattern[r - 1][0]
        T = float(cutoffs[r - 1])
        if last == "box":
            lx, lw = rule(r - 1, "box")
            tab = table
        elif last == "tail":
            lx, lw, tab = np.array([T]), np.array([stats[r - 1].mean], dtype=complex), tail_table
        else:
            lx, lw, tab = np.array([T]), np.array([stats[r - 1].nu], dtype=complex), table
        parts.append(_tensor_sum(outer, lx, lw, tab, p.n0, workers))
    return complex(math.fsum(z.real for z in parts), math.fsum(z.imag for z in parts))


def evaluate_integral(
    seqs: Sequence[BoundedSequence],
    p: SPoint,
    tol: float,
    max_cells: int | None = None,
    nodes: int = 8,
    max_nodes: int = 64,
    workers: int = 1,
) -> EvaluationResult:
    """Evaluate the multiple series through its integral representation.

    Cutoffs are chosen so the certified truncation bound is at most tol/2;
    the Gauss order is doubled until successive results differ by at most
    tol/2.  The returned value is the higher-order one and ``error_estimate``
    is truncation bound + panel remainder + |I_G - I_2G|.
    """
    t0 = time.perf_counter()
    if not tol > 0:
        raise ValueError("tol must be positive")
    _check_inputs(seqs, p)
    if not in_domain_D(p):
        raise RegionError(f"s = {p.s} is outside the convergence region")
    if max_cells is None:
        max_cells = default_max_cells()
    r = p.r
    table = kernel_table(p)
    tail_table = table.tail_last_axis()
    stats = [axis_stats(seq) for seq in seqs]

    t_max = max(2, int(round(max_cells ** (1.0 / r))) + 1)
    target = tol / (2 * r)
    cutoffs, bounds = [], []
    for i in range(r):
        T, b = _choose_cutoff(lambda T, i=i: truncation_bound(p, table, stats, i, T), stats[i], target, t_max)
        cutoffs.append(T)
        bounds.append(b)
    over_budget = math.prod(T - 1 for T in cutoffs) > max_cells
    if over_budget:
        # shrink every axis proportionally, keeping period alignment
        scale = (max_cells / math.prod(T - 1 for T in cutoffs)) ** (1.0 / r)
        new = []
        for T, st in zip(cutoffs, stats):
            per = st.period if st.periodic else 1
            T2 = max(2, int(T * scale))
            T2 -= (T2 - st.offset) % per
            while T2 < 2:
                T2 += per
            new.append(T2)
        cutoffs = new
        bounds = [truncation_bound(p, table, stats, i, cutoffs[i]) for i in range(r)]
    trunc = float(sum(bounds))

    panel_ends, remainders = [], []
    for i in range(r):
        if i == r - 1 or not stats[i].periodic or stats[i].mean == 0:
            panel_ends.append(float(cutoffs[i]))
            remainders.append(0.0)
            continue
        end = float(cutoffs[i])
        rem = panel_remainder(p, table, stats, i, end)
        n = 0
        while rem > tol * 1e-3 / r and n < MAX_PANELS:
            end *= PANEL_RATIO
            rem = panel_remainder(p, table, stats, i, end)
            n += 1
        panel_ends.append(end)
        remainders.append(rem)
    remainder = float(sum(remainders))

    G = nodes
    prev = _corrected_sum(seqs, p, stats, table, tail_table, cutoffs, panel_ends, G, workers)
    while True:
        cur = _corrected_sum(seqs, p, stats, table, tail_table, cutoffs, panel_ends, 2 * G, workers)
        quad = abs(cur - prev)
        if quad <= tol / 2 or 2 * G >= max_nodes:
            break
        G *= 2
        prev = cur
    plan = TruncationPlan(tuple(cutoffs), 2 * G, trunc, quad, remainder, tuple(panel_ends))
    err = trunc + remainder + quad
    result = EvaluationResult(
        cur, err, "integral", plan, in_domain_D(p), in_domain_D0(p), time.perf_counter() - t0
    )
    if over_budget or err > tol:
        raise BudgetError(
            f"error estimate {err:.3g} exceeds tol {tol:.3g} within max_cells={max_cells}", best=result
        )
    return result
