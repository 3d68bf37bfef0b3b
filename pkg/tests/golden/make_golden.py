"""Regenerate golden.json with an independent high-precision oracle (mpmath).

Inner sums over a periodic coefficient sequence are written with Hurwitz
zeta functions; the outer sum is grouped by period and handed to mpmath.nsum.
Run manually: python3 tests/golden/make_golden.py
"""

import json
from fractions import Fraction
from itertools import product
from pathlib import Path

import mpmath as mp

mp.mp.dps = 30

CHI = {
    "chi3": (3, [1, -1, 0]),
    "chi4": (4, [1, 0, -1, 0]),
    "alt": (2, [1, -1]),
}


def inner(c, s, seq):
    """sum_{n>=1} a(n) (c + n)^-s for a(n) = vals[(n-1) % q]."""
    q, vals = CHI[seq]
    if s == 1:
        # zero period sum: the poles cancel, leaving digamma values
        return -sum(v * mp.digamma((c + j + 1) / mp.mpf(q)) for j, v in enumerate(vals) if v) / q
    return sum(v * q ** (-s) * mp.zeta(s, (c + j + 1) / mp.mpf(q)) for j, v in enumerate(vals) if v)


def series(seqs, s, n0=0):
    q1, v1 = CHI[seqs[0]]
    if len(seqs) == 1:
        return inner(n0, s[0], seqs[0])

    def block(k):
        tot = mp.mpf(0)
        for j, v in enumerate(v1):
            if v:
                n = q1 * k + j + 1
                tot += v * mp.power(n0 + n, -s[0]) * inner(n0 + n, s[1], seqs[1])
        return tot

    # Partial sums over whole periods have a tail sum_j c_j K^-(s1 + s2 + j):
    # repeated Richardson elimination with those known exponents.
    e0 = s[0] + s[1]
    K0, levels = 32, 8
    sums, acc, k = [], mp.mpf(0), 0
    for i in range(levels):
        K = K0 * 2**i
        while k < K:
            acc += block(k)
            k += 1
        sums.append(acc)
    table = sums
    for j in range(levels - 1):
        f = mp.power(2, e0 + j)
        table = [(f * table[i + 1] - table[i]) / (f - 1) for i in range(len(table) - 1)]
    check = mp.nsum(block, [0, mp.inf], method="levin")
    print("   richardson", table[0], "levin", check, "diff", abs(table[0] - check))
    return table[0]


def brute_comps(r):
    out = []
    for k in product(range(r + 1), repeat=r):
        if sum(k) != r or any(sum(k[: i + 1]) > i + 1 for i in range(r)):
            continue
        c, used = 1, 0
        for i, ki in enumerate(k):
            c *= mp.binomial(i + 1 - used, ki)
            used += ki
        out.append((k, int(c)))
    return out


def slab_bound(s, alphas, T):
    r = len(s)
    total = Fraction(0)
    for k, c in brute_comps(r):
        term = Fraction(c)
        for si, ki in zip(s, k):
            for j in range(ki):
                term *= abs(si + j)
        total += term
    denom = Fraction(1)
    for i in range(r):
        denom *= sum(Fraction(x) for x in s[i:])
    a = Fraction(1)
    for x in alphas:
        a *= x
    return float(a * total / denom / Fraction(T) ** sum(s))


def main():
    points = {
        "r1_chi4_s1": (["chi4"], [1], 0),
        "r1_chi4_s2": (["chi4"], [2], 0),
        "r1_chi4_s0.8_n01": (["chi4"], [mp.mpf("0.8")], 1),
        "r1_chi4_s0.8_n05": (["chi4"], [mp.mpf("0.8")], 5),
        "r1_alt_s1": (["alt"], [1], 0),
        "r2_chi4_chi4_s2_2": (["chi4", "chi4"], [2, 2], 0),
        "r2_chi4_chi4_s0.5_0.7": (["chi4", "chi4"], [mp.mpf("0.5"), mp.mpf("0.7")], 0),
        "r2_chi3_chi4_s-0.3_1.2": (["chi3", "chi4"], [mp.mpf("-0.3"), mp.mpf("1.2")], 0),
        "r2_chi4_chi3_s-0.3_1.2": (["chi4", "chi3"], [mp.mpf("-0.3"), mp.mpf("1.2")], 0),
        "r2_alt_alt_s0.6_0.6": (["alt", "alt"], [mp.mpf("0.6"), mp.mpf("0.6")], 0),
    }
    values = {}
    for name, (seqs, s, n0) in points.items():
        values[name] = float(series(seqs, s, n0))
        print(name, values[name])
    out = {
        "series": values,
        "coeff_sums": {str(r): sum(c for _, c in brute_comps(r)) for r in range(1, 9)},
        "slab_bound": {
            "r1_s1_alpha4_T100": slab_bound([1], [4], 100),
            "r2_s2_2_alpha4_4_T50": slab_bound([2, 2], [4, 4], 50),
        },
    }
    Path(__file__).with_name("golden.json").write_text(json.dumps(out, indent=2) + "\n")


if __name__ == "__main__":
    main()
