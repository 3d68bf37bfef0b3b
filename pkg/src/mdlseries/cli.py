"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 region error, 3 budget exceeded.
Usage errors are reported as JSON ``{"error": {"field": ..., "message": ...}}``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from . import __version__
from .characters import (
    BoundedSequence,
    alternating_sequence,
    character_sequence,
    enumerate_characters,
    load_periodic_sequence,
    make_character,
    unit_group,
)
from .compositions import enumerate_compositions, lower_family
from .errors import BudgetError, RegionError
from .integrator import UnsupportedRankError, evaluate_integral
from .kernel import (
    SPoint,
    in_domain_D,
    in_domain_D0,
    kernel_eval,
    lemma1_lhs,
    lemma1_product,
    lemma1_product_dt1,
    lemma1_rhs,
)
from .oracle import evaluate_direct, evaluate_iterated_abel, partial_sum_trajectory

SCHEMA_VERSION = "1.0"
METHODS = ("integral", "direct", "iterated-abel")

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX = re.compile(rf"^\s*([+-]?{_NUM})\s*([+-])\s*({_NUM})?i\s*$")


class UsageError(Exception):
    def __init__(self, fieldname: str | None, message: str):
        super().__init__(message)
        self.field = fieldname
        self.message = message


def parse_complex(text: str, fieldname: str = "s") -> complex:
    """Parse "a+bi" / "a-bi"; both parts are mandatory."""
    m = _COMPLEX.match(text)
    if not m or m.group(3) is None:
        raise UsageError(fieldname, f"malformed complex literal {text!r}; expected a+bi or a-bi")
    re_part = float(m.group(1))
    im_part = float(m.group(3))
    return complex(re_part, -im_part if m.group(2) == "-" else im_part)


def parse_s_vector(text: str) -> list[complex]:
    parts = [x for x in text.split(",")]
    if not text.strip() or any(not x.strip() for x in parts):
        raise UsageError("s", f"malformed s-vector {text!r}")
    return [parse_complex(x, "s") for x in parts]


def parse_sequence(text: str) -> BoundedSequence:
    """Sequence spec: ``char:q:e1[,e2...]``, ``alt`` or ``file:path``."""
    if text == "alt":
        return alternating_sequence()
    if text.startswith("file:"):
        try:
            return load_periodic_sequence(text[5:])
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise UsageError("seq", f"cannot load {text!r}: {exc}") from None
    if text.startswith("char:"):
        bits = text.split(":")
        if len(bits) not in (2, 3):
            raise UsageError("seq", f"malformed character spec {text!r}")
        try:
            q = int(bits[1])
            exps = [int(e) for e in bits[2].split(",")] if len(bits) == 3 and bits[2] not in ("", "-") else []
        except ValueError:
            raise UsageError("seq", f"malformed character spec {text!r}") from None
        if q < 1:
            raise UsageError("seq", f"modulus must be >= 1 in {text!r}")
        try:
            return character_sequence(make_character(q, exps))
        except ValueError as exc:
            raise UsageError("seq", str(exc)) from None
    raise UsageError("seq", f"unknown sequence spec {text!r}; use char:q:e, alt or file:path")


@dataclass
class JobSpec:
    command: str
    r: int | None = None
    s: list[complex] = field(default_factory=list)
    seqs: list[BoundedSequence] = field(default_factory=list)
    n0: int = 0
    tol: float = 1e-8
    method: str = "integral"
    fmt: str = "json"
    max_cells: int | None = None
    max_terms: int | None = None
    workers: int = 1
    timing: bool = True
    extra: dict = field(default_factory=dict)

    @property
    def point(self) -> SPoint:
        return SPoint(self.s, self.n0)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(None, message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--r", type=str, help="depth r (checked against the s-vector length)")
    common.add_argument("--s", type=str, help='comma list of complex literals, e.g. "0.5+0i,0.7+0i"')
    common.add_argument("--seq", action="append", default=[], help="sequence spec per axis (one spec is broadcast)")
    common.add_argument("--n0", type=str, default="0")
    common.add_argument("--tol", type=str, default="1e-8")
    common.add_argument("--method", type=str, default="integral", help="|".join(METHODS))
    common.add_argument("--format", dest="fmt", type=str, default=None, help="json|csv (csv: trajectory only)")
    common.add_argument("--max-cells", type=str, default=None, help="cell budget (default 1e7 or $MDL_MAX_CELLS)")
    common.add_argument("--max-terms", type=str, default=None, help="term budget for direct summation")
    common.add_argument("--workers", type=str, default="1")
    common.add_argument("--no-timing", action="store_true", help="report wall_time as 0 for reproducible output")

    parser = _Parser(prog="mdlseries", description="Multiple Dirichlet L-series evaluator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("eval", parents=[common], help="evaluate with the chosen method")
    sub.add_parser("compare", parents=[common], help="all applicable methods and pairwise deltas")
    sub.add_parser("region", parents=[common], help="region flags for an s-vector")
    p = sub.add_parser("trajectory", parents=[common], help="CSV of outer partial sums")
    p.add_argument("--X", type=str, default="100")
    p = sub.add_parser("kernel-at", parents=[common], help="kernel value and per-term breakdown")
    p.add_argument("--t", type=str, required=True, help="comma list of t_i >= 1")
    p.add_argument("--explain", action="store_true", help="include the per-term breakdown")
    p = sub.add_parser("compositions", help="composition terms of rank r")
    p.add_argument("rank", type=str)
    p = sub.add_parser("characters", help="characters mod q under the generator convention")
    p.add_argument("modulus", type=str)
    p = sub.add_parser("lemma1-check", help="randomised check of the derivative identity")
    p.add_argument("rank", type=str)
    p.add_argument("--trials", type=str, default="100")
    p.add_argument("--seed", type=str, default="0")
    return parser


def _int_field(text, name, lo=None) -> int:
    try:
        v = int(text)
    except (TypeError, ValueError):
        raise UsageError(name, f"{name} must be an integer, got {text!r}") from None
    if lo is not None and v < lo:
        raise UsageError(name, f"{name} must be >= {lo}, got {v}")
    return v


def _float_field(text, name, positive=True) -> float:
    try:
        v = float(text)
    except (TypeError, ValueError):
        raise UsageError(name, f"{name} must be a number, got {text!r}") from None
    if positive and not (v > 0 and math.isfinite(v)):
        raise UsageError(name, f"{name} must be positive, got {text!r}")
    return v


def parse_job(argv: Sequence[str]) -> JobSpec:
    ns = build_parser().parse_args(list(argv))
    if ns.command is None:
        raise UsageError("subcommand", "missing subcommand")
    job = JobSpec(ns.command)
    if ns.command in ("compositions", "characters", "lemma1-check"):
        key = "modulus" if ns.command == "characters" else "rank"
        job.extra[key] = _int_field(getattr(ns, key), key, lo=1)
        if ns.command == "lemma1-check":
            job.extra["trials"] = _int_field(ns.trials, "trials", lo=1)
            job.extra["seed"] = _int_field(ns.seed, "seed")
        return job

    if ns.s is None:
        raise UsageError("s", "--s is required")
    job.s = parse_s_vector(ns.s)
    if ns.r is not None:
        job.r = _int_field(ns.r, "r", lo=1)
        if job.r != len(job.s):
            raise UsageError("r", f"r = {job.r} but the s-vector has {len(job.s)} entries")
    job.r = len(job.s)
    job.n0 = _int_field(ns.n0, "n0", lo=0)
    job.tol = _float_field(ns.tol, "tol")
    if ns.method not in METHODS:
        raise UsageError("method", f"unknown method {ns.method!r}; choose from {', '.join(METHODS)}")
    job.method = ns.method
    fmt = ns.fmt or ("csv" if ns.command == "trajectory" else "json")
    if fmt not in ("json", "csv"):
        raise UsageError("format", f"unknown format {fmt!r}")
    if fmt == "csv" and ns.command != "trajectory":
        raise UsageError("format", "csv output is available for trajectory only")
    job.fmt = fmt
    if ns.max_cells is not None:
        job.max_cells = int(_float_field(ns.max_cells, "max-cells"))
    if ns.max_terms is not None:
        job.max_terms = int(_float_field(ns.max_terms, "max-terms"))
    job.workers = _int_field(ns.workers, "workers", lo=1)
    job.timing = not ns.no_timing
    if ns.command in ("eval", "compare", "trajectory"):
        specs = ns.seq or []
        if not specs:
            raise UsageError("seq", "--seq is required")
        if len(specs) == 1:
            specs = specs * job.r
        if len(specs) != job.r:
            raise UsageError("seq", f"need 1 or {job.r} --seq specs, got {len(specs)}")
        job.seqs = [parse_sequence(x) for x in specs]
    if ns.command == "trajectory":
        job.extra["X"] = _int_field(ns.X, "X", lo=1)
    if ns.command == "kernel-at":
        try:
            t = [float(x) for x in ns.t.split(",")]
        except ValueError:
            raise UsageError("t", f"malformed t-vector {ns.t!r}") from None
        if len(t) != job.r or any(not x >= 1 for x in t):
            raise UsageError("t", f"t needs {job.r} entries, each >= 1")
        job.extra["t"] = t
        job.extra["explain"] = ns.explain
    return job


# ----------------------------------------------------------------------------
# commands


def _cjson(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


def _base(job: JobSpec, command: str) -> dict:
    p = job.point
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "s": [_cjson(x) for x in p.s],
        "n0": p.n0,
        "in_D": in_domain_D(p),
        "in_D0": in_domain_D0(p),
    }


def _run_method(job: JobSpec, method: str) -> dict:
    p = job.point
    if method == "integral":
        res = evaluate_integral(job.seqs, p, job.tol, max_cells=job.max_cells, workers=job.workers)
        return {
            "method": "integral",
            "value": _cjson(res.value),
            "error_estimate": res.error_estimate,
            "plan": res.plan.to_json(),
            "wall_time": res.wall_time if job.timing else 0.0,
        }
    if method == "direct":
        kw = {} if job.max_terms is None else {"max_terms": job.max_terms}
        rep = evaluate_direct(job.seqs, p, job.tol, **kw)
    else:
        kw = {} if job.max_terms is None else {"max_horizon": job.max_terms}
        rep = evaluate_iterated_abel(job.seqs, p, job.tol, **kw)
    return {
        "method": method,
        "value": _cjson(rep.value),
        "error_estimate": rep.error_estimate,
        "plan": rep.to_json(),
        "wall_time": rep.wall_time if job.timing else 0.0,
    }


def _best_payload(job: JobSpec, method: str, best) -> dict | None:
    if best is None:
        return None
    plan = best.plan.to_json() if hasattr(best, "plan") else best.to_json()
    return {
        "method": method,
        "value": _cjson(best.value),
        "error_estimate": best.error_estimate,
        "plan": plan,
        "wall_time": best.wall_time if job.timing else 0.0,
    }


def cmd_eval(job: JobSpec) -> tuple[int, dict]:
    out = _base(job, "eval")
    out.update(_run_method(job, job.method))
    return 0, out


def applicable_methods(job: JobSpec) -> list[str]:
    p = job.point
    bounded = all(q.is_bounded for q in job.seqs)
    out = []
    if in_domain_D(p) and bounded and p.r <= 3:
        out.append("integral")
    if in_domain_D0(p) and p.r <= 3:
        out.append("direct")
    if in_domain_D(p) and bounded and p.r <= 2 and all(q.period is not None for q in job.seqs):
        out.append("iterated-abel")
    return out


def cmd_compare(job: JobSpec) -> tuple[int, dict]:
    out = _base(job, "compare")
    methods = applicable_methods(job)
    if not methods:
        raise RegionError(f"no method applies at s = {job.point.s}: outside proven region")
    results = [_run_method(job, m) for m in methods]
    deltas = []
    for a, b in combinations(results, 2):
        za = complex(a["value"]["re"], a["value"]["im"])
        zb = complex(b["value"]["re"], b["value"]["im"])
        deltas.append(
            {
                "a": a["method"],
                "b": b["method"],
                "delta": abs(za - zb),
                "combined_error": a["error_estimate"] + b["error_estimate"],
            }
        )
    out["results"] = results
    out["deltas"] = deltas
    return 0, out


def cmd_region(job: JobSpec) -> tuple[int, dict]:
    out = _base(job, "region")
    out["suffix_sums"] = job.point.suffix_sums()
    out["status"] = "inside proven region" if out["in_D"] else "outside proven region"
    return 0, out


def cmd_kernel_at(job: JobSpec) -> tuple[int, dict]:
    out = _base(job, "kernel-at")
    kv = kernel_eval(job.extra["t"], job.point, explain=job.extra["explain"])
    out["t"] = job.extra["t"]
    out["value"] = _cjson(kv.value)
    if kv.terms is not None:
        out["terms"] = [{"k": list(k), "coeff": c, "value": _cjson(v)} for k, c, v in kv.terms]
    return 0, out


def cmd_characters(job: JobSpec) -> tuple[int, dict]:
    q = job.extra["modulus"]
    G = unit_group(q)
    chars = []
    for chi in enumerate_characters(q):
        chars.append(
            {
                "label": chi.label,
                "exponents": list(chi.exponents),
                "principal": chi.is_principal,
                "values": [_cjson(complex(v)) for v in chi.values[1:]] + [_cjson(complex(chi.values[0]))],
            }
        )
    return 0, {
        "schema_version": SCHEMA_VERSION,
        "command": "characters",
        "modulus": q,
        "convention": {
            "rule": "odd p^k: smallest primitive root; 4: 3; 2^k (k>=3): -1 and 5; "
            "each generator lifted by CRT to be 1 mod the other prime-power factors; "
            "exponent e_j sends generator g_j to exp(2 pi i e_j / d_j); values listed for n = 1..q",
            "generators": list(G.generators),
            "orders": list(G.orders),
        },
        "count": len(chars),
        "characters": chars,
    }


def lemma1_check(r: int, trials: int, seed: int = 0) -> dict:
    """Random-point check of the derivative identity and of its closed-form derivative."""
    if r < 3:
        raise UsageError("rank", "the identity is checked for r >= 3")
    rng = np.random.default_rng(seed)
    worst_rel, worst_fd = 0.0, 0.0
    h = 1e-5
    for _ in range(trials):
        t = rng.uniform(1.0, 10.0, size=r)
        s = rng.uniform(0.2, 3.0, size=r) + 1j * rng.uniform(-5.0, 5.0, size=r)
        p = SPoint(s, int(rng.integers(0, 4)))
        lhs, rhs = lemma1_lhs(t, p), lemma1_rhs(t, p)
        worst_rel = max(worst_rel, abs(lhs - rhs) / max(abs(rhs), 1e-300))
        for term in lower_family(r):
            tp, tm = t.copy(), t.copy()
            tp[0] += h
            tm[0] -= h
            fd = (lemma1_product(tp, p, term.k) - lemma1_product(tm, p, term.k)) / (2 * h)
            an = lemma1_product_dt1(t, p, term.k)
            worst_fd = max(worst_fd, abs(fd - an) / max(abs(an), 1e-300))
    return {"max_relative_discrepancy": worst_rel, "max_fd_relative_error": worst_fd}


def cmd_lemma1(job: JobSpec) -> tuple[int, dict]:
    stats = lemma1_check(job.extra["rank"], job.extra["trials"], job.extra["seed"])
    ok = stats["max_relative_discrepancy"] <= 1e-10 and stats["max_fd_relative_error"] <= 1e-6
    return 0, {
        "schema_version": SCHEMA_VERSION,
        "command": "lemma1-check",
        "r": job.extra["rank"],
        "trials": job.extra["trials"],
        **stats,
        "passed": ok,
    }


def run(argv: Sequence[str], stdout=None) -> int:
    """Parse, execute and print; returns the exit code."""
    stdout = stdout or sys.stdout
    try:
        job = parse_job(argv)
        if job.command == "compositions":
            r = job.extra["rank"]
            try:
                terms = enumerate_compositions(r)
            except ValueError as exc:
                raise UsageError("rank", str(exc)) from None
            stdout.write(json.dumps([t.to_json() for t in terms]) + "\n")
            return 0
        if job.command == "trajectory":
            vals = partial_sum_trajectory(job.seqs, job.point, job.extra["X"])
            if job.fmt == "csv":
                buf = io.StringIO()
                w = csv.writer(buf, lineterminator="\n")
                w.writerow(["x", "re", "im"])
                for x, z in enumerate(vals, start=1):
                    w.writerow([x, repr(z.real), repr(z.imag)])
                stdout.write(buf.getvalue())
                return 0
            out = _base(job, "trajectory")
            out["points"] = [{"x": x, **_cjson(z)} for x, z in enumerate(vals, start=1)]
            stdout.write(json.dumps(out) + "\n")
            return 0
        handler = {
            "eval": cmd_eval,
            "compare": cmd_compare,
            "region": cmd_region,
            "kernel-at": cmd_kernel_at,
            "characters": cmd_characters,
            "lemma1-check": cmd_lemma1,
        }[job.command]
        code, out = handler(job)
    except UsageError as exc:
        stdout.write(json.dumps({"error": {"kind": "usage", "field": exc.field, "message": exc.message}}) + "\n")
        return 1
    except RegionError as exc:
        stdout.write(json.dumps({"error": {"kind": "region", "field": "s", "message": str(exc)}}) + "\n")
        return 2
    except BudgetError as exc:
        payload = {"error": {"kind": "budget", "field": "tol", "message": str(exc)}}
        best = _best_payload(job, job.method, exc.best)
        if best is not None:
            payload["best"] = best
        stdout.write(json.dumps(payload) + "\n")
        return 3
    except (UnsupportedRankError, ValueError) as exc:
        stdout.write(json.dumps({"error": {"kind": "usage", "field": None, "message": str(exc)}}) + "\n")
        return 1
    stdout.write(json.dumps(out) + "\n")
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
