"""Command-line entry point: ``wpslab <group> <command> [options]``.

Exit codes: 0 success, 1 usage, 2 precondition, 3 budget, 4 output error.
Data goes to stdout (or --output) as JSON lines or CSV; diagnostics go to
stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import circle, config, expsum, exponents, identities, ps_core
from .errors import BudgetError, PreconditionError

MAX_SAFE_INT = 2**53


class UsageError(Exception):
    pass


class ReportError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: tuple
    seed: int = 0
    budgets: config.Budgets = field(default_factory=config.Budgets)
    fmt: str = "json"
    output: Optional[str] = None
    threads: int = 1


# ---------------------------------------------------------------------------
# report emission


def _scalar(value):
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        value = int(value)
        return str(value) if abs(value) >= MAX_SAFE_INT else value
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, ps_core.Exponent):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_scalar(v) for v in value]
    raise ReportError(f"cannot serialise {type(value).__name__} value {value!r}")


def emit_report(records, fmt: str = "json") -> bytes:
    """JSON lines with sorted keys, or CSV with a header row."""
    records = [{k: _scalar(v) for k, v in r.items()} for r in records]
    if not records:
        return b""
    keys = list(records[0])
    if any(set(r) != set(keys) for r in records):
        raise ReportError("records do not share one set of fields")
    if fmt == "json":
        lines = [json.dumps(r, sort_keys=True, separators=(",", ":"), allow_nan=False) for r in records]
        return ("\n".join(lines) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(keys)
        for r in records:
            row = []
            for k in keys:
                v = r[k]
                if isinstance(v, list):
                    v = json.dumps(v, separators=(",", ":"))
                row.append("" if v is None else v)
            w.writerow(row)
        return buf.getvalue().encode()
    raise UsageError(f"unknown format {fmt!r}")


def _rat(rec: dict, key: str, value: Fraction) -> dict:
    rec[key] = value
    rec[key + "_decimal"] = float(value)
    return rec


# ---------------------------------------------------------------------------
# argument helpers


def _gamma_list(text: str) -> list:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) == 1:
        return [ps_core.parse_gamma(parts[0])] * 9
    if len(parts) != 9:
        raise PreconditionError(f"give one exponent or nine, got {len(parts)}")
    return [ps_core.parse_gamma(p) for p in parts]


def _rational(text: str) -> Fraction:
    return exponents.as_fraction(text)


def _int_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p.strip()]


# ---------------------------------------------------------------------------
# command handlers; each returns a list of records


def cmd_ps_seq(a, cfg):
    return [{"m": m} for m in ps_core.ps_sequence(a.limit, ps_core.parse_gamma(a.gamma))]


def cmd_ps_primes(a, cfg):
    t = ps_core.ps_primes(a.limit, ps_core.parse_gamma(a.gamma))
    if a.weights:
        return [{"p": int(p), "log_weight": float(lw), "ps_weight": float(pw)}
                for p, lw, pw in zip(t.primes, t.log_weights, t.ps_weights)]
    return [{"p": int(p)} for p in t.primes]


def cmd_ps_pi(a, cfg):
    g = ps_core.parse_gamma(a.gamma)
    count, ratio = ps_core.pi_gamma(a.limit, g)
    return [{"gamma": g, "limit": a.limit, "count": count, "ratio": ratio}]


def cmd_expsum_eval(a, cfg):
    s = expsum.build_series(a.kind, a.limit, None if a.kind == "G" else ps_core.parse_gamma(a.gamma))
    alpha = float(a.alpha) if a.real else expsum.RationalPhase.of(a.alpha)
    z = expsum.evaluate(s, alpha)
    return [{"kind": a.kind, "alpha": str(alpha) if not a.real else alpha, "size": len(s),
             "re": z.real, "im": z.imag, "abs": abs(z)}]


def cmd_expsum_moment(a, cfg):
    s = expsum.build_series("f", a.limit, ps_core.parse_gamma(a.gamma))
    m = expsum.moment(s, a.t, cap=a.cap, workers=cfg.threads)
    return [{"t": m.half_order, "size": m.set_size, "count": m.count,
             "diagonal": expsum.diagonal_count(m.set_size, m.half_order)}]


def cmd_expsum_hua(a, cfg):
    m = expsum.hua_moment(a.Y, a.k, a.j, workers=cfg.threads)
    return [{"Y": a.Y, "k": a.k, "j": a.j, "count": m.count}]


def cmd_expsum_scan(a, cfg):
    r = expsum.sup_diff_scan(a.N, ps_core.parse_gamma(a.gamma), a.grid, a.samples, cfg.seed, workers=cfg.threads)
    return [{"N": a.N, "points": r.points, "max_abs_diff": r.max_abs_diff, "argmax": r.argmax,
             "F0": r.F0, "G0": r.G0, "ratio": r.ratio}]


def cmd_expsum_probe(a, cfg):
    if a.kind == "script-s":
        r = expsum.script_S_probe(a.X, a.alpha, a.H, ps_core.parse_gamma(a.gamma), a.u,
                                  _rational(a.delta), epsilon=_rational(a.eps))
        return [{"X": a.X, "H": a.H, "value": r.value, "target": r.target, "H0": r.H0, "H1": r.H1,
                 "ratio": r.ratio}]
    h1 = None if a.h1_exp is None else _rational(a.h1_exp)
    r = expsum.bilinear_probe(a.kind, a.M, a.K, a.H, a.alpha, ps_core.parse_gamma(a.gamma), a.u,
                              a.a_coeff, a.b_coeff, seed=cfg.seed, h1_exponent=h1,
                              max_terms=cfg.budgets.max_terms)
    return [{"kind": r.kind, "terms": r.terms, "raw": r.raw, "prefactor": r.prefactor, "value": r.value,
             "trivial_bound": r.trivial_bound, "ratio": r.ratio}]


def _reps_range(a, arr):
    lo = max(a.start, 0)
    for N in range(lo, a.nmax + 1):
        if a.nonzero and arr.counts[N] == 0:
            continue
        yield N


def cmd_reps_count(a, cfg):
    tables = circle.tables_for(a.nmax, _gamma_list(a.gamma))
    arr = circle.rep_count(a.nmax, tables, workers=cfg.threads)
    return [{"N": N, "count": arr.counts[N]} for N in _reps_range(a, arr)]


def cmd_reps_weighted(a, cfg):
    tables = circle.tables_for(a.nmax, _gamma_list(a.gamma))
    arr = circle.weighted_T(a.nmax, tables, workers=cfg.threads)
    return [{"N": N, "count": arr.counts[N], "weighted": float(arr.weighted[N])} for N in _reps_range(a, arr)]


def cmd_sseries(a, cfg):
    v = circle.singular_series(a.n, a.q)
    if a.factors:
        return [{"p": p, "chi": chi} for p, chi in v.local_factors]
    return [{"N": v.N, "Q": v.Q, "partial": v.partial}]


def cmd_compare(a, cfg):
    rep = circle.compare_window(a.start, a.stop, _gamma_list(a.gamma), a.q, include_even=a.even,
                                workers=cfg.threads, allow_mixed=a.allow_mixed)
    if a.summary:
        return [{"from": a.start, "to": a.stop, "Q": a.q, "rows": len(rep.rows), "mean_ratio": rep.mean_ratio}]
    return [{"N": r.N, "count": r.count, "weighted": r.weighted, "mainterm": r.mainterm, "ratio": r.ratio}
            for r in rep.rows]


def cmd_identity_hb(a, cfg):
    if a.n is not None:
        ns = [a.n]
    else:
        ns = range(1, math.floor(2 * a.z**a.k) + 1)
    rows = [(n, identities.hb_check(n, a.z, a.k)) for n in ns]
    if a.summary:
        worst = max(rows, key=lambda r: r[1])
        return [{"z": a.z, "k": a.k, "checked": len(rows), "max_residual": worst[1], "argmax": worst[0]}]
    return [{"n": n, "residual": r} for n, r in rows]


def cmd_identity_psi(a, cfg):
    out = []
    for H in _int_list(a.H):
        ratios = identities.psi_ratio_grid(H, a.grid)
        j = int(np.argmax(ratios))
        out.append({"H": H, "grid": a.grid, "max_ratio": float(ratios[j]), "argmax": Fraction(j, a.grid)})
    return out


def cmd_lemma27(a, cfg):
    alpha = _rational(a.alpha)
    delta = _rational(a.delta)
    count, bound, ratio = identities.count_N_Delta(a.H, a.K, alpha, delta, workers=cfg.threads,
                                                   max_terms=cfg.budgets.max_terms)
    return [{"H": a.H, "K": a.K, "alpha": alpha, "delta": delta, "count": count, "bound": bound, "ratio": ratio}]


def _objective_from_json(text: str) -> identities.MonomialObjective:
    try:
        d = json.loads(text)
        asc = tuple((float(A), float(u)) for A, u in d.get("ascending", []))
        desc = tuple((float(B), float(v)) for B, v in d.get("descending", []))
        return identities.MonomialObjective(asc, desc, float(d["Q1"]), float(d["Q2"]))
    except (ValueError, KeyError, TypeError) as exc:
        raise PreconditionError(f"bad objective JSON: {exc}") from exc


def cmd_srinivasan(a, cfg):
    if a.terms:
        objs = [_objective_from_json(a.terms)]
    else:
        rng = np.random.default_rng(cfg.seed)
        objs = [identities.random_objective(rng) for _ in range(a.random)]
    out = []
    for obj in objs:
        r = identities.srinivasan_min(obj)
        out.append({"q_star": r.q_star, "L_min": r.L_min, "rhs": r.rhs, "constant": r.constant, "sound": r.sound})
    return out


def cmd_vdc(a, cfg):
    r = identities.vdc_probe(a.order, a.alpha, a.h, ps_core.parse_gamma(a.gamma), a.u, a.A, a.B)
    return [{"order": r.order, "sum_abs": r.sum_abs, "lemma_bound": r.lemma_bound, "ratio": r.ratio,
             "lambda": r.lam, "derivative_ratio": r.derivative_ratio}]


def cmd_exp_delta(a, cfg):
    vec = exponents.delta_vector(_gamma_list(a.gammas))
    return [_rat({"i": i, "gamma": g}, "delta", d) for i, (g, d) in enumerate(zip(vec.gammas, vec.deltas), 1)]


def cmd_exp_admissible(a, cfg):
    vals = exponents.constraint_values(_gamma_list(a.gammas))
    i = max(range(9), key=lambda j: vals[j])
    rec = {"admissible": all(v < 1 for v in vals), "binding_index": i + 1}
    return [_rat(rec, "binding_value", vals[i])]


def cmd_exp_threshold(a, cfg):
    fixed = _int_list(a.positions) if a.positions else list(range(1, a.fixed + 1))
    rec = {"fixed": ",".join(map(str, fixed))}
    return [_rat(rec, "threshold", exponents.threshold(fixed))]


def _budget_record(b: exponents.ExponentBudget) -> dict:
    rec: dict = {}
    for key in ("gamma", "Delta", "epsilon", "a_frak", "b_frak", "c_frak", "h0_exp", "h1_exp"):
        _rat(rec, key, getattr(b, key))
    for key in ("b_lt_two_thirds", "gap_ok", "b_lt_a", "admissible"):
        rec[key] = getattr(b, key)
    return rec


def cmd_exp_budget(a, cfg):
    return [_budget_record(exponents.budget(_rational(a.gamma), _rational(a.delta), _rational(a.eps)))]


def cmd_exp_partition(a, cfg):
    b = exponents.budget(_rational(a.gamma), _rational(a.delta), _rational(a.eps))
    p = exponents.case_partition([_rational(x) for x in a.evec.split(",")], b)
    rec = {"case": p.case, "kind": p.kind, "index": p.index, "ell": p.ell,
           "permutation": ",".join(map(str, p.permutation))}
    _rat(rec, "m_exp", p.m_exp)
    return [_rat(rec, "k_exp", p.k_exp)]


def cmd_exp_sweep(a, cfg):
    rng = np.random.default_rng(cfg.seed)
    flags_ok = 0
    labels = {1: 0, 2: 0, 3: 0}
    for i in range(a.samples):
        g, d = exponents.sample_admissible(rng, near_edge=i % 2 == 1)
        b = exponents.budget(g, d, 0)
        flags_ok += b.flags_ok
        labels[exponents.case_partition(exponents.sample_evec(rng, style=i % 2), b).case] += 1
    return [{"samples": a.samples, "flags_ok": flags_ok, "case1": labels[1], "case2": labels[2],
             "case3": labels[3]}]


# ---------------------------------------------------------------------------
# parser


def _globals(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="seed for every random choice (default 0)")
    p.add_argument("--format", dest="fmt", choices=("json", "csv"), default=d("json"))
    p.add_argument("--output", default=d(None), help="write the report here instead of stdout")
    p.add_argument("--threads", type=int, default=d(1), help="worker threads; output does not depend on it")
    p.add_argument("--max-terms", type=int, default=d(None), help="direct-summation budget")
    p.add_argument("--max-bits", type=int, default=d(None), help="big-integer size budget")
    p.add_argument("--max-mem-mb", type=int, default=d(None),
                   help=f"memory budget in MB (default ${config.BUDGET_ENV} or {config.DEFAULT_MAX_MEM_MB})")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wpslab", description=__doc__.splitlines()[0])
    _globals(parser, suppress=False)
    common = _Parser(add_help=False)
    _globals(common, suppress=True)
    groups = parser.add_subparsers(dest="group", metavar="group", parser_class=_Parser)

    def sub(container, name, handler, help_text):
        p = container.add_parser(name, help=help_text, parents=[common])
        p.set_defaults(handler=handler)
        return p

    # ps
    ps = groups.add_parser("ps", help="sequences and primes").add_subparsers(dest="cmd", metavar="cmd", parser_class=_Parser)
    for name, handler, text in (("seq", cmd_ps_seq, "sequence terms <= limit"),
                                ("primes", cmd_ps_primes, "sequence primes <= limit"),
                                ("pi", cmd_ps_pi, "count of sequence primes <= limit")):
        p = sub(ps, name, handler, text)
        p.add_argument("--gamma", required=True, help="exponent a/b in (1/2, 1]")
        p.add_argument("--limit", type=int, required=True)
        if name == "primes":
            p.add_argument("--weights", action="store_true", help="include log and sequence weights")

    # expsum
    es = groups.add_parser("expsum", help="cubic exponential sums").add_subparsers(dest="cmd", metavar="cmd", parser_class=_Parser)
    p = sub(es, "eval", cmd_expsum_eval, "evaluate G, F or f at one phase")
    p.add_argument("--kind", choices=("G", "F", "f"), required=True)
    p.add_argument("--gamma", default="1")
    p.add_argument("--limit", type=int, required=True, help="largest prime drawn")
    p.add_argument("--alpha", required=True, help="phase a/q (or a float with --real)")
    p.add_argument("--real", action="store_true", help="treat --alpha as a real number")
    p = sub(es, "moment", cmd_expsum_moment, "exact 2t-th moment of f as a solution count")
    p.add_argument("--t", type=int, required=True, choices=(1, 2, 4))
    p.add_argument("--gamma", required=True)
    p.add_argument("--limit", type=int, required=True)
    p.add_argument("--cap", type=int, default=expsum.DEFAULT_MOMENT_CAP)
    p = sub(es, "hua", cmd_expsum_hua, "exact moment of a Weyl sum over [1, Y]")
    p.add_argument("--Y", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    p = sub(es, "scan", cmd_expsum_scan, "largest |F - G| on a grid and random phases")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--grid", type=int, default=10000)
    p.add_argument("--samples", type=int, default=0, help="extra seeded random phases")
    p = sub(es, "probe", cmd_expsum_probe, "Type I, Type II or Lambda-weighted probe sums")
    p.add_argument("kind", choices=("I", "II", "script-s"))
    p.add_argument("--M", type=int, default=1)
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--X", type=int, default=2)
    p.add_argument("--H", type=int, default=1)
    p.add_argument("--alpha", default="0")
    p.add_argument("--gamma", required=True)
    p.add_argument("--u", type=float, default=0.0)
    p.add_argument("--a-coeff", default="one", choices=("one", "mobius", "liouville", "random"))
    p.add_argument("--b-coeff", default="one", choices=("one", "mobius", "liouville", "random"))
    p.add_argument("--h1-exp", default=None, help="override the H1 exponent (default 1 - gamma)")
    p.add_argument("--delta", default="0")
    p.add_argument("--eps", default="0")

    # circle
    rp = groups.add_parser("reps", help="representations as sums of nine prime cubes").add_subparsers(dest="cmd", metavar="cmd", parser_class=_Parser)
    for name, handler in (("count", cmd_reps_count), ("weighted", cmd_reps_weighted)):
        p = sub(rp, name, handler, f"{name} representations for N <= nmax")
        p.add_argument("--nmax", type=int, required=True)
        p.add_argument("--gamma", default="1", help="one exponent, or nine comma-separated")
        p.add_argument("--from", dest="start", type=int, default=0)
        p.add_argument("--nonzero", action="store_true", help="skip N with no representation")
    p = sub(groups, "sseries", cmd_sseries, "truncated singular series")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, default=200)
    p.add_argument("--factors", action="store_true", help="emit local factors instead of the partial sum")
    p = sub(groups, "compare", cmd_compare, "weighted count against the main term")
    p.add_argument("--from", dest="start", type=int, required=True)
    p.add_argument("--to", dest="stop", type=int, required=True)
    p.add_argument("--gamma", default="1")
    p.add_argument("--q", type=int, default=200)
    p.add_argument("--even", action="store_true", help="include even N")
    p.add_argument("--summary", action="store_true", help="emit only the averaged ratio")
    p.add_argument("--allow-mixed", action="store_true")

    # identities
    ids = groups.add_parser("identity", help="exact identities").add_subparsers(dest="cmd", metavar="cmd", parser_class=_Parser)
    p = sub(ids, "hb", cmd_identity_hb, "Heath-Brown identity residuals")
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--n", type=int)
    g.add_argument("--all", action="store_true", help="every n <= 2 z^k (the default)")
    p.add_argument("--summary", action="store_true", help="emit only the largest residual")
    p = sub(ids, "psi", cmd_identity_psi, "sawtooth Fourier truncation error ratios")
    p.add_argument("--H", default="100", help="comma-separated truncation lengths")
    p.add_argument("--grid", type=int, default=1009)
    p = sub(groups, "lemma27", cmd_lemma27, "spacing count of h k^alpha")
    p.add_argument("--H", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--delta", required=True)
    p = sub(groups, "srinivasan", cmd_srinivasan, "minimise a sum of monomials")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--terms", help='JSON {"ascending": [[A,u],...], "descending": [[B,v],...], "Q1":.., "Q2":..}')
    g.add_argument("--random", type=int, help="this many seeded random objectives")
    p = sub(groups, "vdc", cmd_vdc, "derivative-test probe")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--alpha", default="0")
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--u", type=float, default=0.0)
    p.add_argument("--A", type=float, required=True)
    p.add_argument("--B", type=float, default=None)

    # exponents
    ex = groups.add_parser("exponents", help="exact exponent bookkeeping").add_subparsers(dest="cmd", metavar="cmd", parser_class=_Parser)
    p = sub(ex, "delta", cmd_exp_delta, "Delta_i for nine exponents")
    p.add_argument("--gammas", required=True, help="one exponent, or nine comma-separated")
    p = sub(ex, "admissible", cmd_exp_admissible, "strict admissibility test")
    p.add_argument("--gammas", required=True)
    p = sub(ex, "threshold", cmd_exp_threshold, "threshold for a pattern of unit positions")
    p.add_argument("--fixed", type=int, default=0, help="hold positions 1..FIXED at 1")
    p.add_argument("--positions", default=None, help="comma-separated positions held at 1")
    for name, handler in (("budget", cmd_exp_budget), ("partition", cmd_exp_partition)):
        p = sub(ex, name, handler, "Type I / II budget" if name == "budget" else "case of a factorisation")
        p.add_argument("--gamma", required=True)
        p.add_argument("--delta", required=True)
        p.add_argument("--eps", default="0")
        if name == "partition":
            p.add_argument("--evec", required=True, help="six comma-separated rationals summing to 1")
    p = sub(ex, "sweep", cmd_exp_sweep, "seeded check of budget flags and case labels")
    p.add_argument("--samples", type=int, default=10000)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout.buffer
    stderr = stderr if stderr is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "handler"):
            raise UsageError(parser.format_usage())
        overrides = {k: v for k, v in (("max_terms", args.max_terms), ("max_bits", args.max_bits),
                                        ("max_mem_mb", args.max_mem_mb)) if v is not None}
        budgets = config.Budgets.from_env(**overrides)
        cmd = tuple(x for x in (args.group, getattr(args, "cmd", None)) if x)
        cfg = RunConfig(cmd, args.seed, budgets, args.fmt, args.output, max(1, args.threads))
    except UsageError as exc:
        print(str(exc).rstrip(), file=stderr)
        return 1
    except (ValueError, PreconditionError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    config.set_budgets(cfg.budgets)
    start = time.perf_counter()
    try:
        records = args.handler(args, cfg)
        data = emit_report(records, cfg.fmt)
    except (ValueError, PreconditionError) as exc:
        print(f"precondition: {exc}", file=stderr)
        return 2
    except BudgetError as exc:
        print(f"budget: {exc}", file=stderr)
        return 3
    except ReportError as exc:
        print(f"output: {exc}", file=stderr)
        return 4
    finally:
        config.set_budgets(None)
    try:
        if cfg.output:
            with open(cfg.output, "wb") as fh:
                fh.write(data)
        else:
            stdout.write(data)
            stdout.flush()
    except OSError as exc:
        print(f"output: {exc}", file=stderr)
        return 4
    print(f"{' '.join(cfg.command)}: {len(records)} records in {time.perf_counter() - start:.3f}s", file=stderr)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
