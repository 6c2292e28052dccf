"""Command line entry point: predict, solve, experiment, moments, validate-t."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys

from . import moments as mo
from . import predictor as pr
from .errors import BracketError, CapacityError, DomainError, ScanRangeError, TwoPointError, ValidationError
from .experiment import ExperimentConfig, canonical_json, run_experiment, solve_statistic
from .graph import Graph
from .predictor import EdgeBudgetFn, ModelParams
from .solvers import Budget

EXIT_OK, EXIT_VALIDATION, EXIT_CAPACITY = 0, 2, 3

STAT_ALIASES = {"tree": "tree", "path": "path", "cycle": "cycle", "mis": "independent_set", "edges": "exact_edges"}


def parse_t_form(text: str, R: float = 1.0, eps: float = 0.5) -> EdgeBudgetFn:
    """``const:C``, ``floor:C:A`` (t = floor(C k^A)) or ``table:FILE`` (JSON {k: t})."""
    kind, _, rest = text.partition(":")
    try:
        if kind == "const":
            return EdgeBudgetFn.constant(int(rest), R=R, eps=eps)
        if kind == "floor":
            c, _, a = rest.partition(":")
            return EdgeBudgetFn.power(float(c), float(a) if a else 2.0, R=R, eps=eps)
        if kind == "table":
            with open(rest) as fh:
                return EdgeBudgetFn.from_table({int(k): int(v) for k, v in json.load(fh).items()}, R=R, eps=eps)
    except (ValueError, OSError) as exc:
        raise ValidationError(f"bad --t-form {text!r}: {exc}") from None
    raise ValidationError(f"bad --t-form {text!r}; expected const:C, floor:C:A or table:FILE")


def _emit(obj) -> None:
    sys.stdout.write(canonical_json(obj))


# ------------------------------------------------------------- predict

def cmd_predict(args) -> int:
    mp = ModelParams(args.n, args.p)
    stat = STAT_ALIASES[args.stat]
    out = {"n": args.n, "p": args.p, "stat": stat}
    if stat == "tree":
        win = pr.window_tree(mp, args.eps, args.method or pr.CLOSED_FORM)
        if win.method == pr.ROOT_BASED:
            out["khat"] = pr.khat(mp)
    elif stat in ("path", "cycle"):
        win = pr.window_path_cycle(mp)
    elif stat == "independent_set" and args.method != pr.MOMENT_BASED:
        win = pr.window_independence(mp)
    elif stat == "exact_edges" and args.b is not None:
        win = pr.window_bounded_edges_fkm(mp, args.t, args.b)
    else:
        tfn = EdgeBudgetFn.constant(0) if stat == "independent_set" else parse_t_form(args.t_form or "const:0")
        k0, win = pr.k0_edges(mp, tfn, args.eps1)
        out["k0"] = k0
    out["window"] = win.to_dict()
    _emit(out)
    return EXIT_OK


# ------------------------------------------------------------- solve

def cmd_solve(args) -> int:
    g = Graph.load(args.graph)
    stat = STAT_ALIASES[args.stat]
    budget = Budget(args.max_nodes, None if args.budget_ms is None else args.budget_ms / 1000)
    tfn = parse_t_form(args.t_form) if stat == "exact_edges" else None
    if stat == "exact_edges" and tfn is None:
        raise ValidationError("edges needs --t-form")
    res = solve_statistic(g, stat, budget, tfn)
    _emit(res.to_dict())
    return EXIT_OK if res.exact else EXIT_CAPACITY


# ------------------------------------------------------------- experiment

def cmd_experiment(args) -> int:
    with open(args.config) as fh:
        try:
            cfg = ExperimentConfig.from_dict(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not JSON: {exc}") from None
    report = run_experiment(cfg, workers=args.workers)
    sys.stdout.write(report.to_json())
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report.to_csv())
    print(f"wall time {report.wall_time:.2f} s", file=sys.stderr)
    return EXIT_OK


# ------------------------------------------------------------- moments

def _num(x: float) -> str:
    return f"{x:.12g}"


def cmd_moments(args) -> int:
    mp = ModelParams(args.n, args.p)
    w = csv.writer(sys.stdout, lineterminator="\n")
    table = args.table
    if table == "chebyshev":
        rep = mo.tree_chebyshev_report(mp, args.eps)
        w.writerow(["ell", "regime", "ln_term"])
        for row in rep.rows:
            w.writerow(["" if row.ell is None else row.ell, row.regime, _num(row.ln_term)])
        w.writerow(["", "total", _num(rep.total)])
        return EXIT_OK
    if table == "tree-ratio":
        k = args.k if args.k is not None else math.floor(pr.khat(mp) - 1 + args.eps)
        limit = mo.small_ell_limit(mp)
        w.writerow(["k", "ell", "regime", "ln_ratio"])
        for ell in range(2, k - 1):
            if ell <= limit:
                w.writerow([k, ell, "small", _num(mo.tree_ratio_small_ell_log(mp, k, ell))])
            else:
                try:
                    w.writerow([k, ell, "large", _num(mo.tree_ratio_large_ell_log(mp, k, ell))])
                except DomainError:
                    w.writerow([k, ell, "none", ""])
        return EXIT_OK

    tfn = parse_t_form(args.t_form or "const:0")
    k = args.k if args.k is not None else pr.k0_edges(mp, tfn, args.eps1)[0] - 1
    t = tfn(k)
    if table == "edges-F":
        w.writerow(["k", "t", "ell", "ln_F"])
        for ell in range(0, k):
            try:
                w.writerow([k, t, ell, _num(mo.edges_F_log(mp, k, ell, t))])
            except DomainError:
                continue
    elif table == "edges-H":
        if args.ell is None:
            raise ValidationError("edges-H needs --ell")
        lo, hi = mo.j_range(k, args.ell, t)
        w.writerow(["k", "t", "ell", "j", "ln_H"])
        for j in range(lo, hi + 1):
            w.writerow([k, t, args.ell, j, _num(mo.edges_H_log(mp, k, args.ell, t, j))])
    else:  # G
        w.writerow(["k", "t", "ell", "ln_G", "ln_G_tilde", "ln_G_hat"])
        for ell in range(2, k - 1):
            term = mo.edges_G_values(mp, k, ell, t)
            w.writerow([k, t, ell, _num(term.ln_G), _num(term.ln_G_tilde), _num(term.ln_G_hat)])
    return EXIT_OK


# ------------------------------------------------------------- validate-t

def cmd_validate_t(args) -> int:
    tfn = parse_t_form(args.t_form, args.R, args.eps)
    found = pr.validate_t_sequence(tfn, args.k_lo, args.k_hi)
    ok = not any(not v.informational for v in found)
    _emit({"ok": ok, "violations": [v.to_dict() for v in found]})
    return EXIT_OK if ok else EXIT_VALIDATION


# ------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twopoint", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="predicted two-value window")
    p.add_argument("--stat", choices=sorted(STAT_ALIASES), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--eps", type=float, default=pr.DEFAULT_TREE_EPS)
    p.add_argument("--eps1", type=float, default=pr.DEFAULT_EPS1)
    p.add_argument("--t-form")
    p.add_argument("--b", type=float, help="with --t: window for sets with at most t edges")
    p.add_argument("--t", type=int, default=0)
    p.add_argument("--method", choices=[pr.CLOSED_FORM, pr.ROOT_BASED, pr.MOMENT_BASED])
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("solve", help="exact solve on an edge-list graph")
    p.add_argument("--stat", choices=sorted(STAT_ALIASES), required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--budget-ms", type=float)
    p.add_argument("--max-nodes", type=int)
    p.add_argument("--t-form")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("experiment", help="Monte Carlo experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--csv")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("moments", help="moment tables as CSV")
    p.add_argument("--table", choices=["tree-ratio", "edges-F", "edges-H", "G", "chebyshev"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--eps", type=float, default=pr.DEFAULT_TREE_EPS)
    p.add_argument("--eps1", type=float, default=pr.DEFAULT_EPS1)
    p.add_argument("--t-form")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("validate-t", help="check t(k) smoothness and density")
    p.add_argument("--t-form", required=True)
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--k-lo", type=int, required=True)
    p.add_argument("--k-hi", type=int, required=True)
    p.set_defaults(func=cmd_validate_t)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValidationError, DomainError, BracketError, ScanRangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except TwoPointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
