"""
Command line front end.

Exit status: 0 on success, 1 when a verification fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from fractions import Fraction

from . import catalog, optimizer, scheme
from .catalog import AntennaConfig
from .errors import InfeasibleError, ParameterError, RegionError
from .optimizer import SchemeParams

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

SCHEMA = 1


def _dec(x) -> str:
    return f"{float(x):.12g}"


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _rational(text):
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational number such as 0.6 or 3/5, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError("rho must be nonnegative")
    return value


def _tol(text):
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("tolerance must lie in (0, 1)")
    return value


def _snr_pair(text):
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("--snr-db takes two comma separated values, e.g. 40,60")
    lo, hi = (float(p) for p in parts)
    if lo == hi:
        raise argparse.ArgumentTypeError("the two SNR points must differ")
    return lo, hi


def _default_seed():
    env = os.environ.get("RIA_DOF_SEED")
    return _seed(env) if env else 0


def _frac_json(x: Fraction | None):
    if x is None:
        return None
    return {"num": x.numerator, "den": x.denominator, "value": float(x)}


class _Output:
    """Collects text for stdout or --out."""

    def __init__(self, path):
        self.path = path
        self.buf = io.StringIO()

    def write(self, text=""):
        self.buf.write(text)
        if not text.endswith("\n"):
            self.buf.write("\n")

    def flush(self):
        if self.path:
            with open(self.path, "w", newline="") as fh:
                fh.write(self.buf.getvalue())
        else:
            sys.stdout.write(self.buf.getvalue())


def _write_csv(out, rows, fieldnames):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    out.write(buf.getvalue())


# ---------------------------------------------------------------------------
# dof
# ---------------------------------------------------------------------------
def dof_record(cfg: AntennaConfig) -> dict:
    region = catalog.classify(cfg)
    inner = catalog.inner_bound(cfg)
    outer = catalog.outer_bound(cfg.rho)
    return {
        "schema": SCHEMA,
        "M": cfg.M,
        "N": cfg.N,
        "rho": _frac_json(cfg.rho),
        "region": region.label,
        "region_interval": region.interval_str(),
        "inner": _frac_json(inner.value),
        "inner_normalized": _frac_json(inner.normalized),
        "strategy": inner.strategy,
        "strategies": {
            s: _frac_json(v.value) if (v := catalog.strategy_dof(cfg, s)) else None
            for s in catalog.STRATEGIES
        },
        "outer_normalized": _frac_json(outer),
        "outer": _frac_json(outer * cfg.N),
        "outer_interpolated": catalog.outer_is_interpolated(cfg.rho),
    }


def cmd_dof(args, out) -> int:
    cfg = AntennaConfig(args.M, args.N)
    rec = dof_record(cfg)
    if args.format == "json":
        out.write(json.dumps(rec, sort_keys=True))
    elif args.format == "csv":
        row = {"M": cfg.M, "N": cfg.N, "rho_num": cfg.rho.numerator, "rho_den": cfg.rho.denominator,
               "region": rec["region"], "dof": str(catalog.inner_bound(cfg).value),
               "dof_decimal": _dec(catalog.inner_bound(cfg).value)}
        for s in catalog.STRATEGIES:
            v = catalog.strategy_dof(cfg, s)
            row[s] = "" if v is None else str(v.value)
        row["outer"] = str(catalog.outer_bound(cfg.rho) * cfg.N)
        _write_csv(out, [row], list(row))
    else:
        inner = catalog.inner_bound(cfg)
        out.write(f"M = {cfg.M}, N = {cfg.N}, rho = {cfg.rho}")
        out.write(f"region: {rec['region']} {rec['region_interval']}")
        out.write(f"d = {inner.value} ({_dec(inner.value)}) via {inner.strategy}")
        out.write(f"d/N = {inner.normalized} ({_dec(inner.normalized)})")
        out.write("strategies:")
        for s in catalog.STRATEGIES:
            v = catalog.strategy_dof(cfg, s)
            shown = "n/a" if v is None else f"{v.value} ({_dec(v.value)})"
            out.write(f"  {s:<13} {shown}")
        outer = catalog.outer_bound(cfg.rho)
        tag = " [interpolated]" if rec["outer_interpolated"] else ""
        out.write(f"outer bound: d <= {outer * cfg.N} ({_dec(outer * cfg.N)}), d/N <= {outer}{tag}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# optimize
# ---------------------------------------------------------------------------
def _params_record(p: SchemeParams | None, cfg: AntennaConfig) -> dict | None:
    if p is None:
        return None
    return {**p.as_dict(), "dof_decimal": _dec(p.dof),
            "constraints": optimizer.check_constraints(p.b, p.W1, p.W2, cfg).as_dict()}


def cmd_optimize(args, out) -> int:
    cfg = AntennaConfig(args.M, args.N)
    closed = None
    region_msg = None
    try:
        closed = optimizer.closed_form(cfg)
    except RegionError as exc:
        if not args.oracle:
            print(f"error: {exc} (--oracle)", file=sys.stderr)
            return EXIT_USAGE
        region_msg = str(exc)
    oracle = None
    if args.oracle:
        oracle = optimizer.brute_force(cfg, args.max_w1, args.max_w2)
    agree = None
    if closed is not None and oracle is not None:
        agree = closed.dof == oracle.dof
    elif args.oracle and closed is not None and oracle is None:
        agree = False

    rec = {
        "schema": SCHEMA, "M": cfg.M, "N": cfg.N, "region": catalog.classify(cfg).label,
        "closed_form": _params_record(closed, cfg), "oracle": _params_record(oracle, cfg),
        "oracle_bounds": list(_bounds(args, cfg)) if args.oracle else None,
        "agree": agree, "note": region_msg,
    }
    if args.format == "json":
        out.write(json.dumps(rec, sort_keys=True))
    elif args.format == "csv":
        rows = []
        for source, p in (("closed_form", closed), ("oracle", oracle)):
            if p is not None:
                rows.append({"M": cfg.M, "N": cfg.N, "source": source, "b": p.b, "W1": p.W1,
                             "W2": p.W2, "dof": str(p.dof), "dof_decimal": _dec(p.dof)})
        _write_csv(out, rows, ["M", "N", "source", "b", "W1", "W2", "dof", "dof_decimal"])
    else:
        out.write(f"M = {cfg.M}, N = {cfg.N}, rho = {cfg.rho}, region {rec['region']}")
        for name, p in (("closed form", closed), ("oracle", oracle)):
            if p is None:
                continue
            rep = optimizer.check_constraints(p.b, p.W1, p.W2, cfg)
            out.write(f"{name}: b* = {p.b}, W1* = {p.W1}, W2* = {p.W2}, d = {p.dof} ({_dec(p.dof)})")
            out.write("  constraints: " + ", ".join(f"{k}={v}" for k, v in rep.as_dict().items()))
        if args.oracle and oracle is None:
            out.write("oracle: no feasible triple within the search bounds")
        if region_msg:
            out.write(f"closed form unavailable: {region_msg}")
        if agree is not None:
            out.write(f"agreement: {'yes' if agree else 'NO'}")
    return EXIT_FAIL if agree is False else EXIT_OK


def _bounds(args, cfg):
    d1, d2 = optimizer.default_bounds(cfg)
    return (args.max_w1 or d1, args.max_w2 or d2)


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------
REGION_COLUMNS = (
    ["rho_num", "rho_den", "rho", "inner", "inner_num", "inner_den",
     "outer", "outer_num", "outer_den", "outer_interpolated", "region"]
    + list(catalog.STRATEGIES)
)


def region_rows(table) -> list[dict]:
    rows = []
    for r in table:
        row = {
            "rho_num": r["rho"].numerator, "rho_den": r["rho"].denominator, "rho": _dec(r["rho"]),
            "inner": _dec(r["inner"]), "inner_num": r["inner"].numerator, "inner_den": r["inner"].denominator,
            "outer": _dec(r["outer"]), "outer_num": r["outer"].numerator, "outer_den": r["outer"].denominator,
            "outer_interpolated": int(r["outer_interpolated"]), "region": r["region"],
        }
        for s in catalog.STRATEGIES:
            row[s] = "" if r[s] is None else _dec(r[s])
        rows.append(row)
    return rows


def cmd_regions(args, out) -> int:
    table = catalog.sweep(args.rho_min, args.rho_max, args.steps)
    if args.format == "csv":
        _write_csv(out, region_rows(table), REGION_COLUMNS)
    elif args.format == "json":
        rows = [
            {"rho": _frac_json(r["rho"]), "region": r["region"], "inner": _frac_json(r["inner"]),
             "outer": _frac_json(r["outer"]), "outer_interpolated": r["outer_interpolated"],
             "strategies": {s: _frac_json(r[s]) for s in catalog.STRATEGIES}}
            for r in table
        ]
        out.write(json.dumps({"schema": SCHEMA, "normalized": True, "rows": rows}, sort_keys=True))
    else:
        out.write(f"{'rho':>14} {'region':>6} {'inner d/N':>14} {'outer d/N':>14}")
        for r in table:
            mark = "*" if r["outer_interpolated"] else " "
            out.write(f"{str(r['rho']):>14} {r['region']:>6} {str(r['inner']):>14} {str(r['outer']):>14}{mark}")
        out.write("(* outer bound on the interpolated segment)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate / slope
# ---------------------------------------------------------------------------
def _scheme_params(args, cfg) -> SchemeParams:
    overrides = {k: getattr(args, k) for k in ("b", "W1", "W2")}
    if all(v is not None for v in overrides.values()):
        return SchemeParams(**overrides)
    base = optimizer.closed_form(cfg)
    return SchemeParams(*(overrides[k] if overrides[k] is not None else getattr(base, k) for k in ("b", "W1", "W2")))


def cmd_simulate(args, out) -> int:
    cfg = AntennaConfig(args.M, args.N)
    try:
        params = _scheme_params(args, cfg)
    except RegionError as exc:
        print(f"error: {exc}; pass --b, --W1 and --W2 explicitly", file=sys.stderr)
        return EXIT_USAGE
    rep = optimizer.check_constraints(params.b, params.W1, params.W2, cfg)
    if not rep.feasible:
        print(f"infeasible parameters b={params.b}, W1={params.W1}, W2={params.W2}: "
              f"violated {', '.join(rep.failed())}", file=sys.stderr)
        if args.format == "json":
            out.write(json.dumps({"schema": SCHEMA, "type": "constraints", "params": params.as_dict(),
                                  **rep.as_dict()}, sort_keys=True))
        else:
            out.write("constraints: " + ", ".join(f"{k}={v}" for k, v in rep.as_dict().items()))
        return EXIT_FAIL

    summary = scheme.run_trials(cfg, params, args.trials, args.seed, tol=args.tol,
                                aligned=not args.misaligned, workers=args.workers, fill=args.fill)
    ok = summary.all_passed
    if args.format == "json":
        out.write(summary.to_jsonl())
    elif args.format == "csv":
        rows = []
        for t in summary.trials:
            recs = t.receivers
            rows.append({
                "trial": t.trial, "status": t.status,
                "dim_S": " ".join(map(str, t.dim_S)),
                "interference_rank": " ".join(str(r.interference_rank) for r in recs),
                "zf_desired_rank": " ".join(str(r.zf_desired_rank) for r in recs),
                "max_zf_residual": _dec(max(r.zf_residual for r in recs)) if recs else "",
            })
        _write_csv(out, rows, ["trial", "status", "dim_S", "interference_rank", "zf_desired_rank", "max_zf_residual"])
    else:
        s = summary.summary()
        out.write(f"M = {cfg.M}, N = {cfg.N}, b = {params.b}, W1 = {params.W1}, W2 = {params.W2}, d = {params.dof}")
        out.write(f"trials: {s['n_trials']}  pass: {s['pass_count']}  fail: {s['fail_count']}  "
                  f"degenerate: {s['degenerate_count']}")
        out.write(f"dim S_i: observed {s['dim_S_observed']}, expected {s['dim_S_expected']}")
        out.write(f"interference rank: observed {s['interference_ranks_observed']}, "
                  f"expected {s['interference_rank_expected']}")
        if s["mean_zf_residual"] is not None:
            out.write(f"zf residual: mean {s['mean_zf_residual']:.3e}, max {s['max_zf_residual']:.3e}")
            out.write(f"alignment residual: max {s['max_alignment_residual']:.3e}")
        out.write("verdict: " + ("PASS" if ok else "FAIL"))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_slope(args, out) -> int:
    cfg = AntennaConfig(args.M, args.N)
    try:
        params = _scheme_params(args, cfg)
    except RegionError as exc:
        print(f"error: {exc}; pass --b, --W1 and --W2 explicitly", file=sys.stderr)
        return EXIT_USAGE
    est = scheme.estimate_dof_slope(cfg, params, args.snr_db, args.trials, args.seed,
                                    aligned=not args.misaligned, fill=args.fill)
    ok = est.relative_error <= args.rel_tol
    if args.format == "json":
        out.write(json.dumps({**est.as_dict(), "pass": ok}, sort_keys=True))
    elif args.format == "csv":
        row = {"M": cfg.M, "N": cfg.N, "snr_lo_db": est.snr_db[0], "snr_hi_db": est.snr_db[1],
               "slope": _dec(est.slope), "dof": str(est.dof), "relative_error": _dec(est.relative_error),
               "used_trials": est.used_trials, "pass": int(ok)}
        _write_csv(out, [row], list(row))
    else:
        out.write(f"M = {cfg.M}, N = {cfg.N}, params b={params.b} W1={params.W1} W2={params.W2}")
        out.write(f"slope between {est.snr_db[0]:g} and {est.snr_db[1]:g} dB: {est.slope:.4f}")
        out.write(f"target d = {est.dof} ({_dec(est.dof)}), relative error {est.relative_error:.2%}")
        out.write(f"trials used {est.used_trials}, excluded {est.excluded_trials}")
        out.write("verdict: " + ("PASS" if ok else "FAIL"))
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ria-dof",
        description="DoF catalog, parameter optimizer and simulator for two-phase RIA "
                    "on three-user MIMO channels with delayed feedback.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("text", "csv", "json")):
        p.add_argument("--format", choices=formats, default="text")
        p.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")

    def antennas(p):
        p.add_argument("--M", type=_positive_int, required=True, help="transmit antennas")
        p.add_argument("--N", type=_positive_int, required=True, help="receive antennas")

    def overrides(p):
        p.add_argument("--b", type=_positive_int, help="symbols per user (default: closed form)")
        p.add_argument("--W1", type=_positive_int, help="interference-sensing slots")
        p.add_argument("--W2", type=_positive_int, help="alignment slots")
        p.add_argument("--seed", type=_seed, default=_default_seed(),
                       help="root seed (default: $RIA_DOF_SEED or 0)")
        p.add_argument("--misaligned", action="store_true",
                       help="negative control: random alignment-phase precoders")
        p.add_argument("--fill", choices=sorted(scheme.PHASE2_FILLS), default="cyclic",
                       help="row placement rule for alignment-phase precoders")

    p = sub.add_parser("dof", help="achievable DoF, per-strategy values and outer bound")
    antennas(p)
    common(p)
    p.set_defaults(func=cmd_dof)

    p = sub.add_parser("optimize", help="optimal (b, W1, W2) from the closed form and/or the oracle")
    antennas(p)
    p.add_argument("--oracle", action="store_true", help="also run exhaustive enumeration")
    p.add_argument("--max-w1", type=_positive_int, default=None, help="oracle bound on W1 (default 3N+5)")
    p.add_argument("--max-w2", type=_positive_int, default=None, help="oracle bound on W2 (default 3M+5)")
    common(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("regions", help="normalized inner/outer bound sweep over rho")
    p.add_argument("--rho-min", type=_rational, default=Fraction(0))
    p.add_argument("--rho-max", type=_rational, default=Fraction(7, 2))
    p.add_argument("--steps", type=int, default=71)
    common(p)
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("simulate", help="Monte Carlo verification of the zero-forcing conditions")
    antennas(p)
    overrides(p)
    p.add_argument("--trials", type=_positive_int, default=100)
    p.add_argument("--tol", type=_tol, default=scheme.SCHEME_TOL)
    p.add_argument("--workers", type=_positive_int, default=1)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("slope", help="finite-SNR rate slope versus b/W")
    antennas(p)
    overrides(p)
    p.add_argument("--snr-db", type=_snr_pair, required=True, metavar="A,B")
    p.add_argument("--trials", type=_positive_int, default=200)
    p.add_argument("--rel-tol", type=float, default=0.10, help="pass threshold on |slope - d|/d")
    common(p)
    p.set_defaults(func=cmd_slope)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "regions":
        if not args.rho_min < args.rho_max or args.steps < 2:
            parser.error("regions needs rho-min < rho-max and steps >= 2")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = _Output(args.out)
    try:
        code = args.func(args, out)
    except (ParameterError, InfeasibleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
