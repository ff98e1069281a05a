"""Command-line interface.

    benini dist benini --beta 1 cdf --x e
    benini dist benini --beta 1 pdf --grid 1:8:200
    benini moments --betas 2,1,0.5 --kmax 4 --compare
    benini stieltjes --beta 1 --epsilon 1 --kmax 6
    benini criteria benini --beta 1
    benini fit --input incomes.csv --model benini3

Every command prints an envelope {command, parameters, results, diagnostics}
as JSON (default), CSV or an aligned text table.  Exit codes: 0 success,
2 invalid parameters, 3 I/O or parse errors, 4 numerical non-convergence.
The default relative quadrature tolerance may be overridden through the
BENINI_RTOL environment variable.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import determinacy, fitting, moments, stieltjes
from .distributions import Benini, BeniniThree, GenBenini, LogWeibull, Pareto
from .numerics import ConvergenceError, Tolerance

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4
RTOL_ENV = "BENINI_RTOL"

_CONSTANTS = {"e": math.e, "pi": math.pi}


class Table:
    def __init__(self, columns, rows):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]

    def as_json(self):
        return {"columns": self.columns, "rows": self.rows}


# -- parsing helpers ---------------------------------------------------------

def _number(text: str) -> float:
    text = text.strip()
    if text in _CONSTANTS:
        return _CONSTANTS[text]
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _number_list(text: str) -> list[float]:
    return [_number(t) for t in text.split(",") if t.strip()]


def _grid(text: str, log: bool) -> np.ndarray:
    try:
        start, stop, count = text.split(":")
        start, stop, count = _number(start), _number(stop), int(count)
    except (ValueError, argparse.ArgumentTypeError):
        raise ValueError(f"grid must be start:stop:count, got {text!r}") from None
    if count < 1:
        raise ValueError("grid count must be >= 1")
    return np.geomspace(start, stop, count) if log else np.linspace(start, stop, count)


def default_tolerance() -> Tolerance:
    raw = os.environ.get(RTOL_ENV)
    if raw is None:
        return Tolerance(relative=1e-12)
    try:
        return Tolerance(relative=float(raw))
    except ValueError as exc:
        raise ValueError(f"{RTOL_ENV}={raw!r}: {exc}") from None


def _family(args):
    fam = args.family
    if fam == "pareto":
        return Pareto(_need(args, "alpha"), args.sigma)
    if fam == "benini":
        return Benini(_need(args, "beta"), args.sigma)
    if fam == "benini3":
        return BeniniThree(_need(args, "alpha"), _need(args, "beta"), args.sigma)
    if fam == "genbenini":
        return GenBenini(tuple(_need(args, "coeffs")))
    if fam == "logweibull":
        return LogWeibull(_need(args, "a"))
    raise ValueError(f"unknown family {fam!r}")


def _need(args, name):
    v = getattr(args, name)
    if v is None:
        raise ValueError(f"{args.family} requires --{name}")
    return v


# -- commands ----------------------------------------------------------------

def cmd_dist(args):
    dist = _family(args)
    params = {"family": dist.family, **dist.params(), "action": args.action}
    if args.action == "sample":
        if args.n is None:
            raise ValueError("sample requires --n")
        params.update(n=args.n, seed=args.seed)
        xs = dist.sample(args.n, args.seed)
        return params, {"table": Table(["i", "x"], [[i, float(v)] for i, v in enumerate(xs)])}, []
    if args.grid is not None:
        inputs = _grid(args.grid, args.log_grid)
        params["grid"] = args.grid + (" (log)" if args.log_grid else "")
    elif args.x is not None:
        inputs = np.asarray(args.x, dtype=float)
    else:
        raise ValueError(f"{args.action} requires --x or --grid")
    if args.action == "quantile":
        values = dist.quantile(inputs)
        col = "u"
    else:
        values = getattr(dist, args.action)(inputs)
        col = "x"
    rows = [[float(i), float(v)] for i, v in zip(inputs, np.atleast_1d(values))]
    return params, {"table": Table([col, args.action], rows)}, []


def cmd_moments(args):
    tol = default_tolerance()
    params = {"betas": args.betas, "kmax": args.kmax, "compare": args.compare}
    if args.kmax < 1:
        raise ValueError("--kmax must be >= 1")
    cols = ["beta", "k", "moment", "rounded", "log_moment", "overflow"]
    if args.compare:
        cols += ["dm1_path", "dm1_rel_diff", "quadrature", "discrepancy", "rel_discrepancy"]
    rows, diags = [], []
    for beta in args.betas:
        if not beta > 0:
            raise ValueError(f"beta must be > 0, got {beta}")
        for k in range(1, args.kmax + 1):
            log_mu = moments.benini_log_moment(k, beta)
            try:
                mu = moments.benini_moment_closed(k, beta)
                overflow = False
            except OverflowError:
                mu, overflow = None, True
                diags.append(f"mu_{k}(beta={beta}) overflows; reported as log_moment only")
            row = [beta, k, mu, None if mu is None else round(mu, 2), log_mu, overflow]
            if args.compare:
                if overflow:
                    row += [None] * 5
                else:
                    d = moments.benini_moment_dm1(k, beta)
                    q = moments.moment_quadrature(Benini(beta), k, tol)
                    if not q.converged:
                        diags.append(f"quadrature for mu_{k}(beta={beta}) did not converge")
                    disc = abs(q.value - mu)
                    row += [d, abs(d - mu) / mu, q.value, disc, disc / mu]
            rows.append(row)
    return params, {"table": Table(cols, rows)}, diags


def cmd_stieltjes(args):
    tol = default_tolerance()
    params = {"beta": args.beta, "epsilon": args.epsilon, "kmax": args.kmax,
              "rtol": tol.relative, "points": args.points, "seed": args.seed}
    if not 0.0 <= args.epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {args.epsilon}")
    if not args.beta > 0:
        raise ValueError(f"beta must be > 0, got {args.beta}")
    member = stieltjes.StieltjesMember.build(args.beta, args.epsilon)
    diags = []
    if not math.isfinite(member.C):
        diags.append(f"C exceeds float range (ln C = {member.log_C:.6g}); the perturbation underflows")

    rows = []
    all_ok = True
    for rep in stieltjes.verify_moment_equality(args.beta, args.epsilon, args.kmax, tol):
        bound = max(1e-8 * rep.closed_form, 1e-9)
        ok = rep.discrepancy <= bound
        all_ok &= ok
        if not rep.quadrature.converged:
            raise ConvergenceError(f"moment quadrature of order {rep.k} did not converge")
        rows.append([rep.k, rep.closed_form, rep.quadrature.value, rep.discrepancy, bound, ok])

    rng = np.random.default_rng(args.seed)
    xs = 1.0 + 10.0 ** rng.uniform(-6.0, 12.0, args.points)
    dens = member.density(xs)
    osc = []
    for n in range(args.kmax + 1):
        q = stieltjes.oscillatory_integral_quadrature(n)
        scale = stieltjes.oscillatory_scale(n)
        osc.append({"n": n, "value": q.value, "scale": scale, "relative": abs(q.value) / scale,
                    "ok": abs(q.value) <= 1e-9 * scale})
    results = {
        "log_C": member.log_C,
        "C": member.C,
        "argmax": member.argmax,
        "all_moments_match": all_ok,
        "nonnegativity": {"points": args.points, "min_density": float(dens.min()),
                          "negative_count": int(np.sum(dens < 0))},
        "oscillatory_zero_checks": osc,
        "table": Table(["k", "closed_form", "quadrature", "discrepancy", "tolerance", "ok"], rows),
    }
    return params, results, diags


def cmd_criteria(args):
    dist = _family(args)
    params = {"family": dist.family, **dist.params(), "K": args.K}
    rep = determinacy.criteria_report(dist, K=args.K)
    results = {
        "verdict": rep.verdict,
        "indeterminate": rep.indeterminate,
        "moments_finite": rep.moments_finite,
        "justification": rep.justification,
    }
    diags = []
    if rep.moments_finite:
        results.update({
            "carleman_partial_sum": rep.carleman_partial_sums[-1][1],
            "carleman_tail_bound": rep.carleman_tail_bound,
            "carleman_term_bound_ok": rep.carleman_term_bound_ok,
            "krein_converged": rep.krein_converged,
            "krein_trace": [list(p) for p in rep.krein_trace],
            "convexity_min_second_difference": rep.convexity_min_second_difference,
            "convexity_analytic_ok": rep.convexity_analytic_ok,
            "table": Table(["K", "carleman_partial_sum"], [list(p) for p in rep.carleman_partial_sums]),
        })
    if isinstance(dist, LogWeibull) and dist.a <= 1:
        diags.append("log-Weibull with a <= 1 has infinite moments; no moment problem to decide")
    if isinstance(dist, GenBenini) and not rep.moments_finite:
        diags.append("generalized Benini with only a linear term: not all moments exist")
    return params, results, diags


def cmd_fit(args):
    try:
        data = fitting.load_csv(args.input)
    except OSError as exc:
        raise fitting.DataError(f"cannot read {args.input}: {exc.strerror or exc}") from None
    params = {"input": str(args.input), "model": args.model, "degree": args.degree, "n": len(data)}
    fit = fitting.fit_model(data, args.model, args.degree)
    max_deg = max(args.degree or 2, 2)
    rows = []
    for k in range(1, max_deg + 1):
        try:
            f = fitting.fit_log_survival_polynomial(data, k)
        except fitting.DataError:
            continue
        rows.append([k, f.model, f.rss, *f.coefficients[:3], f.feasible])
    results = {"fit": fit.as_dict(),
               "table": Table(["degree", "model", "rss", "a0", "a1", "a2", "feasible"], rows)}
    diags = [] if fit.feasible else ["fitted coefficients violate a_j >= 0; fit flagged infeasible"]
    if args.model == "benini2" or args.mle:
        sigma, beta = fitting.mle_benini2(data)
        results["mle_benini2"] = {"sigma": sigma, "beta": beta}
    return params, results, diags


# -- output ------------------------------------------------------------------

def _fmt_json(obj, indent=0):
    pad = "  " * indent
    if isinstance(obj, Table):
        obj = obj.as_json()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {_fmt_json(str(k))}: {_fmt_json(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, Table)) for v in obj):
            return "[" + ", ".join(_fmt_json(v) for v in obj) + "]"
        items = [f"{pad}  {_fmt_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return format(v, ".17g") if math.isfinite(v) else "null"
    return json.dumps(str(obj))


def _cell(v, digits):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format(float(v), f".{digits}g")
    return str(v)


def render(envelope: dict, fmt: str) -> str:
    if fmt == "json":
        return _fmt_json(envelope) + "\n"
    results = envelope["results"]
    table = results.get("table")
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        if table is not None:
            w.writerow(table.columns)
            for r in table.rows:
                w.writerow([_cell(v, 17) for v in r])
        else:
            w.writerow(["key", "value"])
            for k, v in results.items():
                w.writerow([k, _cell(v, 17)])
        return buf.getvalue()
    # human-readable table
    for k, v in results.items():
        if k != "table" and not isinstance(v, (list, dict)):
            buf.write(f"{k}: {_cell(v, 6)}\n")
    if table is not None:
        cells = [[("%.2f" % v) if c == "rounded" and v is not None else _cell(v, 6)
                  for c, v in zip(table.columns, r)] for r in table.rows]
        widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(table.columns)]
        buf.write("  ".join(c.rjust(w) for c, w in zip(table.columns, widths)) + "\n")
        for r in cells:
            buf.write("  ".join(v.rjust(w) for v, w in zip(r, widths)) + "\n")
    for d in envelope["diagnostics"]:
        buf.write(f"warning: {d}\n")
    return buf.getvalue()


# -- argument parser ---------------------------------------------------------

def _family_options(p):
    p.add_argument("family", choices=["pareto", "benini", "benini3", "genbenini", "logweibull"])
    p.add_argument("--alpha", type=_number)
    p.add_argument("--beta", type=_number)
    p.add_argument("--sigma", type=_number, default=1.0)
    p.add_argument("--coeffs", type=_number_list, help="a_1,...,a_k for genbenini")
    p.add_argument("--a", type=_number, help="log-Weibull shape")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="benini", description=__doc__.split("\n\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv", "table"], default="json")
    common.add_argument("--out", help="write output to this path instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", parents=[common], help="evaluate pdf/cdf/sf/quantile or sample")
    _family_options(p)
    p.add_argument("action", choices=["pdf", "cdf", "sf", "quantile", "sample"])
    p.add_argument("--x", type=_number_list, help="comma-separated inputs (u for quantile)")
    p.add_argument("--grid", help="start:stop:count")
    p.add_argument("--log-grid", action="store_true", help="geometric grid spacing")
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("moments", parents=[common], help="Benini moment table")
    p.add_argument("--betas", type=_number_list, default=[2.0, 1.0, 0.5])
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--compare", action="store_true", help="add D_-1 path and quadrature columns")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("stieltjes", parents=[common], help="verify the equal-moment class")
    p.add_argument("--beta", type=_number, default=1.0)
    p.add_argument("--epsilon", type=_number, default=1.0)
    p.add_argument("--kmax", type=int, default=6)
    p.add_argument("--points", type=int, default=100_000, help="random points for the nonnegativity check")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_stieltjes)

    p = sub.add_parser("criteria", parents=[common], help="Carleman / Krein / Pakes report")
    _family_options(p)
    p.add_argument("--K", type=int, default=50, help="number of Carleman terms")
    p.set_defaults(func=cmd_criteria)

    p = sub.add_parser("fit", parents=[common], help="log-survival regression on a CSV of incomes")
    p.add_argument("--input", required=True)
    p.add_argument("--model", choices=["pareto", "benini2", "benini3", "genbenini"], default="benini3")
    p.add_argument("--degree", type=int)
    p.add_argument("--mle", action="store_true", help="also report the Benini maximum likelihood fit")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        params, results, diags = args.func(args)
    except fitting.DataError as exc:
        print(f"benini {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConvergenceError as exc:
        print(f"benini {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"benini {args.command}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    envelope = {"command": args.command, "parameters": params, "results": results, "diagnostics": diags}
    text = render(envelope, args.format)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"benini: cannot write {args.out}: {exc.strerror or exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
