"""Command-line front end: ``anticonc <subcommand> [options]``.

Every report is deterministic for a fixed configuration and seed and embeds
the configuration that produced it.  Exit codes: 0 success, 1 bad input,
2 a bound hypothesis or parameter precondition fails.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds as bd
from .applications import booleanfn as bf
from .applications import graphs as gr
from .distributions import DistributionSpec, expectation, variance
from .errors import AntiConcError, BudgetExceeded, HypothesisViolated, InputError
from .poly import constant_poly, influences, load_poly, make_poly
from .regularity import (
    TreeParams,
    build_full_tree,
    critical_index,
    leaf_class_probabilities,
    rank,
    sample_tree_paths,
)
from .smallball import DEFAULT_CAP, distribution, interval_prob, levy_concentration, mode_prob

DEFAULT_SEED = 20240601


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _finite(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, (np.floating, np.integer)):
        return _finite(x.item())
    if isinstance(x, dict):
        return {str(k): _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    return x


def run_config(args) -> dict:
    skip = {"func", "command"}
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return {"subcommand": args.command, **cfg}


# helpers ----------------------------------------------------------------------


def _dist_for(P, args) -> DistributionSpec:
    if P.domain == "zero_one":
        if args.p is None:
            raise InputError("a {0,1} polynomial needs --p")
        return DistributionSpec.biased(P.n_vars, args.p)
    return DistributionSpec.rademacher(P.n_vars)


def _poly(args):
    try:
        return load_poly(args.poly)
    except OSError as exc:
        raise InputError(f"cannot read {args.poly}: {exc.strerror}") from None


def _hist(P, args, dist):
    return distribution(P, dist, args.method, args.samples, args.seed, args.cap, args.threads)


def _rank_json(P, budget):
    res = rank(P, exact=True, budget=budget)
    return res.to_json(), res


def _table(rows, columns):
    return {"columns": columns, "rows": [[r.get(c) for c in columns] for r in rows]}


# subcommands -----------------------------------------------------------------------


def cmd_analyze(args):
    P = _poly(args)
    dist = _dist_for(P, args)
    out = {
        "n": P.n_vars,
        "domain": P.domain,
        "degree": P.degree,
        "terms": len(P.terms),
        "mean": expectation(P, dist),
        "variance": variance(P, dist),
        "influences": influences(P, dist if dist.kind == "biased" else None).tolist(),
    }
    if P.is_constant():
        out["note"] = "constant polynomial: critical index and rank undefined"
        return out
    out["critical_index"] = critical_index(P, args.tau)
    out.update(_rank_json(P, args.budget)[0])
    return out


def cmd_tree(args):
    P = _poly(args)
    params = TreeParams(args.tau, args.beta, args.M, args.C, args.C_prime)
    d = P.degree
    out = {
        "alpha": params.alpha(d) if d else None,
        "tau_prime": params.tau_prime(d) if d else None,
        "max_depth": params.max_depth(d) if d else None,
        "bad_leaf_bound": params.bad_leaf_bound(d),
    }
    if args.full:
        tree = build_full_tree(P, params, args.depth_cap, strict=not args.no_strict)
        out["leaf_probabilities"] = leaf_class_probabilities(tree)
        out["tree"] = tree.dump()
        return out
    reports = sample_tree_paths(P, params, args.paths, args.seed, strict=not args.no_strict)
    counts = {"Regular": 0, "Tight": 0, "Bad": 0}
    for r in reports:
        counts[r.leaf_class] += 1
    out["leaf_counts"] = counts
    out["bad_frequency"] = counts["Bad"] / len(reports)
    out["paths"] = [r.to_json() for r in reports[: args.show]]
    return out


def cmd_smallball(args):
    P = _poly(args)
    dist = _dist_for(P, args)
    hist = _hist(P, args, dist)
    out = {"method": hist.method, "support_size": len(hist.values)}
    if args.interval:
        a, b = args.interval
        out["interval"] = {"a": a, "b": b, **interval_prob(hist, a=a, length=b - a).to_json()}
    out["levy"] = [{"length": L, **levy_concentration(hist, length=L).to_json()} for L in args.levy]
    out["mode"] = mode_prob(hist).to_json()
    if args.format == "csv":
        return {"_csv": hist.to_csv()}
    out["histogram"] = [[float(v), float(m)] for v, m in zip(hist.values, hist.masses)]
    return out


def cmd_bounds(args):
    inputs = {k: getattr(args, k) for k in ("r", "m", "d", "p", "eps", "var", "tau", "alpha_len")}
    inputs["envelope"] = not args.raw
    rep = bd.evaluate_bound(args.name, args.B, **inputs)
    out = rep.to_json()
    if not rep.hypothesis_ok:
        out["_exit"] = 2
    return out


def _top_heavy_count(P):
    d = P.degree
    return sum(1 for s, a in P.terms.items() if len(s) == d and abs(a) >= 1)


def compare_rows(P, dist, measured, levy, B, budget):
    """Measured probability against every bound that applies to ``P``."""
    d = P.degree
    res = rank(P, exact=True, budget=budget)
    r = res.exact_rank if res.exact_rank is not None else res.greedy_rank
    var = variance(P, dist)
    asks = [("main", {"r": r, "d": d})]
    if dist.kind == "biased":
        asks.append(("biased", {"r": r, "d": d, "p": dist.p}))
    asks += [
        ("rv", {"r": r, "d": d}),
        ("ctv", {"m": _top_heavy_count(P), "d": d}),
    ]
    if var > 0:
        asks.append(("carbery_wright", {"eps": None, "d": d, "var": var}))
    rows = []
    for name, kw in asks:
        rep = bd.evaluate_bound(name, B, **kw)
        rows.append({
            "bound": name,
            "measured": measured,
            "levy": levy,
            "value": rep.value,
            "raw": rep.raw,
            "vacuous": rep.vacuous,
            "hypothesis_ok": rep.hypothesis_ok,
            "dominates": rep.value >= levy,
        })
    return rows, r


def cmd_compare(args):
    P = _poly(args)
    if P.is_constant():
        raise InputError("compare needs a non-constant polynomial")
    dist = _dist_for(P, args)
    hist = _hist(P, args, dist)
    a, b = args.interval
    measured = interval_prob(hist, a=a, length=b - a).value
    levy = hist.levy(b - a)
    rows, r = compare_rows(P, dist, measured, levy, args.B, args.budget)
    cols = ["bound", "measured", "levy", "value", "raw", "vacuous", "hypothesis_ok", "dominates"]
    if args.format == "csv":
        return {"_rows": (cols, rows)}
    return {"rank": r, "degree": P.degree, "table": _table(rows, cols)}


def _host(spec: str) -> gr.GraphSpec:
    if spec[:1] in "KC" and spec[1:].isdigit():
        n = int(spec[1:])
        return gr.GraphSpec.complete(n) if spec[0] == "K" else gr.GraphSpec.cycle(n)
    try:
        return gr.GraphSpec.load(spec)
    except OSError as exc:
        raise InputError(f"host {spec!r} is neither K<n>, C<n> nor a readable file: {exc.strerror}") from None


def cmd_graphs(args):
    G = _host(args.host)
    H = gr.PatternSpec.named(args.pattern)
    P = gr.count_polynomial(H, G)
    greedy = gr.packing_rank(H, G, "greedy")
    try:
        exact = gr.packing_rank(H, G, "exact", args.budget)
    except BudgetExceeded:
        exact = None
    hist = gr.subgraph_count_histogram(H, G, args.p, args.method, args.samples, args.seed, args.cap, args.threads)
    mode = mode_prob(hist)
    r = exact if exact is not None else greedy
    rep = bd.evaluate_bound("biased", args.B, r=r, d=H.n_edges, p=args.p)
    out = {
        "host": G.name,
        "pattern": H.name,
        "edges": G.n_edges,
        "copies": len(P.terms),
        "packing_rank_greedy": greedy,
        "packing_rank_exact": exact,
        "mode": mode.to_json(),
        "bound": rep.to_json(),
        "dominates": rep.value >= mode.value,
    }
    if args.format == "csv":
        return {"_csv": hist.to_csv()}
    out["histogram"] = [[float(v), float(m)] for v, m in zip(hist.values, hist.masses)]
    return out


def cmd_parity(args):
    if args.poly:
        P = _poly(args)
    elif args.builtin == "parity":
        P = bf.parity_polynomial(args.n)
    elif args.builtin == "x1":
        P = make_poly(args.n, [((1,), 1.0)], "zero_one")
    else:
        P = constant_poly(args.n, 0.0, "zero_one")
    return {"n": P.n_vars, "correlation": bf.parity_correlation(P, args.cap)}


def cmd_ordist(args):
    params = bf.OrDistParams(args.n, args.a)
    if args.poly:
        P = _poly(args)
    elif args.builtin == "or":
        P = bf.or_polynomial(args.n)
    else:
        P = constant_poly(args.n, 1.0 if args.builtin == "one" else 0.0, "zero_one")
    est = bf.or_agreement(P, params, args.samples, args.seed)
    return {
        "params": params.to_json(),
        "or_zero_probability": bf.or_zero_probability(params),
        "agreement": est.to_json(),
    }


def cmd_calibrate(args):
    if args.poly:
        items = []
        for path in args.poly:
            args_one = argparse.Namespace(poly=path, p=args.p)
            P = _poly(args_one)
            items.append(bd.CorpusItem(P, _dist_for(P, args_one)))
    else:
        items = bd.random_corpus(args.corpus, args.corpus_seed)
    cal = bd.calibrate_B(items, args.bound, args.method)
    if args.format == "csv":
        rows = [{"instance": k, "needed_B": b} for k, b in enumerate(cal.needed)]
        return {"_rows": (["instance", "needed_B"], rows)}
    return cal.to_json()


# parser ---------------------------------------------------------------------------


def _seed(text: str) -> int:
    if text == "random":
        return int(np.random.SeedSequence().entropy % (1 << 64))
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer or 'random', got {text!r}") from None
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out")

    parser = _Parser(prog="anticonc", description="Anti-concentration toolkit for multilinear polynomials.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    def poly_opts(p, required=True):
        p.add_argument("--poly", required=required, help="polynomial JSON file")
        p.add_argument("--p", type=float, help="bias for {0,1} polynomials")

    def engine_opts(p):
        p.add_argument("--method", choices=("exact", "mc"), default="exact")
        p.add_argument("--samples", type=int)
        p.add_argument("--cap", type=int, default=DEFAULT_CAP)

    p = add("analyze", cmd_analyze, "degree, variance, influences, critical index, rank")
    poly_opts(p)
    p.add_argument("--tau", type=float, default=0.05)
    p.add_argument("--budget", type=int, default=200_000)

    p = add("tree", cmd_tree, "regularization tree paths or full tree")
    poly_opts(p)
    p.add_argument("--tau", type=float, default=0.05)
    p.add_argument("--beta", type=float, default=0.01)
    p.add_argument("--M", type=int, default=3)
    p.add_argument("--C", type=float, default=3.0)
    p.add_argument("--C-prime", dest="C_prime", type=float, default=3.0)
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--show", type=int, default=5, help="paths echoed in the report")
    p.add_argument("--full", action="store_true")
    p.add_argument("--depth-cap", type=int, default=20)
    p.add_argument("--no-strict", action="store_true", help="skip the M*alpha/tau <= n check")

    p = add("smallball", cmd_smallball, "value histogram, interval and Levy probabilities")
    poly_opts(p)
    engine_opts(p)
    p.add_argument("--interval", type=float, nargs=2, metavar=("A", "B"))
    p.add_argument("--levy", type=float, nargs="*", default=[1.0])

    p = add("bounds", cmd_bounds, "evaluate one bound formula")
    p.add_argument("--name", required=True, choices=bd.BOUND_NAMES)
    for k in ("r", "m", "p", "eps", "var", "tau"):
        p.add_argument(f"--{k}", type=float)
    p.add_argument("--alpha-len", dest="alpha_len", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--raw", action="store_true", help="raw formula instead of the monotone envelope")

    p = add("compare", cmd_compare, "measured probability against every applicable bound")
    poly_opts(p)
    engine_opts(p)
    p.add_argument("--interval", type=float, nargs=2, metavar=("A", "B"), default=[-0.5, 0.5])
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--budget", type=int, default=200_000)

    p = add("graphs", cmd_graphs, "subgraph-count pipeline on a host graph")
    p.add_argument("--host", required=True, help="K<n>, C<n>, or an edge-list / JSON file")
    p.add_argument("--pattern", default="triangle", choices=tuple(gr.PATTERNS))
    p.add_argument("--p", type=float, default=0.5)
    engine_opts(p)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--budget", type=int, default=200_000)

    p = add("parity", cmd_parity, "correlation with parity")
    p.add_argument("--poly")
    p.add_argument("--builtin", choices=("parity", "x1", "zero"), default="parity")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--cap", type=int, default=bf.PARITY_CAP)

    p = add("ordist", cmd_ordist, "agreement with OR under the hard distribution")
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--a", type=int, default=2)
    p.add_argument("--poly")
    p.add_argument("--builtin", choices=("zero", "one", "or"), default="zero")
    p.add_argument("--samples", type=int, default=100_000)

    p = add("calibrate", cmd_calibrate, "fit the constant B on a corpus")
    p.add_argument("--poly", nargs="*", help="corpus polynomial files (default: random corpus)")
    p.add_argument("--p", type=float)
    p.add_argument("--corpus", type=int, default=100)
    p.add_argument("--corpus-seed", dest="corpus_seed", type=int, default=1)
    p.add_argument("--bound", choices=("main", "biased", "rv"), default="main")
    p.add_argument("--method", choices=("root", "ratio"), default="root")
    return parser


def _render(result: dict, config: dict, fmt: str) -> str:
    if fmt == "csv":
        head = "# config: " + json.dumps(_finite(config), sort_keys=True) + "\n"
        if "_csv" in result:
            return head + result["_csv"]
        if "_rows" in result:
            cols, rows = result["_rows"]
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(cols)
            for r in rows:
                w.writerow([r.get(c) for c in cols])
            return head + buf.getvalue()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        flat = _finite(result)
        w.writerow(["key", "value"])
        for k in sorted(flat):
            w.writerow([k, json.dumps(flat[k], sort_keys=True) if isinstance(flat[k], (dict, list)) else flat[k]])
        return head + buf.getvalue()
    return json.dumps(_finite({"config": config, "result": result}), indent=2, sort_keys=True) + "\n"


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise InputError("missing subcommand; choose from analyze, tree, smallball, bounds, "
                             "compare, graphs, parity, ordist, calibrate")
        config = run_config(args)
        result = args.func(args)
        code = result.pop("_exit", 0)
        text = _render(result, config, args.format)
        if args.out:
            Path(args.out).write_text(text)
        else:
            stdout.write(text)
        if code:
            print(f"hypothesis violated: {result.get('note', '')}", file=stderr)
        return code
    except HypothesisViolated as exc:
        print(f"hypothesis violated: {exc}", file=stderr)
        return 2
    except (InputError, BudgetExceeded) as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    except AntiConcError as exc:
        print(f"error: {exc}", file=stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
