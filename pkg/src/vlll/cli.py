"""Command-line front end.

Every command prints JSON (or CSV for sweeps) on stdout. Exit codes: 0 ok,
2 invalid input, 3 cap exceeded, 4 non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from typing import Optional, Sequence

import numpy as np

from .cycle import (cycle_boundary_for_bigraph, cycle_boundary_lambda, cycle_boundary_witness,
                    cycle_gapful_witness)
from .discrete import (SearchConfig, default_threads, exterior_membership, mup_bruteforce,
                       vlll_boundary_lambda_bruteforce)
from .errors import InvalidInputError, LLLError
from .gap import (GapConfig, classify_gap, classify_graph, h43_witness, numeric_gap_check,
                  small_exclusive_witness, variable_boundary)
from .graphs import (Bigraph, base_graph, bigraph_from_json, bigraph_to_json,
                     graph_from_json, make_canonical_bigraph, make_combinatorial_bigraph,
                     make_cycle_bigraph, make_hstar, make_upper_combinatorial, random_tree_bigraph)
from .numerics import parse_vector
from .shearer import abstract_boundary_lambda, shearer_values
from .tree import tree_boundary_lambda, tree_witness

DIGITS = 12
_EXACT_KEYS = {"partitions", "boxes"}     # emitted at full precision


def _round(obj, exact: bool = False):
    if isinstance(obj, float):
        if exact or not math.isfinite(obj):
            return obj
        return float(f"{obj:.{DIGITS}g}")
    if isinstance(obj, dict):
        return {k: _round(v, exact or k in _EXACT_KEYS) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v, exact) for v in obj]
    if isinstance(obj, (np.floating,)):
        return _round(float(obj), exact)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def emit(obj, out=None) -> None:
    out = out or sys.stdout
    json.dump(_round(obj), out, indent=2, sort_keys=False)
    out.write("\n")


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc


def _bigraph(args) -> Bigraph:
    if getattr(args, "bigraph", None):
        return bigraph_from_json(_load_json(args.bigraph))
    if getattr(args, "n", None):
        return make_cycle_bigraph(args.n)
    raise InvalidInputError("an instance is required (--bigraph or --n)")


def _graph(args):
    if getattr(args, "graph", None):
        return graph_from_json(_load_json(args.graph))
    return base_graph(_bigraph(args))


def _search(args) -> SearchConfig:
    kw = {"threads": default_threads()}
    for name in ("cells_cap", "starts", "tol", "seed", "polish", "node_budget"):
        val = getattr(args, name, None)
        if val is not None:
            kw[name] = val
    return SearchConfig(**kw)


# ---------------------------------------------------------------- commands

def cmd_generate(args) -> int:
    fam, par = args.family, args.params
    try:
        if fam == "cycle":
            h = make_cycle_bigraph(int(par[0]))
        elif fam == "comb":
            h = make_combinatorial_bigraph(int(par[0]), int(par[1]))
        elif fam == "upper-comb":
            h = make_upper_combinatorial(int(par[0]), int(par[1]))
        elif fam == "hstar":
            h = make_hstar()
        elif fam == "canonical-of":
            h = make_canonical_bigraph(graph_from_json(_load_json(par[0])))
        elif fam == "random-tree":
            h = random_tree_bigraph(int(par[0]), random.Random(args.seed))
        else:
            raise InvalidInputError(f"unknown family {fam!r}")
    except (IndexError, ValueError) as exc:
        if isinstance(exc, InvalidInputError):
            raise
        raise InvalidInputError(f"bad parameters for {fam}: {par}") from exc
    text = json.dumps(bigraph_to_json(h))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _boundary(method: str, args):
    d = parse_vector(args.dir)
    if method == "shearer":
        return abstract_boundary_lambda(_graph(args), d, tol=args.tol or 1e-10)
    if method == "cycle" and not args.bigraph:
        return cycle_boundary_lambda(d)
    h = _bigraph(args)
    if method == "auto":
        return variable_boundary(h, d, _search(args))
    if method == "tree":
        return tree_boundary_lambda(h, d)
    if method == "cycle":
        return cycle_boundary_for_bigraph(h, d)
    return vlll_boundary_lambda_bruteforce(h, d, _search(args))


def cmd_boundary(args) -> int:
    emit(_boundary(args.method, args).to_json())
    return 0


def cmd_shearer(args) -> int:
    g = _graph(args)
    p = parse_vector(args.p)
    rep = shearer_values(g, p)
    emit({"min_q": rep.min_value, "min_set": [v + 1 for v in rep.min_set],
          "interior": bool(rep.min_value > 0 and max(p) < 1), "q_empty": rep.q_empty,
          "sum": rep.total(), "independent_sets": len(rep.values)})
    return 0


def cmd_shearer_boundary(args) -> int:
    emit(abstract_boundary_lambda(_graph(args), parse_vector(args.dir)).to_json())
    return 0


def cmd_classify(args) -> int:
    if args.graph:
        emit(classify_graph(graph_from_json(_load_json(args.graph))).to_json())
        return 0
    h = _bigraph(args)
    out = classify_gap(h, GapConfig()).to_json()
    if args.numeric:
        rng = np.random.default_rng(args.seed)
        checks = []
        for _ in range(args.dirs):
            d = tuple(float(x) for x in rng.uniform(0.2, 1.0, h.n_events))
            r = numeric_gap_check(h, d, _search(args))
            checks.append({"direction": list(d), **r.to_json()})
        out["numeric"] = checks
    emit(out)
    return 0


def cmd_witness(args) -> int:
    m = args.method
    if m == "small-exclusive":
        cs = small_exclusive_witness(_bigraph(args))
    elif m == "h43":
        cs = h43_witness(parse_vector(args.p))
    elif m == "cycle-gapful":
        cs = cycle_gapful_witness(args.n)
    elif m == "cycle":
        d = parse_vector(args.dir)
        cs = cycle_boundary_witness(d, cycle_boundary_lambda(d))
    elif m == "tree":
        h = _bigraph(args)
        res = tree_boundary_lambda(h, parse_vector(args.dir))
        w = tree_witness(h, res.boundary_vector)
        emit({"lambda": res.lam, **w.to_json()})
        return 0
    else:
        raise InvalidInputError(f"unknown witness method {m!r}")
    emit(cs.to_json())
    return 0


def cmd_oracle(args) -> int:
    h = _bigraph(args)
    cfg = _search(args)
    if args.kind == "exterior":
        cert = exterior_membership(h, parse_vector(args.q), cfg)
        out = {"member": cert is not None}
        if cert is not None:
            out.update({"slack": list(cert.slack), "coverage_ok": cert.coverage_ok,
                        "cylinder_set": cert.cylinder_set.to_json()})
        emit(out)
    elif args.kind == "boundary":
        emit(vlll_boundary_lambda_bruteforce(h, parse_vector(args.dir), cfg).to_json())
    else:
        r = mup_bruteforce(h, parse_vector(args.p), cfg)
        emit({"value": r.value, "exclusive": r.exclusive, "margin": r.margin,
              "candidates": len(r.candidates), "measures": list(r.evaluation.measures),
              "cylinder_set": r.cylinder_set.to_json()})
    return 0


def cmd_sweep(args) -> int:
    h = _bigraph(args)
    rng = np.random.default_rng(args.seed)
    cfg = _search(args)
    rows = []
    for _ in range(args.count):
        d = tuple(float(f"{x:.6g}") for x in rng.uniform(0.2, 1.0, h.n_events))
        r = numeric_gap_check(h, d, cfg)
        rows.append((d, r.lambda_abstract, r.lambda_variable, r.lambda_variable - r.lambda_abstract, r.method))
    if args.format == "json":
        emit([{"direction": list(d), "lambda_abstract": a, "lambda_variable": v, "margin": m, "method": k}
              for d, a, v, m, k in rows])
        return 0
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["direction", "lambda_abstract", "lambda_variable", "margin", "method"])
    for d, a, v, m, k in rows:
        w.writerow([";".join(f"{x:.{DIGITS}g}" for x in d), f"{a:.{DIGITS}g}", f"{v:.{DIGITS}g}",
                    f"{m:.{DIGITS}g}", k])
    sys.stdout.write(buf.getvalue())
    return 0


# ---------------------------------------------------------------- parser

def _instance_flags(p, graph: bool = False) -> None:
    p.add_argument("--bigraph", help="bigraph JSON file")
    p.add_argument("--n", type=int, help="use the n-cycle bigraph H_n")
    if graph:
        p.add_argument("--graph", help="dependency graph JSON file")


def _search_flags(p) -> None:
    p.add_argument("--cells-cap", type=int)
    p.add_argument("--starts", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--polish", type=int)
    p.add_argument("--node-budget", type=int)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lll", description="Variable and abstract LLL boundaries.")
    parser.add_argument("--config", help="JSON file with default flag values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit a bigraph instance")
    p.add_argument("family", choices=["cycle", "comb", "upper-comb", "hstar", "canonical-of", "random-tree"])
    p.add_argument("params", nargs="*")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("boundary", help="boundary lambda along a direction")
    p.add_argument("--method", default="auto", choices=["auto", "shearer", "tree", "cycle", "discrete"])
    _instance_flags(p, graph=True)
    p.add_argument("--dir", required=True)
    _search_flags(p)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("shearer", help="Shearer values at a probability vector")
    _instance_flags(p, graph=True)
    p.add_argument("--p", required=True)
    p.set_defaults(func=cmd_shearer)

    p = sub.add_parser("shearer-boundary", help="abstract boundary along a direction")
    _instance_flags(p, graph=True)
    p.add_argument("--dir", required=True)
    p.set_defaults(func=cmd_shearer_boundary)

    p = sub.add_parser("classify", help="gap status of a bigraph or graph")
    _instance_flags(p, graph=True)
    p.add_argument("--numeric", action="store_true")
    p.add_argument("--dirs", type=int, default=5)
    _search_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("witness", help="explicit cylinder-set constructions")
    p.add_argument("--method", required=True, choices=["tree", "cycle", "cycle-gapful", "small-exclusive", "h43"])
    _instance_flags(p)
    p.add_argument("--dir")
    p.add_argument("--p")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("oracle", help="discrete brute force")
    p.add_argument("kind", choices=["exterior", "boundary", "mup"])
    _instance_flags(p)
    p.add_argument("--q")
    p.add_argument("--dir")
    p.add_argument("--p")
    _search_flags(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sweep", help="seeded batch of numeric gap checks")
    _instance_flags(p)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    _search_flags(p)
    p.set_defaults(func=cmd_sweep)
    parser.commands = sub
    return parser


def _parse(parser, argv):
    args = parser.parse_args(argv)
    if args.config:
        # config values act as defaults, so explicit flags still win
        conf = {k.replace("-", "_"): v for k, v in _load_json(args.config).items()}
        for sp in parser.commands.choices.values():
            sp.set_defaults(**conf)
        args = parser.parse_args(argv)
    return args


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = _parse(parser, argv)
        return args.func(args)
    except LLLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
