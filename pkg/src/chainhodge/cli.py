"""Command-line interface: ``chainhodge {trees,cotrees,boltzmann,verify,explore}``.

Exit codes: 0 success, 1 a requested verification failed, 2 unreadable or
invalid input, 3 a computation refused its input (budget, cycle, ...).
Every nonzero exit prints a JSON object describing the failure on stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import numpy as np

from . import fileformat
from .complex_model import boundary_lattice, homology
from .errors import ChainHodgeError, NotATreeComplex, NotPseudoRegular, ParseError, WrongDimension
from .forests import DEFAULT_BUDGET, dualize, forest_weights
from .hodge import (
    boltzmann_distribution,
    boltzmann_oracle,
    cotree_projection,
    kirchhoff_boltzmann,
    kirchhoff_projection,
    mp_pseudoinverse_oracle,
    relative_error,
)
from .matrix_tree import verify_lemma_final, verify_matrix_tree
from .process import compare_stationary_d1, explore

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_COMPUTE = 0, 1, 2, 3
ALL_CHECKS = ("matrix-tree", "matrix-tree-gauged", "duality", "oracle", "lemma", "stationary")


class CheckFailed(Exception):
    def __init__(self, payload):
        super().__init__("verification failed")
        self.payload = payload


# ---------------------------------------------------------------------------
# Input handling
# ---------------------------------------------------------------------------

def _energy_arg(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected cell=value, got {text!r}")
    cell, value = text.split("=", 1)
    try:
        return cell, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value in {text!r}") from None


def _common(p: argparse.ArgumentParser):
    src = p.add_argument_group("input")
    src.add_argument("file", nargs="?", help="complex document (JSON)")
    src.add_argument("--example", help="use a bundled example instead of a file")
    src.add_argument("--degree", type=int, help="degree d (default: the document's)")
    sc = p.add_argument_group("scalars")
    sc.add_argument("--beta", type=float, help="inverse temperature")
    sc.add_argument("--energy", nargs=2, action="append", default=[], metavar=("K", "CELL=VALUE"),
                    help="override the energy of one k-cell; repeatable")
    sc.add_argument("--legacy-d1-rates", action="store_true",
                    help="read the document's W map on (d-1)-cells and E map on d-cells")
    p.add_argument("--mode", choices=("auto", "exact", "float"), default="auto",
                   help="exact rationals (zero energies only) or floats")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                   help="node budget for forest enumeration")
    out = p.add_mutually_exclusive_group()
    out.add_argument("--json", action="store_true", help="machine-readable JSON output")
    out.add_argument("--csv", action="store_true", help="CSV of the main table")


def _load(args):
    if args.example and args.file:
        raise ParseError("give either a file or --example, not both")
    if args.example:
        cf = fileformat.load_bundled(args.example)
    elif args.file:
        try:
            cf = fileformat.load(args.file)
        except OSError as exc:
            raise ParseError(f"cannot read {args.file}: {exc}") from exc
    else:
        raise ParseError("no input: pass a file or --example NAME")
    if args.degree is not None:
        cf.complex.check_degree(args.degree)
        cf.degree = args.degree
    overrides = {}
    for k, item in args.energy:
        try:
            k = int(k)
        except ValueError:
            raise ParseError(f"--energy degree must be an integer, got {k!r}") from None
        cell, value = _energy_arg(item)
        if cell not in cf.complex.cells(k):
            raise ParseError(f"--energy: unknown {k}-cell {cell!r}")
        overrides.setdefault(k, {})[cell] = value
    s = cf.scalars(args.legacy_d1_rates, args.beta, overrides)
    c, d = cf.complex, cf.degree
    zero = s.is_zero(c, d) and s.is_zero(c, d - 1)
    if args.mode == "exact" and not zero:
        raise ParseError("--mode exact needs all energies on (d-1)- and d-cells to be zero")
    return cf, s, args.mode != "float" and zero


def _num(x, exact=True):
    if isinstance(x, Fraction):
        if not exact:
            return float(x)
        return str(x) if x.denominator != 1 else x.numerator
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def _emit(args, header, rows, extra=None, title=""):
    if args.json:
        doc = dict(extra or {})
        doc["columns"] = header
        doc["rows"] = rows
        print(json.dumps(doc, indent=2, default=str))
    elif args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        sys.stdout.write(buf.getvalue())
    else:
        if title:
            print(title)
        for k, v in (extra or {}).items():
            print(f"{k}: {v}")
        cells = [header] + [[str(x) for x in r] for r in rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
        for r in cells:
            print("  ".join(x.ljust(wd) for x, wd in zip(r, widths)).rstrip())


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_trees(args):
    cf, s, exact = _load(args)
    c, d = cf.complex, cf.degree
    fw = forest_weights(c, d, s, args.budget)
    probs = fw.tree_probabilities() if exact else np.exp(fw.log_tree - fw.log_delta)
    w = [t.theta ** 2 for t in fw.trees] if exact else list(np.exp(fw.log_tree))
    rows = [[" ".join(t.cells) or "-", t.theta, _num(wi, exact), _num(p, exact)]
            for t, wi, p in zip(fw.trees, w, probs)]
    _emit(args, ["tree", "theta", "weight", "probability"], rows,
          {"degree": d, "count": len(rows)}, f"{len(rows)} spanning trees in degree {d}")
    return EXIT_OK


def cmd_cotrees(args):
    cf, s, exact = _load(args)
    c, d = cf.complex, cf.degree
    fw = forest_weights(c, d, s, args.budget)
    probs = fw.cotree_probabilities() if exact else np.exp(fw.log_cotree - fw.log_nabla)
    w = [L.a ** 2 for L in fw.cotrees] if exact else list(np.exp(fw.log_cotree))
    rows = [[" ".join(L.cells) or "-", L.a, _num(wi, exact), _num(p, exact)]
            for L, wi, p in zip(fw.cotrees, w, probs)]
    _emit(args, ["cotree", "a", "weight", "probability"], rows,
          {"degree": d, "count": len(rows)}, f"{len(rows)} spanning co-trees in degree {d}")
    return EXIT_OK


def _cycle(args, cf):
    if args.chain:
        coeffs = {}
        for item in args.chain:
            cell, _, v = item.partition("=")
            try:
                coeffs[cell] = int(v)
            except ValueError:
                raise ParseError(f"--chain expects cell=integer, got {item!r}") from None
        try:
            return cf.complex.chain(cf.degree - 1, coeffs)
        except ChainHodgeError as exc:
            raise ParseError(str(exc)) from exc
        except KeyError as exc:
            raise ParseError(f"unknown cell in --chain: {exc}") from None
    if args.cycle:
        return cf.cycle(args.cycle)
    if len(cf.cycles) == 1:
        return cf.cycle(next(iter(cf.cycles)))
    raise ParseError("choose a cycle with --cycle NAME or --chain cell=n ...")


def cmd_boltzmann(args):
    cf, s, exact = _load(args)
    c, d = cf.complex, cf.degree
    x = _cycle(args, cf)
    res = boltzmann_distribution(c, d, s, x, args.budget)
    values = res.cycle_exact if (exact and res.cycle_exact is not None) else res.cycle
    rows = [[name, xi, _num(v, exact)] for name, xi, v in zip(c.cells(d - 1), x, values)]
    extra = {"degree": d, "beta": s.beta, "exact": exact and res.exact}
    if res.degenerate:
        extra["note"] = res.note
    if args.certificate:
        extra["certificate"] = [
            {"cotree": list(cells), "probability": _num(p, exact),
             "representative": [_num(v) for v in vec]}
            for cells, p, vec in res.terms
        ]
    _emit(args, ["cell", "input", "rho"], rows, extra, "co-closed representative")
    return EXIT_OK


def _check_matrix_tree(c, d, s, args, gauged):
    rep = verify_matrix_tree(c, d, s, args.budget, 2.0 if args.inject_fault else 1.0)
    err = rep.rel_error_gauged if gauged else rep.rel_error_stated
    rhs = rep.rhs_gauged if gauged else rep.rhs_stated
    ok = (rep.lhs == rhs) if rep.exact else err <= args.tol
    return ok, {"det": _num(rep.lhs), "forest_side": _num(rhs), "rel_error": err,
                "theta_x": rep.theta_x, "exact": rep.exact}


def _check_duality(c, d, s, args):
    pairs = dualize(c, d, args.budget)
    ok = sorted(p.tree.theta for p in pairs) == sorted(p.dual_cotree.a for p in pairs)
    return ok, {"pairs": len(pairs)}


def _check_oracle(c, d, s, args):
    dd = c.boundary(d)
    W, E = s.values(c, d), s.values(c, d - 1)
    mu, nu = np.exp(s.beta * W), np.exp(s.beta * E)
    orc = mp_pseudoinverse_oracle(dd, mu, nu, general=True)
    kb = kirchhoff_boltzmann(c, d, s, retain=False, budget=args.budget).as_float()
    D = dd.to_numpy()
    errs = {
        "kirchhoff_boltzmann": relative_error(kb, orc),
        "A_d_A": relative_error(kb @ D @ kb, kb),
        "d_A_d": relative_error(D @ kb @ D, D),
    }
    G, K = boundary_lattice(c, d)
    if G.ncols:
        kp = kirchhoff_projection(c, d, s, retain=False, budget=args.budget).as_float()
        cp = cotree_projection(c, d, s, retain=False, budget=args.budget).as_float()
        errs["kirchhoff_projection"] = relative_error(kp, mp_pseudoinverse_oracle(K, mu))
        errs["cotree_projection"] = relative_error(cp, mp_pseudoinverse_oracle(G, target_weights=nu))
    h = homology(c, d - 1)
    if h.betti:
        x = [int(v) for v in h.free_generators.column(0)]
        rho = boltzmann_distribution(c, d, s, x, args.budget).cycle
        errs["boltzmann"] = relative_error(rho, boltzmann_oracle(c, d, s, x))
    return all(e <= args.tol for e in errs.values()), {"rel_errors": errs}


def _check_lemma(c, d, s, args):
    rep = verify_lemma_final(c, d, args.budget)
    return rep.ok, {"checks": rep.checks, "mu_x": rep.mu_x, "det": _num(rep.det_laplacian)}


def _check_stationary(c, d, s, args):
    if d != 1 or c.dim != 1:
        raise WrongDimension("stationarity applies to graphs at d = 1")
    cmp_ = compare_stationary_d1(c, s)
    return cmp_.max_rel_error <= args.tol, {"rel_error": cmp_.max_rel_error}


CHECKS = {
    "matrix-tree": lambda c, d, s, a: _check_matrix_tree(c, d, s, a, False),
    "matrix-tree-gauged": lambda c, d, s, a: _check_matrix_tree(c, d, s, a, True),
    "duality": _check_duality,
    "oracle": _check_oracle,
    "lemma": _check_lemma,
    "stationary": _check_stationary,
}


def cmd_verify(args):
    cf, s, _ = _load(args)
    c, d = cf.complex, cf.degree
    names = [n.strip() for n in args.checks.split(",") if n.strip()]
    if names == ["all"]:
        names = list(ALL_CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ParseError(f"unknown checks {unknown}; choose from {list(CHECKS)}")
    results, rows = {}, []
    for n in names:
        try:
            ok, detail = CHECKS[n](c, d, s, args)
            status = "pass" if ok else "fail"
        except (NotATreeComplex, NotPseudoRegular, WrongDimension) as exc:
            status, detail = "skip", {"reason": str(exc)}
        results[n] = {"status": status, **detail}
        rows.append([n, status, json.dumps(detail, default=str)])
    failed = [n for n, r in results.items() if r["status"] == "fail"]
    if failed:
        raise CheckFailed({"status": "fail", "command": "verify", "failed": failed,
                           "results": results})
    _emit(args, ["check", "status", "detail"], rows, {"degree": d}, "verification")
    return EXIT_OK


def cmd_explore(args):
    cf, s, _ = _load(args)
    c, d = cf.complex, cf.degree
    x = _cycle(args, cf)
    g = explore(c, d, x, s, args.max_vertices, args.max_depth)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(g.to_json())
    extra = {"degree": d, "vertices": len(g.vertices), "edges": len(g.edges),
             "truncated": g.truncated_by or False}
    if d == 1 and c.dim == 1 and all(sum(v) == 1 and min(v) >= 0 for v in g.vertices):
        extra["stationary_rel_error"] = compare_stationary_d1(c, s).max_rel_error
    names = c.cells(d - 1)
    rows = [[k, g.depth[k], " ".join(f"{v:+d}{n}" for v, n in zip(z, names) if v)]
            for k, z in enumerate(g.vertices)]
    _emit(args, ["id", "depth", "cycle"], rows, extra, "cycle-incidence graph")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chainhodge",
                                description="Spanning forests and Boltzmann splittings of chain complexes.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("trees", help="list spanning trees with theta and weights")
    _common(t)
    t.set_defaults(func=cmd_trees)

    ct = sub.add_parser("cotrees", help="list spanning co-trees with a_L and weights")
    _common(ct)
    ct.set_defaults(func=cmd_cotrees)

    b = sub.add_parser("boltzmann", help="co-closed representative of a cycle's class")
    _common(b)
    b.add_argument("--cycle", help="name of a cycle stored in the document")
    b.add_argument("--chain", nargs="+", metavar="CELL=N", help="integer cycle given inline")
    b.add_argument("--certificate", action="store_true", help="include per-co-tree terms")
    b.set_defaults(func=cmd_boltzmann)

    v = sub.add_parser("verify", help="run identity and oracle checks")
    _common(v)
    v.add_argument("--checks", default="matrix-tree,matrix-tree-gauged,duality,oracle,lemma",
                   help=f"comma-separated subset of {', '.join(ALL_CHECKS)}, or 'all'")
    v.add_argument("--tol", type=float, default=1e-9, help="relative tolerance for float checks")
    v.add_argument("--inject-fault", action="store_true",
                   help="double one tree weight (the matrix-tree checks must then fail)")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("explore", help="breadth-first cycle-incidence graph")
    _common(e)
    e.add_argument("--cycle", help="name of a cycle stored in the document")
    e.add_argument("--chain", nargs="+", metavar="CELL=N", help="integer cycle given inline")
    e.add_argument("--max-vertices", type=int, default=1000)
    e.add_argument("--max-depth", type=int)
    e.add_argument("--output", help="write the explored graph as JSON to this path")
    e.set_defaults(func=cmd_explore)
    return p


def _fail(code, payload):
    print(json.dumps(payload, indent=2, default=str))
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CheckFailed as exc:
        return _fail(EXIT_FAILED, exc.payload)
    except ParseError as exc:
        return _fail(EXIT_INPUT, {"status": "error", "error": "ParseError", "message": str(exc)})
    except ChainHodgeError as exc:
        payload = {"status": "error", "error": type(exc).__name__, "message": str(exc)}
        if getattr(exc, "violations", None):
            payload["violations"] = exc.violations
        return _fail(EXIT_COMPUTE, payload)


if __name__ == "__main__":
    sys.exit(main())
