"""Command line entry point: ``ccsmeasure <group> <command> [options]``.

Exit status is 0 on success, 2 when an input fails validation (a JSON
diagnostic goes to stderr) and 64 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import List, Optional

import numpy as np

from . import boundary as bd
from . import chirotope as ch
from . import circle_measure as cm
from . import empirical as em
from . import io
from . import ops_geometry as og
from . import randgen as rg

EXIT_VALIDATION = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


# -- small helpers ---------------------------------------------------------

def _floats(text: str) -> List[float]:
    try:
        return [float(eval_angle(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def eval_angle(token: str) -> float:
    """Parse a number, allowing ``pi`` multiples such as ``2pi`` or ``pi/2``."""
    t = token.strip().lower().replace(" ", "")
    if "pi" not in t:
        return float(t)
    num, _, den = t.partition("/")
    coef = num.replace("*", "").replace("pi", "")
    c = 1.0 if coef in ("", "+") else (-1.0 if coef == "-" else float(coef))
    return c * math.pi / (float(den) if den else 1.0)


def _emit(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
    else:
        io.write_text(text, path)


def _write_boundary(b: bd.ConvexBoundary, args):
    _emit(io.dump_json(io.boundary_to_json(b), None), args.out)
    if getattr(args, "svg", None):
        io.write_text(io.svg_polyline(b.vertices, closed=True), args.svg)


def _measure(path: str) -> cm.CircleMeasure:
    return io.read_measure(path)


# -- handlers --------------------------------------------------------------

def cmd_measure_fourier(args):
    fc = cm.fourier(_measure(args.input), args.K)
    rows = [(k, fc.alpha[k], fc.beta[k]) for k in range(fc.order + 1)]
    _emit(io.write_csv(["k", "alpha", "beta"], rows, None), args.out)


def cmd_measure_check(args):
    m = _measure(args.input)
    res = cm.resultant(m)
    info = {"kind": m.kind, "mass": m.total_mass, "resultant": [res.real, res.imag],
            "closed": cm.is_closed(m, args.tol), "atoms": int(m.angles.size), "cells": m.cells}
    _emit(io.dump_json(info, None), args.out)


def cmd_measure_make(args):
    obj = {"preset": args.preset}
    if args.m is not None:
        obj["m"] = args.m
    if args.cells is not None:
        obj["cells"] = args.cells
    if args.theta is not None:
        obj["theta"] = args.theta
    _emit(io.dump_json(io.measure_to_json(io.measure_from_json(obj)), None), args.out)


def cmd_boundary_build(args):
    _write_boundary(bd.boundary_from_measure(_measure(args.input), args.arc_subdiv), args)


def cmd_boundary_area(args):
    m = _measure(args.input)
    b = bd.boundary_from_measure(m, args.arc_subdiv)
    val, bound = bd.area_fourier(cm.fourier(m, args.K))
    out = {"shoelace": bd.area_shoelace(b), "fourier": val, "fourier_bound": bound,
           "exact": bd.area_exact(m), "perimeter": b.perimeter}
    if m.is_atomic:
        out["pairs"] = bd.area_pairs(m)
    _emit(io.dump_json(out, None), args.out)


def cmd_boundary_svg(args):
    b = bd.boundary_from_measure(_measure(args.input), args.arc_subdiv)
    _emit(io.svg_polyline(b.vertices, closed=True), args.out)


def cmd_op_minkowski(args):
    b1 = bd.boundary_from_measure(_measure(args.a), args.arc_subdiv).scaled(args.lam)
    b2 = bd.boundary_from_measure(_measure(args.b), args.arc_subdiv).scaled(1.0 - args.lam)
    _write_boundary(og.minkowski_sum(b1, b2), args)


def cmd_op_mixture(args):
    _write_boundary(og.mixture_ccs(args.lam, _measure(args.a), _measure(args.b), args.arc_subdiv), args)


def cmd_op_convolve(args):
    _write_boundary(og.convolve_ccs(_measure(args.a), _measure(args.b), args.arc_subdiv), args)


def cmd_op_sym_minkowski(args):
    m = og.minkowski_symmetrize(_measure(args.input), args.theta)
    _emit(io.dump_json(io.measure_to_json(m), None), args.out)


def cmd_op_sym_convolve(args):
    m = og.convolution_symmetrize(_measure(args.input))
    _emit(io.dump_json(io.measure_to_json(m), None), args.out)


def cmd_op_iterate_sym(args):
    rows = []
    m = _measure(args.input)
    for k in range(1, args.k + 1):
        _, d = og.iterate_dyadic_symmetrization(m, k, args.grid)
        rows.append((k, d, math.pi / 2 ** k))
    _emit(io.write_csv(["k", "distance", "bound"], rows, None), args.out)


def cmd_op_stable_limit(args):
    lim = og.classify_stable_limit(_measure(args.input), args.max_iter, args.tol)
    _emit(io.dump_json({"kind": lim.kind, "order": lim.order, "centering": lim.centering,
                        "label": str(lim)}, None), args.out)


def cmd_sample_converge(args):
    rows = em.convergence_experiment(_measure(args.measure), args.ns, args.replicas, args.seed)
    _emit(io.write_csv(["n", "replica", "d_hausdorff"], rows, None), args.out)


def cmd_sample_fdd(args):
    m = _measure(args.measure)
    cov = em.fdd_covariance(m, args.partition)
    header = ["i", "j", "cov"]
    mc = None
    if args.replicas:
        if args.seed is None or args.n is None:
            raise UsageError("--replicas needs --seed and --n")
        sims = em.fdd_monte_carlo(m, args.partition, args.n, args.replicas, args.seed)
        mc = np.cov(sims, rowvar=False)
        header.append("mc_cov")
    rows = []
    for i in range(cov.shape[0]):
        for j in range(cov.shape[1]):
            rows.append((i, j, cov[i, j]) + ((mc[i, j],) if mc is not None else ()))
    _emit(io.write_csv(header, rows, None), args.out)


def cmd_sample_curve(args):
    m = _measure(args.measure)
    x = em.sample_angles(m, args.n, seed=args.seed)
    thetas = np.linspace(0.0, cm.TWO_PI, args.points)
    w = em.fluctuation_process(m, x, thetas)
    _emit(io.write_csv(["theta", "re", "im"], zip(thetas, w[:, 0], w[:, 1]), None), args.out)
    if args.svg:
        io.write_text(io.svg_polyline(em.empirical_curve(x), closed=False), args.svg)


def _points_out(points, args):
    _emit(io.write_csv(["x", "y"], points, None), args.out)
    if getattr(args, "svg", None):
        io.write_text(io.svg_polyline(points, closed=False), args.svg)


def cmd_reorder_complex(args):
    s = io.sample_from_json(io.load_json(args.input))
    _points_out(em.reorder_complex(s, seed=args.seed), args)


def cmd_reorder_polygon(args):
    zs = io.points_from_json(io.load_json(args.input))
    _points_out(em.reorder_polygon(zs, seed=args.seed), args)


def cmd_reorder_k_operator(args):
    s = io.sample_from_json(io.load_json(args.input))
    _emit(io.dump_json(io.measure_to_json(em.k_operator(s, args.cells)), None), args.out)


def _density_out(d: rg.TrigDensity, args):
    m = rg.measure_from_density(d, args.cells)
    _emit(io.dump_json(io.measure_to_json(m, d), None), args.out)
    if args.svg:
        io.write_text(io.svg_polyline(bd.boundary_from_measure(m, 1).vertices), args.svg)


def cmd_generate_closed_first(args):
    _density_out(rg.gen_closed_first(args.K, args.seed), args)


def cmd_generate_sparse(args):
    _density_out(rg.gen_sparse(args.K, args.seed), args)


def cmd_generate_fixed_area(args):
    res = rg.gen_fixed_area(args.beta, args.K, args.seed, args.max_rejects)
    if args.stats:
        io.write_csv(["seed", "accepted", "rejects"], [(args.seed, res.accepted, res.rejects)], args.stats)
    if res.accepted:
        _density_out(res.density, args)
    else:
        _emit(io.write_csv(["seed", "accepted", "rejects"], [(args.seed, False, res.rejects)], None), args.out)


def cmd_chirotope_signs(args):
    pts = io.points_from_json(io.load_json(args.input))
    signs = ch.chirotope_signs(pts)
    out = {"signs": {f"{i},{j},{k}": s for (i, j, k), s in signs.items()},
           "convex_sequence": ch.is_convex_position(pts, "sequence"),
           "convex_hull": ch.is_convex_position(pts, "hull")}
    _emit(io.dump_json(out, None), args.out)


def cmd_chirotope_laplace_mc(args):
    if args.lambdas_file:
        lam = io.lambdas_from_json(io.load_json(args.lambdas_file))
    else:
        lam = io.lambdas_from_json(json.loads(args.lambdas))
    est, se = ch.mc_laplace(lam, args.n, args.replicas, args.seed)
    _emit(io.dump_json({"estimate": est, "stderr": se}, None), args.out)


def cmd_chirotope_laplace_n3(args):
    _emit(io.dump_json({"lambda": args.lam, "value": ch.laplace_n3(args.lam)}, None), args.out)


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ccsmeasure", description=__doc__.splitlines()[0])
    groups = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def cmd(group, name, func, help_text):
        sp = group.add_parser(name, help=help_text)
        sp.set_defaults(func=func)
        sp.add_argument("--out", help="output file (default: stdout)")
        return sp

    def sub(name, help_text):
        g = groups.add_parser(name, help=help_text)
        return g.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub("measure", "inspect and create measures")
    s = cmd(g, "fourier", cmd_measure_fourier, "Fourier coefficients as CSV")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--K", type=int, default=16)
    s = cmd(g, "check", cmd_measure_check, "mass and closedness")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--tol", type=float, default=1e-9)
    s = cmd(g, "make", cmd_measure_make, "write a preset measure")
    s.add_argument("--preset", required=True, choices=["mgon", "uniform", "segment", "dirac", "half_disc"])
    s.add_argument("--m", type=int)
    s.add_argument("--cells", type=int)
    s.add_argument("--theta", type=eval_angle)

    g = sub("boundary", "convex boundaries of measures")
    for name, func, h in [("build", cmd_boundary_build, "boundary JSON (and SVG)"),
                          ("area", cmd_boundary_area, "areas by several formulas"),
                          ("svg", cmd_boundary_svg, "SVG drawing")]:
        s = cmd(g, name, func, h)
        s.add_argument("--in", dest="input", required=True)
        s.add_argument("--arc-subdiv", type=int, default=bd.DEFAULT_ARC_SUBDIV)
        if name == "build":
            s.add_argument("--svg")
        if name == "area":
            s.add_argument("--K", type=int, default=512)

    g = sub("op", "operations on convex sets")
    for name, func, h in [("minkowski", cmd_op_minkowski, "edge-merge Minkowski sum lam A + (1-lam) B"),
                          ("mixture", cmd_op_mixture, "boundary of the mixture lam a + (1-lam) b"),
                          ("convolve", cmd_op_convolve, "boundary of the circular convolution")]:
        s = cmd(g, name, func, h)
        s.add_argument("--a", required=True)
        s.add_argument("--b", required=True)
        s.add_argument("--arc-subdiv", type=int, default=bd.DEFAULT_ARC_SUBDIV)
        s.add_argument("--svg")
        if name != "convolve":
            s.add_argument("--lam", type=float, default=0.5)
    s = cmd(g, "sym-minkowski", cmd_op_sym_minkowski, "Minkowski symmetrisation")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--theta", type=eval_angle, default=0.0)
    s = cmd(g, "sym-convolve", cmd_op_sym_convolve, "symmetrisation by convolution")
    s.add_argument("--in", dest="input", required=True)
    s = cmd(g, "iterate-sym", cmd_op_iterate_sym, "dyadic symmetrisation distances")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--k", type=int, default=10)
    s.add_argument("--grid", type=int, default=og.DYADIC_GRID)
    s = cmd(g, "stable-limit", cmd_op_stable_limit, "classify the stable limit")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--max-iter", type=int, default=256)
    s.add_argument("--tol", type=float, default=1e-9)

    g = sub("sample", "empirical curves and fluctuations")
    s = cmd(g, "converge", cmd_sample_converge, "Hausdorff distance table")
    s.add_argument("--measure", required=True)
    s.add_argument("--ns", type=_ints, required=True)
    s.add_argument("--replicas", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s = cmd(g, "fdd", cmd_sample_fdd, "limit covariance of the increments")
    s.add_argument("--measure", required=True)
    s.add_argument("--partition", type=_floats, required=True)
    s.add_argument("--replicas", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--seed", type=int)
    s = cmd(g, "curve", cmd_sample_curve, "fluctuation trace of one sample")
    s.add_argument("--measure", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--points", type=int, default=1025)
    s.add_argument("--svg")

    g = sub("reorder", "argument-sorted walks and the K operator")
    s = cmd(g, "complex", cmd_reorder_complex, "sorted partial sums of a sample")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--svg")
    s = cmd(g, "polygon", cmd_reorder_polygon, "convex polygon from cyclic differences")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--svg")
    s = cmd(g, "k-operator", cmd_reorder_k_operator, "modulus-weighted direction measure")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--cells", type=int, default=4096)

    g = sub("generate", "random smooth convex sets")
    for name, func in [("closed-first", cmd_generate_closed_first), ("sparse", cmd_generate_sparse),
                       ("fixed-area", cmd_generate_fixed_area)]:
        s = cmd(g, name, func, f"{name} generator")
        s.add_argument("--K", type=int, required=True)
        s.add_argument("--seed", type=int, required=True)
        s.add_argument("--cells", type=int, default=4096)
        s.add_argument("--svg")
        if name == "fixed-area":
            s.add_argument("--beta", type=float, required=True)
            s.add_argument("--max-rejects", type=int, default=10_000)
            s.add_argument("--stats", help="CSV file for seed,accepted,rejects")

    g = sub("chirotope", "orientation signs and the Gaussian area transform")
    s = cmd(g, "signs", cmd_chirotope_signs, "signs of all triples")
    s.add_argument("--in", dest="input", required=True)
    s = cmd(g, "laplace-mc", cmd_chirotope_laplace_mc, "Monte Carlo transform")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--lambdas", help='JSON such as {"0,1,2": 0.5}')
    src.add_argument("--lambdas-file")
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--replicas", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s = cmd(g, "laplace-n3", cmd_chirotope_laplace_n3, "closed form for three points")
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"ccsmeasure: error: {exc}\n")
        return EXIT_USAGE
    except io.ValidationError as exc:
        sys.stderr.write(json.dumps(exc.diagnostic()) + "\n")
        return EXIT_VALIDATION
    except (ValueError, ArithmeticError) as exc:
        diag = {"error": "validation", "path": "$", "kind": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(json.dumps(diag) + "\n")
        return EXIT_VALIDATION
    return 0


if __name__ == "__main__":
    sys.exit(main())
