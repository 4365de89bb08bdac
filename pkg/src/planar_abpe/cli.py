"""Command-line front end: ``planar-abpe <command> --scene FILE ...``.

Commands
--------
cauchy      Cauchy transform of the scene measure at CSV points.
color       Run the dyadic coloring scheme and draw it as SVG.
classify    Light/heavy classification of CSV points.
abpe-scan   Grid scan of bounded point evaluations (SVG heatmap + JSON report).
sweep       Sweep the scene measure onto a disk or annulus boundary.
decompose   Split the scene measure into Delta_0 and abpe parts.

Point files are CSV with header ``re,im``.  Reports are JSON text with sorted
keys.  Exit status: 0 success, 2 invalid input, 3 decomposition failure,
4 resolution or window infeasible, 5 coloring run ended with an unbounded
green path.  The scene grammar is documented in :mod:`planar_abpe.scene`.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .abpe import decompose, default_basis, scan_abpe
from .cauchy import cauchy_transform
from .coloring import CauchyPhi, ConstantPhi, FunctionPhi, classify_point, run_scheme
from .errors import (DecompositionFailure, InvalidInputError, ResolutionError, ToolkitError,
                     UnsupportedDomainError, UnsupportedExponentError, WindowTooSmallError)
from .harmonic import annulus_domain, disk_domain, sweep
from .scene import Expression, Scene, _Cursor, _shape, _tokens, load_scene
from .shapes import Annulus
from .svg import coloring_svg, heatmap_svg

EXIT_OK, EXIT_INPUT, EXIT_DECOMPOSITION, EXIT_INFEASIBLE, EXIT_GREEN = 0, 2, 3, 4, 5


# --------------------------------------------------------------------------
# helpers

def read_points(path) -> np.ndarray:
    """Points from a CSV file with header ``re,im``."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InvalidInputError(f"cannot read points file: {exc.strerror}") from None
    if not rows or [c.strip() for c in rows[0]] != ["re", "im"]:
        raise InvalidInputError("points file must start with the header 're,im'")
    out = []
    for n, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise InvalidInputError(f"points file line {n}: expected two columns")
        try:
            z = complex(float(row[0]), float(row[1]))
        except ValueError:
            raise InvalidInputError(f"points file line {n}: malformed number") from None
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise InvalidInputError(f"points file line {n}: non-finite coordinate")
        out.append(z)
    return np.array(out, dtype=complex)


def _fmt(v: float) -> str:
    return repr(float(v))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _write(path, text: str, stdout):
    if path is None or path == "-":
        stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _complex_arg(s: str) -> complex:
    try:
        z = complex(s.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed complex number {s!r}") from None
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise argparse.ArgumentTypeError("complex number must be finite")
    return z


def _positive_float(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed number {s!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("value must be positive")
    return v


def _window(args, scene: Scene):
    if getattr(args, "window", None) is not None:
        x0, y0, x1, y1 = args.window
        if not (x1 > x0 and y1 > y0):
            raise InvalidInputError("window needs X0 < X1 and Y0 < Y1")
        return (x0, y0, x1, y1)
    return scene.window


def _parse_K(texts) -> tuple:
    out = []
    for t in texts:
        cur = _Cursor(_tokens(t, 0), 1, len(t) + 1)
        out.append(_shape(cur, ("disk", "annulus", "segment", "rectangle")))
        cur.done()
    return tuple(out)


def _phi(args, scene: Scene):
    kind = args.phi
    if kind == "scene":
        choice = scene.phi or ("cauchy",)
    elif kind == "cauchy":
        choice = ("cauchy",)
    elif kind == "constant":
        if args.value is None:
            raise InvalidInputError("--phi constant needs --value")
        choice = ("constant", args.value)
    else:
        if args.expr is None:
            raise InvalidInputError("--phi expr needs --expr")
        choice = ("expr", Expression(args.expr))
    if choice[0] == "cauchy":
        if not scene.components:
            raise InvalidInputError("--phi cauchy needs a scene measure")
        return CauchyPhi(scene.measure())
    if choice[0] == "constant":
        if choice[1] < 0:
            raise InvalidInputError("constant density must be nonnegative")
        return ConstantPhi(choice[1])
    expr = choice[1]
    return FunctionPhi(lambda z: np.real(expr(z)))


# --------------------------------------------------------------------------
# commands

def cmd_cauchy(args, scene, stdout):
    pts = read_points(args.points)
    mu = scene.measure()
    vals = cauchy_transform(mu, pts) if len(pts) else np.empty(0, complex)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im", "cauchy_re", "cauchy_im"])
    for z, v in zip(pts, np.atleast_1d(vals)):
        w.writerow([_fmt(z.real), _fmt(z.imag), _fmt(v.real), _fmt(v.imag)])
    _write(args.out, buf.getvalue(), stdout)
    return EXIT_OK


def cmd_color(args, scene, stdout):
    phi = _phi(args, scene)
    if args.k < 0 or args.gens < 1:
        raise InvalidInputError("need --k >= 0 and --gens >= 1")
    scheme = run_scheme(phi, args.a, args.k, args.gens, _window(args, scene))
    svg = coloring_svg(scheme.render_state(), scheme.window, scheme.seed)
    _write(args.out, svg, stdout)
    report = {
        "command": "color",
        "seed": scheme.seed,
        "k": scheme.k,
        "window": list(scheme.window),
        "generations": [{"generation": g.generation, "yellow": len(g.yellow),
                         "green": len(g.green), "red": len(g.red), "hull": len(g.hull),
                         "barrier_length": g.barrier.length if g.barrier is not None else 0.0}
                        for g in scheme.generations],
        "terminated_with_unbounded_green": scheme.terminated_with_unbounded_green,
    }
    if args.report:
        _write(args.report, dump_json(report), stdout)
    return EXIT_GREEN if scheme.terminated_with_unbounded_green else EXIT_OK


def cmd_classify(args, scene, stdout):
    pts = read_points(args.points)
    phi = _phi(args, scene)
    if args.k_max < 1 or args.gens < 1:
        raise InvalidInputError("need --k-max >= 1 and --gens >= 1")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im", "verdict", "confidence", "witness_radius", "witness_generation"])
    window = _window(args, scene)
    for z in pts:
        pc = classify_point(phi, z, k_max=args.k_max, generations=args.gens, window=window)
        w.writerow([_fmt(z.real), _fmt(z.imag), pc.verdict, pc.confidence,
                    _fmt(pc.witness[0]), pc.witness[1]])
    _write(args.out, buf.getvalue(), stdout)
    return EXIT_OK


def cmd_scan(args, scene, stdout):
    mu = scene.measure()
    if not mu.components:
        raise InvalidInputError("abpe-scan needs a scene measure")
    K = scene.K or None
    degree = args.degree or scene.degree
    holes = [s.center for s in scene.K if isinstance(s, Annulus)]
    basis = default_basis(mu, degree, holes)
    scan = scan_abpe(mu, basis, _window(args, scene), args.res, K=K)
    if args.out:
        _write(args.out, heatmap_svg(scan.xs, scan.ys, scan.values, scan.region), stdout)
    report = {
        "command": "abpe-scan",
        "resolution": args.res,
        "degree": degree,
        "window": [float(scan.xs[0]), float(scan.ys[0]), float(scan.xs[-1]), float(scan.ys[-1])],
        "grid": [len(scan.xs), len(scan.ys)],
        "convergent_points": int(scan.convergent.sum()),
        "divergent_points": int(scan.divergent.sum()),
        "component_count": len(scan.components),
        "components": [{"index": c.index, "cells": c.cells, "bbox": list(c.bbox),
                        "centroid": c.centroid, "connectivity": c.connectivity}
                       for c in scan.components],
    }
    _write(args.report, dump_json(report), stdout)
    return EXIT_OK


def cmd_sweep(args, scene, stdout):
    mu = scene.measure()
    if args.domain == "disk":
        domain = disk_domain(args.center, args.radius)
    else:
        if args.inner is None or args.outer is None:
            raise InvalidInputError("--domain annulus needs --inner and --outer")
        domain = annulus_domain(args.center, args.inner, args.outer)
    if args.n < 8 or args.n & (args.n - 1):
        raise InvalidInputError("--n must be a power of two >= 8")
    nu = sweep(mu, domain, n=args.n)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "circle", "theta", "re", "im", "value_re", "value_im"])
    for idx, (c, d) in enumerate(zip(nu.circles, nu.densities)):
        for t, z, v in zip(nu.angles, c.point(nu.angles), d):
            w.writerow(["density", idx, _fmt(t), _fmt(z.real), _fmt(z.imag),
                        _fmt(v.real), _fmt(v.imag)])
    for p, m in nu.atoms:
        w.writerow(["atom", "", "", _fmt(p.real), _fmt(p.imag), _fmt(m.real), _fmt(m.imag)])
    _write(args.out, buf.getvalue(), stdout)
    if args.report:
        report = {"command": "sweep", "n": nu.n,
                  "circle_mass": [nu.circle_mass(i) for i in range(len(nu.circles))],
                  "atom_mass": nu.atom_mass(), "total_mass": nu.total_mass(),
                  "variation": nu.variation()}
        _write(args.report, dump_json(report), stdout)
    return EXIT_OK


def _decomposition_text(rep: dict) -> str:
    lines = ["decomposition (heuristic, component granularity)",
             f"Delta_0: {', '.join(rep['delta0']) if rep['delta0'] else '(empty)'}"]
    for p in rep["parts"]:
        lines.append(f"Delta_{p['component']}: {', '.join(p['labels']) if p['labels'] else '(empty)'}"
                     f"  cells={p['cells']} connectivity={p['connectivity']}"
                     f" K-connectivity={p['k_connectivity']}"
                     f" closure_contains_support={p['closure_contains_support']}")
    return "\n".join(lines) + "\n"


def cmd_decompose(args, scene, stdout):
    mu = scene.measure()
    K = _parse_K(args.K) if args.K else scene.K
    if not K:
        raise InvalidInputError("decompose needs K (scene 'K:' lines or --K)")
    if not mu.components:
        raise InvalidInputError("decompose needs a scene measure")
    degree = args.degree or scene.degree
    try:
        dec = decompose(mu, K, degree=degree, resolution=args.res, window=_window(args, scene))
    except DecompositionFailure as exc:
        rep = dict(exc.report or {})
        rep["error"] = str(exc)
        if args.report:
            _write(args.report, dump_json(rep), stdout)
        raise
    rep = dec.report()
    stdout.write(_decomposition_text(rep))
    if args.report:
        _write(args.report, dump_json(rep), stdout)
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="planar-abpe",
                                description="Cauchy transforms, coloring schemes and bounded "
                                            "point evaluations for planar measures.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--scene", required=True, help="scene file")
        sp.add_argument("--out", default=None, help="output file (default stdout)")
        return sp

    def phi_opts(sp):
        sp.add_argument("--phi", choices=("scene", "cauchy", "constant", "expr"), default="scene",
                        help="density: the scene's phi line (default, falling back to cauchy), "
                             "|Cauchy transform|, a constant or an expression in z")
        sp.add_argument("--value", type=float, default=None, help="constant density value")
        sp.add_argument("--expr", default=None, help="density expression in z")
        sp.add_argument("--window", type=float, nargs=4, metavar=("X0", "Y0", "X1", "Y1"))

    sp = common(sub.add_parser("cauchy", help="Cauchy transform at points"))
    sp.add_argument("--points", required=True, help="CSV with header re,im")
    sp.set_defaults(func=cmd_cauchy)

    sp = common(sub.add_parser("color", help="dyadic coloring scheme as SVG"))
    phi_opts(sp)
    sp.add_argument("--a", type=_complex_arg, required=True, help="seed point")
    sp.add_argument("--k", type=int, required=True, help="starting generation")
    sp.add_argument("--gens", type=int, default=1, help="number of generations")
    sp.add_argument("--report", default=None, help="JSON report file")
    sp.set_defaults(func=cmd_color)

    sp = common(sub.add_parser("classify", help="light/heavy classification"))
    phi_opts(sp)
    sp.add_argument("--points", required=True, help="CSV with header re,im")
    sp.add_argument("--k-max", type=int, default=6, dest="k_max")
    sp.add_argument("--gens", type=int, default=1)
    sp.set_defaults(func=cmd_classify)

    sp = common(sub.add_parser("abpe-scan", help="bounded point evaluation scan"))
    sp.add_argument("--window", type=float, nargs=4, metavar=("X0", "Y0", "X1", "Y1"))
    sp.add_argument("--res", type=_positive_float, default=1 / 32, help="grid spacing")
    sp.add_argument("--degree", type=int, default=None, help="basis degree N")
    sp.add_argument("--report", default=None, help="JSON report file (default stdout)")
    sp.set_defaults(func=cmd_scan)

    sp = common(sub.add_parser("sweep", help="sweep onto a circular domain boundary"))
    sp.add_argument("--domain", choices=("disk", "annulus"), required=True)
    sp.add_argument("--center", type=_complex_arg, default=0j)
    sp.add_argument("--radius", type=_positive_float, default=1.0)
    sp.add_argument("--inner", type=_positive_float, default=None)
    sp.add_argument("--outer", type=_positive_float, default=None)
    sp.add_argument("--n", type=int, default=4096, help="boundary samples per circle")
    sp.add_argument("--report", default=None, help="JSON summary file")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("decompose", help="Delta_0 / abpe partition report")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--K", action="append", default=None,
                    help='piece of K, e.g. "disk center 0 radius 1" (repeatable)')
    sp.add_argument("--window", type=float, nargs=4, metavar=("X0", "Y0", "X1", "Y1"))
    sp.add_argument("--res", type=_positive_float, default=1 / 32)
    sp.add_argument("--degree", type=int, default=None)
    sp.add_argument("--report", default=None, help="JSON report file")
    sp.set_defaults(func=cmd_decompose)
    return p


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    op = args.command
    try:
        scene = load_scene(args.scene)
    except OSError as exc:
        stderr.write(f"{op}: cannot read scene: {exc.strerror}\n")
        return EXIT_INPUT
    except InvalidInputError as exc:
        stderr.write(f"{op}: invalid scene: {exc}\n")
        return EXIT_INPUT
    try:
        return args.func(args, scene, stdout)
    except DecompositionFailure as exc:
        stderr.write(f"{op}: decomposition failure: {exc}\n")
        return EXIT_DECOMPOSITION
    except (WindowTooSmallError, ResolutionError) as exc:
        stderr.write(f"{op}: infeasible window or resolution: {exc}\n")
        return EXIT_INFEASIBLE
    except (InvalidInputError, UnsupportedDomainError, UnsupportedExponentError) as exc:
        stderr.write(f"{op}: invalid input: {exc}\n")
        return EXIT_INPUT
    except ToolkitError as exc:
        stderr.write(f"{op}: {type(exc).__name__}: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
