"""Command-line front end: ``henonroots <subcommand> ...``.

Exit status is 0 on success, 1 on a diagnostic error and 2 when
verify-root refutes the claimed root.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import green, roots
from .dsl import EvalContext, to_unipoly, as_polymap, load_map, load_scalar, parse_expr
from .elementary import (
    ElementaryNonFlow,
    TriangularMap,
    conjugate_to_polynomial,
    construct_root,
    nonpolynomial_root_example,
)
from .henon import HenonComposition
from .poly import PolyMap2, compose_all, map_to_record
from .scalars import approximate, format_scalar, from_record, is_exact
from .words import decompose, henon_normal_form

EXIT_OK, EXIT_ERROR, EXIT_REFUTED = 0, 1, 2

log = logging.getLogger("henonroots")


class CliError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def _map(args, text):
    return load_map(text, approx=args.approx)


def _poly_map(args, text) -> PolyMap2:
    v = _map(args, text)
    if isinstance(v, ElementaryNonFlow):
        v = v.as_map()
    return as_polymap(v)


def _point(args, text: str, exact_ok: bool = True):
    parts = text.split(",")
    if len(parts) != 2:
        raise CliError(f"a point needs two comma-separated coordinates, got {text!r}")
    vals = [load_scalar(p, approx=args.approx) for p in parts]
    return vals if exact_ok else [approximate(v) for v in vals]


def _pair(text: str, kind=float):
    sep = "x" if "x" in text else ","
    a, _, b = text.partition(sep)
    try:
        return kind(a), kind(b)
    except ValueError:
        raise CliError(f"cannot read {text!r} as a pair") from None


def _scalar_out(x):
    return format_scalar(x) if is_exact(x) else [x.real, x.imag] if isinstance(x, complex) else x


def _config(args) -> dict:
    keys = ("approx", "seed", "tol", "max_iter")
    return {k: getattr(args, k) for k in keys if hasattr(args, k)}


def _readable(v):
    # scalar records become their DSL spelling in text reports
    if isinstance(v, dict):
        if set(v) == {"conductor", "coords"}:
            return format_scalar(from_record(v))
        return {k: _readable(e) for k, e in v.items()}
    if isinstance(v, list):
        return [_readable(e) for e in v]
    return v


def _text(rec: dict, indent: int = 0) -> str:
    """Indented key: value lines; leaf lists and records stay on one line."""
    pad = "  " * indent
    lines = []
    for k, v in rec.items():
        if isinstance(v, dict) and any(isinstance(e, (dict, list)) for e in v.values()) and k != "map":
            lines.append(f"{pad}{k}:")
            lines.append(_text(v, indent + 1))
        elif isinstance(v, list) and v and all(isinstance(e, dict) for e in v):
            lines.append(f"{pad}{k}:")
            for e in v:
                lines.append(f"{pad}  -")
                lines.append(_text(e, indent + 2))
        else:
            shown = v if isinstance(v, str) else json.dumps(v, default=str)
            lines.append(f"{pad}{k}: {shown}")
    return "\n".join(lines)


def _emit(args, rec: dict) -> None:
    rec = dict(rec)
    rec["config"] = _config(args)
    fmt = args.format
    if fmt in ("pgm", "csv"):
        raise CliError(f"--format {fmt} only applies to escape-grid")
    body = json.dumps(rec, indent=2, default=str) if fmt == "json" else _text(_readable(rec))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(body + "\n")
    else:
        print(body)


def _map_rec(m: PolyMap2) -> dict:
    return {"display": str(m), "degree": m.degree, "coefficients": map_to_record(m)}


def _green_params(args) -> green.GreenParams:
    kw = {}
    if args.tol is not None:
        kw["tol"] = args.tol
    if args.max_iter is not None:
        kw["max_iter"] = args.max_iter
    if getattr(args, "radius", None) is not None:
        kw["R"] = args.radius
    return green.GreenParams(**kw)


def _dynamics(args, text):
    v = _map(args, text)
    if isinstance(v, ElementaryNonFlow):
        raise CliError("Green's functions need a Hénon-type map, not an elementary one")
    return v


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval(args) -> int:
    m = _poly_map(args, args.map)
    rec = {"map": str(m), "degree": m.degree}
    if args.point:
        z, w = _point(args, args.point)
        rec["point"] = [_scalar_out(z), _scalar_out(w)]
        rec["image"] = [_scalar_out(c) for c in m(z, w)]
    _emit(args, rec)
    return EXIT_OK


def cmd_compose(args) -> int:
    m = compose_all([_poly_map(args, t) for t in args.maps])
    _emit(args, _map_rec(m))
    return EXIT_OK


def cmd_decompose(args) -> int:
    word = decompose(_poly_map(args, args.map), args.tol)
    _emit(args, {"length": len(word.letters), "groups": "".join(word.groups()), "letters": word.to_record()})
    return EXIT_OK


def cmd_normal_form(args) -> int:
    nf = henon_normal_form(_poly_map(args, args.map), args.tol)
    rec = {
        "kind": nf.kind,
        "conjugator": str(nf.conjugator),
        "conjugator_is_affine": nf.conjugator_is_affine,
        "exact": nf.exact,
    }
    if nf.kind == "henon":
        rec["composition"] = str(nf.composition)
        rec["degree"] = nf.composition.degree
    else:
        rec["letter"] = nf.letter.to_record() if nf.letter is not None else None
    _emit(args, rec)
    return EXIT_OK


def cmd_root_orders(args) -> int:
    v = _map(args, args.map)
    d = v.degree if isinstance(v, HenonComposition) else as_polymap(v).degree
    _emit(args, {"degree": d, "orders": sorted(roots.possible_root_orders(d))})
    return EXIT_OK


def _root_cfg(args) -> roots.RootSearchConfig:
    kw = {"seed": args.seed}
    if args.starts is not None:
        kw["newton_starts"] = args.starts
    if args.tol is not None:
        kw["newton_tol"] = args.tol
    if args.max_iter is not None:
        kw["max_newton_iters"] = args.max_iter
    return roots.RootSearchConfig(**kw)


def cmd_find_roots(args) -> int:
    h = _map(args, args.map)
    if isinstance(h, ElementaryNonFlow):
        raise CliError("find-roots expects a Hénon composition; use elem-root for elementary maps")
    cfg = _root_cfg(args)
    found = roots.find_roots(h, args.order, cfg)
    rec = {
        "order": args.order,
        "count": len(found),
        "search": f"search exhausted {found.info['starts']} starts",
        "search_info": found.info,
        "root_search_config": vars(cfg),
        "roots": [c.to_record() for c in found],
    }
    _emit(args, rec)
    return EXIT_OK


def cmd_verify_root(args) -> int:
    f = _poly_map(args, args.map)
    h = _map(args, args.target)
    status = roots.verify_root(f, args.order, h if isinstance(h, HenonComposition) else as_polymap(h), args.tol)
    _emit(args, {"status": status, "order": args.order, "root": str(f)})
    return EXIT_REFUTED if status == roots.REFUTED else EXIT_OK


def cmd_symmetry_roots(args) -> int:
    f = _poly_map(args, args.map)
    # without --target the target is f^n itself
    target = _poly_map(args, args.target) if args.target else compose_all([f] * args.order)
    found = roots.symmetry_roots(f, args.order, target)
    _emit(args, {"order": args.order, "count": len(found), "roots": [c.to_record() for c in found]})
    return EXIT_OK


def cmd_elem_root(args) -> int:
    if args.example_k is not None:
        k = to_unipoly(parse_expr(args.example_k), EvalContext(args.approx), "t")
        phi, F = nonpolynomial_root_example(k)
        ok = compose_all([phi, phi]) == F
        _emit(args, {"phi": str(phi), "F": str(F), "phi_squared_equals_F": ok})
        return EXIT_OK if ok else EXIT_REFUTED
    F = _map(args, args.map)
    if not isinstance(F, ElementaryNonFlow):
        raise CliError("elem-root expects elem_nonflow(r=..., mu=..., q=..., beta=...)")
    g = construct_root(F, args.l)
    _emit(args, {"F": str(F.as_map()), "order": args.l * F.r + 1, "root": _map_rec(g), "status": roots.VERIFIED_EXACT})
    return EXIT_OK


def cmd_conjugate(args) -> int:
    phi = TriangularMap.from_map(_poly_map(args, args.map))
    F = _map(args, args.target)
    if not isinstance(F, ElementaryNonFlow):
        raise CliError("--target must be elem_nonflow(...)")
    psi, conj = conjugate_to_polynomial(phi, F, args.order)
    _emit(args, {"psi": str(psi), "conjugated": str(conj), "verified": True})
    return EXIT_OK


def cmd_green(args) -> int:
    h = _dynamics(args, args.map)
    pt = _point(args, args.point, exact_ok=False)
    prm = _green_params(args)
    est = (green.green_minus if args.minus else green.green_plus)(pt, h, prm)
    rec = {"function": "G-" if args.minus else "G+", "point": [_scalar_out(c) for c in pt]}
    rec.update(est.to_record())
    rec["params"] = vars(prm)
    _emit(args, rec)
    return EXIT_OK


def cmd_escape_grid(args) -> int:
    h = _dynamics(args, args.map)
    nx, ny = _pair(args.resolution, int)
    xr, yr = _pair(args.xrange), _pair(args.yrange)
    if args.slice == "conj":
        slc = green.GridSlice.conjugate_diagonal(xr, yr)
    else:
        origin = _point(args, args.origin, exact_ok=False)
        direction = _point(args, args.direction, exact_ok=False)
        slc = green.GridSlice.complex_line(origin, direction, xr, yr)
    grid = green.emit_grid(h, slc, (nx, ny), _green_params(args), args.what)
    fmt = args.format if args.format in ("pgm", "csv") else "pgm"
    if not args.out:
        raise CliError("escape-grid needs --out <path>")
    if fmt == "pgm":
        green.write_pgm(grid, args.out, binary=args.binary)
    else:
        green.write_csv(grid, args.out)
    print(f"wrote {nx}x{ny} {args.what} grid to {args.out} ({fmt})")
    return EXIT_OK


def cmd_check_bounds(args) -> int:
    h = _dynamics(args, args.map)
    prm = _green_params(args)
    rep = green.check_bounds_lemma(h, prm, args.samples, seed=args.seed)
    rec = {"note": "constants are empirical estimates, not bounds"}
    rec.update(rep.to_record())
    rec["params"] = vars(prm)
    _emit(args, rec)
    return EXIT_OK


def cmd_fit_multiplier(args) -> int:
    f = _poly_map(args, args.map)
    h = _dynamics(args, args.target)
    prm = _green_params(args)
    fit = green.fit_multiplier(f, h, args.order, prm, args.samples, seed=args.seed)
    d = h.degree if isinstance(h, HenonComposition) else as_polymap(h).degree
    rec = fit.to_record()
    rec.update({"order": args.order, "degree": d, "b^n": fit.b**args.order, "params": vars(prm)})
    _emit(args, rec)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="approx", action="store_false", help="exact cyclotomic arithmetic (default)")
    mode.add_argument("--approx", dest="approx", action="store_true", help="double-precision complex arithmetic")
    common.set_defaults(approx=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None, help="tolerance; defaults to each module's own")
    common.add_argument("--max-iter", type=int, default=None)
    common.add_argument("--format", choices=("json", "text", "pgm", "csv"), default="text")
    common.add_argument("--out", default=None, help="write the report or grid to this path")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="henonroots", description="Compositional roots of Hénon compositions.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help, aliases=()):
        sp = sub.add_parser(name, parents=[common], help=help, aliases=list(aliases))
        sp.set_defaults(func=fn)
        return sp

    sp = add("eval", cmd_eval, "expand a map, optionally evaluating it at a point")
    sp.add_argument("map")
    sp.add_argument("--point")

    sp = add("compose", cmd_compose, "expand the composition first o second o ...")
    sp.add_argument("maps", nargs="+")

    sp = add("decompose", cmd_decompose, "reduced affine/elementary word of an automorphism")
    sp.add_argument("map")

    sp = add("normal-form", cmd_normal_form, "Hénon normal form up to conjugacy")
    sp.add_argument("map")

    sp = add("root-orders", cmd_root_orders, "orders n for which an n-th root is not excluded")
    sp.add_argument("map")

    sp = add("find-roots", cmd_find_roots, "search for n-th compositional roots", aliases=("roots",))
    sp.add_argument("map")
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--starts", type=int, default=None)

    for name, fn, help in (
        ("verify-root", cmd_verify_root, "check f^n == target"),
        ("symmetry-roots", cmd_symmetry_roots, "roots f o (sigma z, rho w) of the same target"),
        ("fit-multiplier", cmd_fit_multiplier, "fit b with G+ o f = b G+"),
    ):
        sp = add(name, fn, help)
        sp.add_argument("map")
        sp.add_argument("--order", type=int, required=True)
        sp.add_argument("--target", required=name != "symmetry-roots")
        if name == "fit-multiplier":
            sp.add_argument("--samples", type=int, default=200)

    sp = add("elem-root", cmd_elem_root, "(lr+1)-st root of elem_nonflow(...)")
    sp.add_argument("map", nargs="?")
    sp.add_argument("--l", type=int, default=1)
    sp.add_argument("--example-k", default=None, help="instead build the nonpolynomial square root with k = this polynomial in t")

    sp = add("conjugate", cmd_conjugate, "conjugate a triangular root to polynomial form")
    sp.add_argument("map")
    sp.add_argument("--target", required=True)
    sp.add_argument("--order", type=int, required=True)

    sp = add("green", cmd_green, "Green's function at a point")
    sp.add_argument("map")
    sp.add_argument("--point", required=True)
    sp.add_argument("--minus", action="store_true", help="backward function G- instead of G+")
    sp.add_argument("--radius", type=float, default=None)

    sp = add("escape-grid", cmd_escape_grid, "grid of G+/G- or K+/K- membership over a slice")
    sp.add_argument("map")
    sp.add_argument("--resolution", default="256x256")
    sp.add_argument("--what", choices=green.GRID_KINDS, default=green.KPLUS_MASK)
    sp.add_argument("--slice", choices=("conj", "line"), default="conj", help="conj: z = conj(w); line: origin + t*direction")
    sp.add_argument("--origin", default="0,0")
    sp.add_argument("--direction", default="1,0")
    sp.add_argument("--xrange", default="-2,2")
    sp.add_argument("--yrange", default="-2,2")
    sp.add_argument("--binary", action="store_true", help="P5 instead of P2")
    sp.add_argument("--radius", type=float, default=None)

    sp = add("check-bounds", cmd_check_bounds, "empirical constants for the log+ bounds on G+ and G-")
    sp.add_argument("map")
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--radius", type=float, default=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, ValueError, ZeroDivisionError, OverflowError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
