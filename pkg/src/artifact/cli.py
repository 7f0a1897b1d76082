"""Command-line front end: ``artifact evaluate | validate | estimate-map``."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import engine as en
from . import geometry as geo
from . import targets as tgs
from . import validation as val


class SpecError(ValueError):
    """Invalid command-line specification (exit code 2)."""


# ---------------------------------------------------------------------------
# spec parsing


def load_surface(spec: str) -> geo.AxisymSurface:
    """Surface from a JSON file (or an inline JSON object).

    ``{"kind": "spheroid", "a": 1, "b": 3, "n_t": 40, "n_phi": 40}`` or
    ``{"kind": "trig", "beta": 0.3, "m": 2, "scale": 1, "aspect": 1.5}``;
    optional ``"panels": [[0, t1], [t1, 3.14159...]]`` splits the polar grid.
    """
    if spec.lstrip().startswith("{"):
        text = spec
    else:
        path = Path(spec)
        if not path.is_file():
            raise SpecError(f"surface file not found: {spec}")
        text = path.read_text()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"surface spec is not valid JSON: {exc}") from None
    kind = d.get("kind", "spheroid")
    try:
        if kind == "spheroid":
            curve = geo.spheroid(float(d["a"]), float(d["b"]))
        elif kind == "trig":
            curve = geo.trig_curve(float(d["beta"]), int(d.get("m", 2)), float(d.get("scale", 1.0)),
                                   float(d.get("aspect", 1.0)))
        else:
            raise SpecError(f"unknown surface kind {kind!r}")
        panels = d.get("panels")
        if panels is None:
            panels = ((0.0, np.pi),)
        else:
            panels = tuple((float(a), float(b)) for a, b in panels)
            panels = ((0.0, panels[0][1]),) + panels[1:-1] + ((panels[-1][0], np.pi),) \
                if len(panels) > 1 else ((0.0, np.pi),)
        return geo.AxisymSurface(curve, panels, int(d.get("n_t", 40)), int(d.get("n_phi", 40)))
    except (KeyError, TypeError) as exc:
        raise SpecError(f"incomplete surface spec: {exc}") from None


_EXPR_NS = {name: getattr(np, name) for name in
            ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh", "pi")}


def parse_density(spec: str):
    """Named density, ``const[:v]`` / ``const:vx,vy,vz`` or an expression in theta, phi."""
    if spec in en.NAMED_DENSITIES:
        return en.NAMED_DENSITIES[spec]
    if spec.startswith("const:"):
        try:
            vals = [float(v) for v in spec[6:].split(",")]
        except ValueError:
            raise SpecError(f"bad constant density {spec!r}") from None
        return en.const_density(vals[0] if len(vals) == 1 else vals)
    try:
        code = compile(spec, "<density>", "eval")
    except SyntaxError as exc:
        raise SpecError(f"bad density expression: {exc}") from None
    bad = [n for n in code.co_names if n not in _EXPR_NS and n not in ("theta", "phi")]
    if bad:
        raise SpecError(f"unknown names in density expression: {bad}")

    def sigma(theta, phi):
        v = eval(code, {"__builtins__": {}}, dict(_EXPR_NS, theta=theta, phi=phi))
        return v + 0 * theta * phi

    return sigma


def _floats(parts, n_min, name):
    if len(parts) < n_min:
        raise SpecError(f"{name} targets need at least {n_min} parameters")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise SpecError(f"non-numeric {name} target parameter") from None


def parse_targets(spec: str, surface: geo.AxisymSurface) -> np.ndarray:
    """Target points from a spec string.

    - ``plane:x0,x1,nx,z0,z1,nz[,y]``      uniform xz grid
    - ``normal:theta,phi,dmin,dmax,n[,in]`` log-spaced points on a surface normal
    - ``ring:rho,n[,panel]``                constant Bernstein radius (spheroids)
    - ``file:PATH``                         CSV/whitespace file with x,y,z columns
    """
    kind, _, rest = spec.partition(":")
    parts = [p for p in rest.split(",") if p != ""]
    if kind == "plane":
        v = _floats(parts, 6, kind)
        return tgs.plane_grid(v[0], v[1], int(v[2]), v[3], v[4], int(v[5]), v[6] if len(v) > 6 else 0.0)
    if kind == "normal":
        side = "out"
        if len(parts) > 5:
            side = parts[5]
            parts = parts[:5]
        v = _floats(parts, 5, kind)
        try:
            return tgs.normal_line(surface.curve, v[0], v[1], tgs.log_distances(v[2], v[3], int(v[4])), side)
        except ValueError as exc:
            raise SpecError(str(exc)) from None
    if kind == "ring":
        if not surface.curve.is_spheroid:
            raise SpecError("ring targets need a spheroid surface")
        v = _floats(parts, 2, kind)
        pms = surface.param_maps
        pm = pms[int(v[2])] if len(v) > 2 else pms[len(pms) // 2]
        a, b = surface.curve.params["a"], surface.curve.params["b"]
        return tgs.ring_targets(a, b, pm, v[0], int(v[1]))
    if kind == "file":
        try:
            pts = np.loadtxt(rest, delimiter="," if rest.endswith(".csv") else None, ndmin=2)
        except (OSError, ValueError) as exc:
            raise SpecError(f"cannot read target file: {exc}") from None
        if pts.shape[1] != 3:
            raise SpecError("target file needs exactly three columns")
        return pts
    raise SpecError(f"unknown target spec {spec!r}")


# ---------------------------------------------------------------------------
# output


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, (complex, np.complexfloating)):
        return f"{v.real:.17g}{v.imag:+.17g}j"
    return str(v)


def write_csv(rows, header, out):
    fh = open(out, "w", newline="") if out and out != "-" else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(r.get(h, "")) for h in header])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _reference(surface, density, kernel, tg):
    return np.atleast_1d(en.reduced_oracle(surface, density, kernel, tg)[0])


# ---------------------------------------------------------------------------
# commands


def cmd_evaluate(args) -> int:
    surface = load_surface(args.surface)
    density = parse_density(args.density)
    kernel = en.KERNELS[args.kernel]
    pts = parse_targets(args.targets, surface)
    res = en.evaluate(surface, density, kernel, pts, en.QuadConfig(args.eps, args.ngl))
    ucols = ["u"] if kernel.arity == 1 else ["u", "u2", "u3"][:kernel.arity]
    header = ["x", "y", "z", *ucols, "method", "gate_estimate", "npan", "d_estimate"]
    if args.with_oracle:
        header.append("abs_error")
    rows = []
    for p, r in zip(pts, res):
        row = {"x": p[0], "y": p[1], "z": p[2], "method": r.method, "gate_estimate": r.gate,
               "npan": r.npan, "d_estimate": r.d}
        row.update({c: float(v) for c, v in zip(ucols, np.atleast_1d(r.value))})
        if args.with_oracle:
            ref = _reference(surface, density, kernel, r.target)
            row["abs_error"] = float(np.max(np.abs(np.atleast_1d(r.value) - ref)))
        rows.append(row)
    write_csv(rows, header, args.out)
    return 0


def cmd_estimate_map(args) -> int:
    surface = load_surface(args.surface)
    density = parse_density(args.density)
    kernel = en.KERNELS[args.kernel]
    pts = parse_targets(args.targets, surface)
    header = ["x", "y", "z", "gate_estimate", "d_estimate"]
    if args.with_oracle:
        header.append("abs_error")
    rows = []
    for p in pts:
        tg = surface.target(p)
        try:
            th0 = en._theta0(surface, tg)
        except (ValueError, ArithmeticError):
            th0 = None
        gate = np.inf if th0 is None else en.gate_estimate(surface, density, kernel, tg, th0)
        row = {"x": p[0], "y": p[1], "z": p[2], "gate_estimate": gate,
               "d_estimate": en.distance_estimate(surface.curve, th0) if th0 is not None else np.nan}
        if args.with_oracle:
            reg = np.atleast_1d(en.regular_quadrature(surface, density, kernel, tg))
            row["abs_error"] = float(np.max(np.abs(reg - _reference(surface, density, kernel, tg))))
        rows.append(row)
    write_csv(rows, header, args.out)
    return 0


_SUITE_ARGS = {"recurrences": ("seed",), "identity_quotient": ("seed",), "theorem_1d": ("seed",),
               "roots": ("seed",), "estimates": ("seed",), "gate": ("eps",), "stresslet": ("eps",),
               "flagging": ("eps",), "npan_trend": ("eps",), "s3q": ()}


def cmd_validate(args) -> int:
    if args.suite not in val.SUITES:
        print(f"unknown suite {args.suite!r}; choose from {', '.join(val.SUITES)}", file=sys.stderr)
        return 2
    kw = {}
    if "seed" in _SUITE_ARGS[args.suite]:
        kw["seed"] = args.seed
    if "eps" in _SUITE_ARGS[args.suite] and args.eps is not None:
        kw["eps"] = args.eps
    res = val.SUITES[args.suite](**kw)
    if args.out and res.rows:
        header = list(dict.fromkeys(k for r in res.rows for k in r))
        write_csv(res.rows, header, args.out)
    print(res.line())
    return 0 if res.passed else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="artifact", description="Close evaluation of layer potentials on "
                                 "axisymmetric surfaces by singularity swap quadrature.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, eps_default=1e-6):
        p.add_argument("--surface", required=True, help="surface JSON file (or inline JSON object)")
        p.add_argument("--density", default="fig1", help="fig1 | s10 | const[:v[,v2,v3]] | expression in theta, phi")
        p.add_argument("--kernel", default="laplace_slp", choices=sorted(en.KERNELS))
        p.add_argument("--eps", type=float, default=eps_default)
        p.add_argument("--ngl", type=int, default=16)
        p.add_argument("--targets", required=True, help="plane:... | normal:... | ring:... | file:PATH")
        p.add_argument("--out", default="-", help="output CSV (default stdout)")
        p.add_argument("--with-oracle", action="store_true", help="add abs_error against a 1D reduced oracle")
        p.add_argument("--seed", type=int, default=0)

    common(sub.add_parser("evaluate", help="evaluate the layer potential at targets"))
    common(sub.add_parser("estimate-map", help="gate estimates (and measured regular errors)"))
    pv = sub.add_parser("validate", help="run a validation suite")
    pv.add_argument("suite", help=", ".join(val.SUITES))
    pv.add_argument("--eps", type=float, default=None)
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--out", default=None, help="per-case CSV")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cmd = {"evaluate": cmd_evaluate, "estimate-map": cmd_estimate_map, "validate": cmd_validate}[args.command]
    try:
        return cmd(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
