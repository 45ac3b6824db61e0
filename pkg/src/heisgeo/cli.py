"""Command-line frontend.

Subcommands wrap the library one-to-one: distance, geodesic, mcp, energy,
minimize. Every invocation that writes artifacts also writes a manifest
(<command>_manifest.json) recording the command, argv, sha256 of each input
file, the effective configuration, seed, package version, kernel backend,
and wall time. All numeric output is deterministic for fixed inputs and
seed: JSON carries 17 significant digits, human-readable lines 9.

Exit codes: 0 success; 1 solver finished without meeting its tolerances
(artifacts still written); 2 malformed input; 3 violated mathematical
precondition.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time

import numpy as np

from . import __version__
from ._kernels import backend_name
from .energy import horizontal_energy, ks_energy, pansu_energy
from .errors import DimensionMismatchError, InputError, PreconditionError
from .geodesics import cc_distance, geodesic_between, geodesic_from_origin
from .grid import SampledMap
from .group import HPoint, gauge_dist, group_inv, group_mul, omega
from .contraction import mcp_scan
from .variational import BoundaryData, MinimizeConfig, minimize


def _fmt17(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise InputError(f"non-finite value in output: {x}")
    return format(float(x), ".17g")


def _fmt9(x: float) -> str:
    return format(float(x), ".9g")


def dump_json(obj) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    out = []
    _dump(obj, out)
    return "".join(out)


def _dump(obj, out, indent=0) -> None:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append(f'{pad}  {json.dumps(str(k))}: ')
            _dump(v, out, indent + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        flat = all(isinstance(v, (int, float, bool)) or v is None for v in obj)
        if flat:
            out.append("[" + ", ".join(_scalar(v) for v in obj) + "]")
        else:
            out.append("[\n")
            for i, v in enumerate(obj):
                out.append(pad + "  ")
                _dump(v, out, indent + 1)
                out.append(",\n" if i < len(obj) - 1 else "\n")
            out.append(pad + "]")
    else:
        out.append(_scalar(obj))


def _scalar(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt17(float(v))
    return json.dumps(str(v))


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            h.update(block)
    return h.hexdigest()


def _write_manifest(outdir, command: str, argv: list, inputs: list,
                    config: dict, seed, t_start: float) -> None:
    manifest = {
        "command": command,
        "argv": argv,
        "inputs": {p: _sha256(p) for p in inputs},
        "config": config,
        "seed": seed,
        "version": __version__,
        "backend": backend_name,
        "wall_time_s": time.monotonic() - t_start,
    }
    path = outdir / f"{command}_manifest.json"
    path.write_text(dump_json(manifest) + "\n", encoding="utf-8")


def _parse_point(text: str, m: int) -> HPoint:
    """Inline 'x1,..,xm,y1,..,ym,t' or '@file.json' holding that list."""
    if text.startswith("@"):
        try:
            with open(text[1:], encoding="utf-8") as fh:
                vals = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read point from {text[1:]}: {exc}") from None
    else:
        try:
            vals = [float(v) for v in text.split(",")]
        except ValueError:
            raise InputError(f"cannot parse point {text!r}") from None
    try:
        arr = np.asarray(vals, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"point {text!r} is not a flat list of reals") from None
    if arr.shape != (2 * m + 1,):
        raise InputError(
            f"point needs {2 * m + 1} components for m={m}, got {arr.shape}"
        )
    return HPoint.from_array(arr)


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        nx, ny = (int(v) for v in text.split(","))
    except ValueError:
        raise InputError(f"--grid expects NX,NY, got {text!r}") from None
    if nx < 2 or ny < 2:
        raise InputError(f"grid must be at least 2x2, got {nx},{ny}")
    return nx, ny


def _outdir(args):
    import pathlib

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path, header: list, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(_fmt17(float(v)))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_distance(args, argv) -> int:
    t0 = time.monotonic()
    p = _parse_point(args.p, args.m)
    q = _parse_point(args.q, args.m)
    d_cc = cc_distance(p, q)
    d_gauge = gauge_dist(p, q)
    if p == q:
        tau = 0.0
        rho = 0.0
    else:
        chart = geodesic_from_origin(group_mul(group_inv(p), q))
        tau = chart.tau
        rho = chart.rho
    print(f"d_cc    {_fmt9(d_cc)}")
    print(f"d_gauge {_fmt9(d_gauge)}")
    print(f"tau     {_fmt9(tau)}")
    print(f"rho     {_fmt9(rho)}")
    if args.out is not None:
        out = _outdir(args)
        payload = {"m": args.m, "p": p.as_array().tolist(), "q": q.as_array().tolist(),
                   "d_cc": d_cc, "d_gauge": d_gauge, "tau": tau, "rho": rho}
        (out / "distance.json").write_text(dump_json(payload) + "\n", encoding="utf-8")
        _write_manifest(out, "distance", argv,
                        [a[1:] for a in (args.p, args.q) if a.startswith("@")],
                        {"m": args.m}, None, t0)
    return 0


def cmd_geodesic(args, argv) -> int:
    t0 = time.monotonic()
    p = _parse_point(args.p, args.m)
    q = _parse_point(args.q, args.m)
    if p == q:
        raise PreconditionError("endpoints coincide: the geodesic chart is undefined")
    if args.samples < 2:
        raise InputError(f"--samples must be >= 2, got {args.samples}")
    m = args.m
    w = group_mul(group_inv(p), q)
    chart = geodesic_from_origin(w)
    rows = []
    for k in range(args.samples):
        s = k / (args.samples - 1)
        g = geodesic_between(p, q, s)
        vel = _chart_velocity(chart, s)
        resid = _horizontality_residual(p, chart, s, vel)
        rows.append((s, *g.x.tolist(), *g.y.tolist(), g.t, resid))
    out = _outdir(args)
    header = (["s"] + [f"x{i + 1}" for i in range(m)]
              + [f"y{i + 1}" for i in range(m)] + ["t", "residual"])
    _write_csv(out / "geodesic.csv", header, rows)
    _write_manifest(out, "geodesic", argv,
                    [a[1:] for a in (args.p, args.q) if a.startswith("@")],
                    {"m": m, "samples": args.samples}, None, t0)
    print(f"wrote {out / 'geodesic.csv'} ({args.samples} samples)")
    return 0


def _chart_velocity(chart, s: float) -> np.ndarray:
    from .geodesics import geodesic_velocity

    return geodesic_velocity(chart, s)


def _horizontality_residual(p: HPoint, chart, s: float, vel: np.ndarray) -> float:
    """|t' - 2(y . x' - x . y')| of the translated curve at parameter s.

    Left translation by p shifts the curve's horizontal part by p.z, which
    changes the horizontality identity covariantly; evaluating it on the
    translated curve exercises exactly what the CSV rows contain."""
    from .geodesics import eval_geodesic

    m = chart.m
    g0 = eval_geodesic(chart, s)
    xs, ys = vel[:m], vel[m : 2 * m]
    ts = vel[2 * m]
    # translated curve: x = p.x + g0.x, y = p.y + g0.y,
    # t = p.t + g0.t + 2 omega(p.z, g0.z); differentiate in s
    ts_tr = ts + 2.0 * omega(p.x, p.y, xs, ys)
    x_tr = p.x + g0.x
    y_tr = p.y + g0.y
    return float(abs(ts_tr - 2.0 * (y_tr @ xs - x_tr @ ys)))


def cmd_mcp(args, argv) -> int:
    t0 = time.monotonic()
    p0 = (_parse_point(args.p0, args.m) if args.p0 is not None
          else HPoint.identity(args.m))
    thresholds = None
    if args.thresholds is not None:
        try:
            thresholds = [float(v) for v in args.thresholds.split(",")]
        except ValueError:
            raise InputError(f"cannot parse --thresholds {args.thresholds!r}") from None
    rows = mcp_scan(args.sbar, p0=p0, thresholds=thresholds,
                    n_samples=args.samples, seed=args.seed,
                    z_radius=args.z_radius)
    out = _outdir(args)
    _write_csv(out / "mcp.csv", ["threshold", "n_samples", "inf_ratio"], rows)
    _write_manifest(out, "mcp", argv, [],
                    {"sbar": args.sbar, "samples": args.samples,
                     "z_radius": args.z_radius,
                     "thresholds": thresholds}, args.seed, t0)
    print(f"sbar^4 ratio floor over thresholds "
          f"(target {_fmt9(args.sbar)} as threshold -> 0):")
    for thr, n, ratio in rows:
        print(f"  {thr:.3e}  {_fmt9(ratio)}")
    return 0


def _default_bump(u: SampledMap, epsilon: float) -> np.ndarray:
    """Tensor sin^2 bump supported at margin epsilon + half a cell."""
    margin = epsilon + 0.5 * min(u.hx, u.hy)
    x1 = u.x0 + u.hx * (u.nx - 1)
    y1 = u.y0 + u.hy * (u.ny - 1)
    lx = x1 - u.x0 - 2.0 * margin
    ly = y1 - u.y0 - 2.0 * margin
    if lx <= 0 or ly <= 0:
        raise PreconditionError(
            f"epsilon={epsilon} leaves no interior support on this grid"
        )
    nodes = u.nodes()
    sx = (nodes[:, 0] - u.x0 - margin) / lx
    sy = (nodes[:, 1] - u.y0 - margin) / ly
    w = np.zeros(u.n_nodes)
    ok = (sx >= 0) & (sx <= 1) & (sy >= 0) & (sy <= 1)
    w[ok] = (np.sin(np.pi * sx[ok]) * np.sin(np.pi * sy[ok])) ** 2
    return w


def cmd_energy(args, argv) -> int:
    t0 = time.monotonic()
    u = SampledMap.load(args.map)
    inputs = [args.map]
    if args.kind == "ks":
        if args.weight is not None:
            try:
                with open(args.weight, encoding="utf-8") as fh:
                    weight = np.asarray(json.load(fh), dtype=float)
            except (OSError, json.JSONDecodeError, ValueError) as exc:
                raise InputError(f"cannot read weight {args.weight}: {exc}") from None
            inputs.append(args.weight)
        else:
            weight = _default_bump(u, args.epsilon)
        report = ks_energy(u, weight, args.epsilon, alpha=args.alpha,
                           metric=args.metric, n_samples=args.samples)
    elif args.kind == "pansu":
        report = pansu_energy(u, alpha=args.alpha, n_samples=args.samples,
                              contact_tol=args.contact_tol)
    else:
        report = horizontal_energy(u, alpha=args.alpha)
    out = _outdir(args)
    (out / "energy.json").write_text(dump_json(report.to_json_dict()) + "\n",
                                     encoding="utf-8")
    _write_manifest(out, "energy", argv, inputs,
                    {"kind": args.kind, "alpha": args.alpha,
                     "epsilon": args.epsilon, "metric": args.metric,
                     "samples": args.samples,
                     "contact_tol": args.contact_tol}, args.seed, t0)
    print(f"{args.kind} energy {_fmt9(report.value)}")
    return 0


def cmd_minimize(args, argv) -> int:
    t0 = time.monotonic()
    boundary = BoundaryData.load(args.boundary)
    nx, ny = _parse_grid(args.grid)
    config = MinimizeConfig(alpha=args.alpha, penalty_mu0=args.mu0,
                            penalty_growth=args.growth, penalty_stages=args.stages,
                            inner_tol=args.inner_tol,
                            constraint_tol=args.constraint_tol,
                            max_inner_iters=args.max_iters, seed=args.seed)
    result = minimize(boundary, nx, ny, config)
    out = _outdir(args)
    (out / "solution.json").write_text(
        dump_json(result.map.to_json_dict()) + "\n", encoding="utf-8")
    report = result.report.to_json_dict()
    report["diagnostics"].update(
        {k: float(v) for k, v in result.diagnostics.items()})
    report["converged"] = result.converged
    (out / "energy.json").write_text(dump_json(report) + "\n", encoding="utf-8")
    _write_csv(out / "convergence.csv",
               ["stage", "iter", "energy", "grad_norm", "constraint_inf_norm"],
               result.log)
    _write_manifest(out, "minimize", argv, [args.boundary],
                    {"grid": [nx, ny], "alpha": args.alpha, "mu0": args.mu0,
                     "growth": args.growth, "stages": args.stages,
                     "inner_tol": args.inner_tol,
                     "constraint_tol": args.constraint_tol,
                     "max_iters": args.max_iters}, args.seed, t0)
    status = "converged" if result.converged else "NOT converged"
    print(f"{status}: energy {_fmt9(result.report.value)}, "
          f"constraint inf {_fmt9(result.diagnostics['constraint_inf'])}, "
          f"{len(result.log)} iterations")
    return 0 if result.converged else 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="heisgeo",
                 description="Numerical toolkit for sub-Riemannian geometry "
                             "of the Heisenberg group")
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("distance", help="C-C and gauge distance between two points")
    d.add_argument("--m", type=int, default=1)
    d.add_argument("--p", required=True, help="x1,..,xm,y1,..,ym,t or @file.json")
    d.add_argument("--q", required=True)
    d.add_argument("--out", default=None, help="directory for distance.json + manifest")
    d.set_defaults(fn=cmd_distance)

    g = sub.add_parser("geodesic", help="sample the geodesic between two points")
    g.add_argument("--m", type=int, default=1)
    g.add_argument("--p", required=True)
    g.add_argument("--q", required=True)
    g.add_argument("--samples", type=int, default=33)
    g.add_argument("--out", default=".")
    g.set_defaults(fn=cmd_geodesic)

    c = sub.add_parser("mcp", help="scan the contraction-Jacobian ratio near "
                                   "the horizontal plane")
    c.add_argument("--m", type=int, default=1)
    c.add_argument("--sbar", type=float, default=0.5)
    c.add_argument("--p0", default=None)
    c.add_argument("--thresholds", default=None,
                   help="comma list; default geometric 1e-1..1e-6")
    c.add_argument("--samples", type=int, default=100000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--z-radius", type=float, default=1.0)
    c.add_argument("--out", default=".")
    c.set_defaults(fn=cmd_mcp)

    e = sub.add_parser("energy", help="evaluate an energy of a sampled map")
    e.add_argument("--map", required=True, help="SampledMap JSON file")
    e.add_argument("--kind", choices=("ks", "pansu", "horizontal"), default="ks")
    e.add_argument("--alpha", type=float, default=2.0)
    e.add_argument("--epsilon", type=float, default=0.01)
    e.add_argument("--metric", choices=("gauge", "cc"), default="gauge")
    e.add_argument("--weight", default=None,
                   help="JSON list of per-node weights (ks only); default "
                        "interior sin^2 bump")
    e.add_argument("--samples", type=int, default=4096)
    e.add_argument("--contact-tol", type=float, default=1e-6)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", default=".")
    e.set_defaults(fn=cmd_energy)

    mz = sub.add_parser("minimize", help="solve the constrained Dirichlet problem")
    mz.add_argument("--boundary", required=True, help="BoundaryData JSON file")
    mz.add_argument("--grid", required=True, help="NX,NY")
    mz.add_argument("--alpha", type=float, default=2.0)
    mz.add_argument("--mu0", type=float, default=10.0)
    mz.add_argument("--growth", type=float, default=10.0)
    mz.add_argument("--stages", type=int, default=5)
    mz.add_argument("--inner-tol", type=float, default=1e-8)
    mz.add_argument("--constraint-tol", type=float, default=1e-8)
    mz.add_argument("--max-iters", type=int, default=20000)
    mz.add_argument("--seed", type=int, default=0)
    mz.add_argument("--out", default=".")
    mz.set_defaults(fn=cmd_minimize)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ap = build_parser()
        args = ap.parse_args(argv)
        return args.fn(args, argv)
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return 3
    except (InputError, DimensionMismatchError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
