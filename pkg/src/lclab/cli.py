"""Command-line front end.

Every toolkit operation is a subcommand taking builtin specs, descriptor
files, or LCGRID files as input and writing machine-readable output (JSON
for single objects, CSV for sweeps) to stdout or --out. The sweep commands
(question4, km-limit, slicing-table) also render a PNG figure next to the
--out file; --fig picks another location, --no-fig disables rendering.

Exit codes: 0 success, 2 numerical failure (non-convergence, truncation,
divergence), 3 input error. Output is byte-identical across runs with the
same arguments and seed.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from dataclasses import asdict

import numpy as np

from .bodies import (body_from_dict, cone_lift, cone_lift_lhat, indicator,
                     km_limit_sweep, make_body)
from .certify import full_certificate, logp_derivatives, question4_scan
from .errors import InputError, NumericalError
from .funcspace import (BUILTIN_NAMES, _params_from_jsonable, from_grid,
                        load_function, load_grid, make_builtin, power,
                        save_function, tilt_translate)
from .functionals import mahler, moments, santalo_point, volume_product
from .legendre import polar

DEFAULT_SEED = 424242


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with the input-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(3)


def _json_flag(text, flag):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{flag} is not valid JSON: {exc}") from exc


def _add_function_args(sub):
    g = sub.add_argument_group("function input (exactly one source)")
    g.add_argument("--builtin", choices=sorted(BUILTIN_NAMES), help="builtin family name")
    g.add_argument("--dim", type=int, default=1, help="ambient dimension for --builtin (default 1)")
    g.add_argument("--params", metavar="JSON", help="builtin parameters, e.g. '{\"sigma2\": 2.0}'")
    g.add_argument("--function", metavar="PATH", help="JSON function descriptor file")
    g.add_argument("--grid", metavar="PATH", help="LCGRID v1 potential file")
    t = sub.add_argument_group("transform")
    t.add_argument("--power", type=float, default=1.0, help="pointwise power f^t (default 1)")
    t.add_argument("--shift", metavar="JSON", help="translate f by this vector")
    t.add_argument("--tilt", metavar="JSON", help="multiply f by e^{-<tilt, z>}")


def _add_quadrature_args(sub, methods=("auto", "closed", "grid", "mc")):
    q = sub.add_argument_group("quadrature")
    q.add_argument("--method", choices=list(methods), default="auto",
                   help="moment route (default auto: closed forms when available, else grid for dim <= 3, else mc)")
    q.add_argument("--box", metavar="JSON", help="integration box [[lo, hi], ...] (default: from tail heuristic)")
    q.add_argument("--spacing", metavar="JSON", help="grid spacing, scalar or per-axis list")
    q.add_argument("--samples", type=int, default=200_000, help="mc sample count (default 200000)")
    q.add_argument("--refine", type=int, default=2, help="mc importance-refinement passes (default 2)")


def _add_output_args(sub, figure=False):
    o = sub.add_argument_group("output")
    o.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    o.add_argument("--dry-run", action="store_true",
                   help="validate inputs, print the resolved config, and exit")
    o.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help=f"random seed for mc paths (default {DEFAULT_SEED})")
    o.add_argument("--threads", type=int, default=None,
                   help="worker threads for per-point sweeps (default: LCLAB_THREADS or cpu count)")
    if figure:
        o.add_argument("--fig", metavar="PATH",
                       help="figure path (default: next to --out with .png suffix)")
        o.add_argument("--no-fig", action="store_true", help="skip figure rendering")


def _resolve_function(args):
    sources = [s for s in ("builtin", "function", "grid") if getattr(args, s, None)]
    if len(sources) != 1:
        raise InputError("provide exactly one of --builtin, --function, --grid")
    if args.builtin:
        params = _params_from_jsonable(_json_flag(args.params, "--params")) if args.params else {}
        f = make_builtin(args.builtin, args.dim, params)
    elif args.function:
        f = load_function(args.function)
    else:
        f = from_grid(load_grid(args.grid))
    if args.power != 1.0:
        f = power(f, args.power)
    if args.shift is not None or args.tilt is not None:
        shift = _json_flag(args.shift, "--shift") if args.shift is not None else 0.0
        tilt = _json_flag(args.tilt, "--tilt") if args.tilt is not None else 0.0
        f = tilt_translate(f, shift, tilt)
    return f


def _resolve_body(args):
    sources = [s for s in ("body_kind", "body", "vertices") if getattr(args, s, None)]
    if "vertices" in sources and "body_kind" in sources and args.body_kind == "vertex_polytope":
        sources.remove("vertices")
    if len(sources) != 1:
        raise InputError("provide exactly one of --body-kind, --body, --vertices")
    if args.body:
        with open(args.body, "r", encoding="utf-8") as fh:
            return body_from_dict(json.load(fh))
    if args.vertices:
        return make_body("vertex_polytope", vertices=_json_flag(args.vertices, "--vertices"))
    return make_body(args.body_kind, args.body_dim)


def _grid_kwargs(args):
    box = _json_flag(args.box, "--box") if getattr(args, "box", None) else None
    spacing = _json_flag(args.spacing, "--spacing") if getattr(args, "spacing", None) else None
    return box, spacing


def _threads(args):
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("LCLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise InputError(f"LCLAB_THREADS is not an integer: {env!r}") from exc
    return os.cpu_count() or 1


def _emit(text, args):
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj, args):
    _emit(json.dumps(obj, indent=2) + "\n", args)


def _emit_csv(header, rows, args, preamble=()):
    buf = io.StringIO()
    for line in preamble:
        buf.write(line + "\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_csv_cell(v) for v in row) + "\n")
    _emit(buf.getvalue(), args)


def _csv_cell(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _figure_path(args):
    if args.no_fig:
        return None
    if args.fig:
        return args.fig
    if args.out:
        return os.path.splitext(args.out)[0] + ".png"
    return None


def _dry_config(args, **extra):
    cfg = {"command": args.command, "out": args.out, "seed": args.seed,
           "threads": _threads(args)}
    cfg.update(extra)
    return cfg


# -- subcommand handlers ----------------------------------------------------


def _cmd_moments(args):
    f = _resolve_function(args)
    box, spacing = _grid_kwargs(args)
    if args.dry_run:
        _emit_json(_dry_config(args, function=f.to_dict(), method=args.method,
                               box=box, spacing=spacing), args)
        return 0
    rep = moments(f, method=args.method, box=box, spacing=spacing,
                  samples=args.samples, seed=args.seed, refine=args.refine)
    _emit_json(rep.to_dict(), args)
    return 0


def _cmd_polar(args):
    f = _resolve_function(args)
    box, spacing = _grid_kwargs(args)
    if args.dry_run:
        _emit_json(_dry_config(args, function=f.to_dict(), box=box, spacing=spacing), args)
        return 0
    pf = polar(f, box=box, spacing=spacing)
    if pf.kind == "grid":
        if not args.out:
            raise InputError("the polar has no closed descriptor; --out is required "
                             "to store its grid")
        save_function(pf, args.out)
        return 0
    _emit_json(pf.to_dict(), args)
    return 0


def _cmd_mahler(args):
    f = _resolve_function(args)
    box, spacing = _grid_kwargs(args)
    if args.dry_run:
        _emit_json(_dry_config(args, function=f.to_dict(), method=args.method,
                               box=box, spacing=spacing), args)
        return 0
    res = mahler(f, method=args.method, box=box, spacing=spacing)
    _emit_json(asdict(res), args)
    return 0


def _cmd_santalo(args):
    f = _resolve_function(args)
    box, spacing = _grid_kwargs(args)
    if args.dry_run:
        _emit_json(_dry_config(args, function=f.to_dict(), box=box, spacing=spacing,
                               tol=args.tol, maxiter=args.maxiter), args)
        return 0
    if args.product:
        res = volume_product(f, box=box, spacing=spacing, tol=args.tol,
                             maxiter=args.maxiter)
    else:
        res = santalo_point(f, box=box, spacing=spacing, tol=args.tol,
                            maxiter=args.maxiter)
    d = asdict(res)
    d["point"] = np.asarray(d["point"]).tolist()
    _emit_json(d, args)
    return 0


def _cmd_certify(args):
    f = _resolve_function(args)
    box, spacing = _grid_kwargs(args)
    if args.dry_run:
        _emit_json(_dry_config(args, function=f.to_dict(), method=args.method,
                               box=box, spacing=spacing), args)
        return 0
    cert = full_certificate(f, method=args.method, box=box, spacing=spacing)
    _emit_json(cert.to_dict(), args)
    return 0


def _cmd_logp(args):
    f = _resolve_function(args)
    box, spacing = _grid_kwargs(args)
    if args.dry_run:
        _emit_json(_dry_config(args, function=f.to_dict(), t=args.t,
                               method=args.method, box=box, spacing=spacing), args)
        return 0
    d1, d2 = logp_derivatives(f, args.t, method=args.method, box=box, spacing=spacing)
    _emit_json({"t": args.t, "logp_prime": d1, "logp_second": d2}, args)
    return 0


def _cmd_question4(args):
    if args.dry_run:
        _emit_json(_dry_config(args, t_min=args.t_min, t_max=args.t_max,
                               steps=args.steps, h=args.h, fig=_figure_path(args)), args)
        return 0
    scan = question4_scan(args.t_min, args.t_max, args.steps, h=args.h,
                          threads=_threads(args))
    rows = [(float(t), float(sc), float(sn))
            for t, sc, sn in zip(scan.ts, scan.s_closed, scan.s_numeric)]
    _emit_csv(("t", "S_closed", "S_numeric"), rows, args,
              preamble=(f"# t_star = {scan.t_star:.10f}",))
    fig = _figure_path(args)
    if fig:
        from .plotting import question4_figure

        question4_figure(scan, fig)
    return 0


_TABLE_REFS = {
    ("f0", "L"): lambda n: 1.0,
    ("f0", "L_hat"): lambda n: 1.0 / math.e,
    ("f1", "L_tilde"): lambda n: 1.0 / math.sqrt(2.0),
    ("f1", "L"): lambda n: 1.0 / math.sqrt(2.0),
    ("f_inf", "L_hat"): lambda n: 1.0 / math.sqrt(12.0),
    ("gaussian", "L_hat"): lambda n: 1.0 / math.sqrt(2.0 * math.pi * math.e),
    ("ball", "L"): lambda n: (n + 2.0) ** -0.5
    * (math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)) ** (-1.0 / n),
}


def slicing_table_rows(dims=(1, 2), method="auto"):
    """The extremal-constant table: conjectured maximizers f0/f1/f_inf and
    known minimizers gaussian/ball, with the closed reference values."""
    rows = []
    for n in dims:
        reports = {
            "f0": moments(make_builtin("f0", n), method=method),
            "f1": moments(make_builtin("f1", n), method=method),
            "f_inf": moments(make_builtin("f_inf", n), method=method),
            "gaussian": moments(make_builtin("gaussian", n), method=method),
            "ball": moments(indicator(make_body("ball", n)), method=method),
        }
        for fname, constant in (("f0", "L"), ("f0", "L_hat"), ("f1", "L_tilde"),
                                ("f1", "L"), ("f_inf", "L_hat"),
                                ("gaussian", "L_hat"), ("ball", "L")):
            rep = reports[fname]
            value = {"L": rep.L, "L_tilde": rep.L_tilde, "L_hat": rep.L_hat}[constant]
            rows.append({"function": fname, "constant": constant, "n": n,
                         "value": float(value), "reference": _TABLE_REFS[(fname, constant)](n)})
    return rows


def _cmd_slicing_table(args):
    dims = [int(d) for d in args.dims.split(",") if d]
    if args.dry_run:
        _emit_json(_dry_config(args, dims=dims, method=args.method,
                               fig=_figure_path(args)), args)
        return 0
    rows = slicing_table_rows(dims, method=args.method)
    _emit_csv(("function", "constant", "n", "value", "reference"),
              [(r["function"], r["constant"], r["n"], r["value"], r["reference"])
               for r in rows], args)
    fig = _figure_path(args)
    if fig:
        from .plotting import slicing_table_figure

        slicing_table_figure(rows, fig)
    return 0


def _cmd_km_limit(args):
    f = _resolve_function(args)
    ms = [float(m) for m in args.ms.split(",") if m]
    if args.dry_run:
        _emit_json(_dry_config(args, function=f.to_dict(), ms=ms,
                               counts=args.counts, fig=_figure_path(args)), args)
        return 0
    sweep = km_limit_sweep(f, ms, counts=args.counts)
    rows = [(float(m), float(r), sweep.limit, float(e))
            for m, r, e in zip(sweep.ms, sweep.ratios, sweep.abs_errs)]
    _emit_csv(("m", "ratio", "limit", "abs_err"), rows, args)
    fig = _figure_path(args)
    if fig:
        from .plotting import km_figure

        km_figure(sweep, fig)
    return 0


def _cmd_cone_lift(args):
    body = _resolve_body(args)
    if args.dry_run:
        _emit_json(_dry_config(args, body=body.to_dict(), method=args.method), args)
        return 0
    l_body = body.isotropic_constant()
    rep = moments(cone_lift(body), method=args.method)
    _emit_json({
        "body": body.to_dict(),
        "L_body": l_body,
        "L_hat_closed": cone_lift_lhat(l_body, body.dim),
        "L_hat": rep.L_hat,
        "barycenter": rep.to_dict()["barycenter"],
    }, args)
    return 0


def _cmd_body_stats(args):
    body = _resolve_body(args)
    if args.dry_run:
        _emit_json(_dry_config(args, body=body.to_dict(), body_method=args.body_method,
                               samples=args.samples), args)
        return 0
    st = body.stats(method=args.body_method, samples=args.samples, seed=args.seed)
    _emit_json({
        "kind": body.kind,
        "dim": body.dim,
        "volume": st.volume,
        "barycenter": np.asarray(st.barycenter).tolist(),
        "covariance": np.asarray(st.covariance).tolist(),
        "method": st.method,
        "se_volume": st.se_volume,
        "samples": st.samples,
        "isotropic_constant": body.isotropic_constant(),
    }, args)
    return 0


# -- parser -----------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="lclab",
                     description="Numerical toolkit for polar duality, Mahler "
                                 "volumes, and isotropic constants of "
                                 "log-concave functions.")
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("moments", parents=[], help="integral, barycenter, covariance, "
                         "entropy, varentropy, and the three isotropic constants")
    _add_function_args(sp)
    _add_quadrature_args(sp)
    _add_output_args(sp)
    sp.set_defaults(handler=_cmd_moments)

    sp = subs.add_parser("polar", help="polar dual f-polar as a descriptor (or grid files)")
    _add_function_args(sp)
    sp.add_argument("--box", metavar="JSON", help="discretization box when no closed polar applies")
    sp.add_argument("--spacing", metavar="JSON", help="discretization spacing")
    _add_output_args(sp)
    sp.set_defaults(handler=_cmd_polar)

    sp = subs.add_parser("mahler", help="volume product M(f) = int f * int f-polar")
    _add_function_args(sp)
    _add_quadrature_args(sp)
    _add_output_args(sp)
    sp.set_defaults(handler=_cmd_mahler)

    sp = subs.add_parser("santalo", help="Santalo point (and optionally the minimized product)")
    _add_function_args(sp)
    sp.add_argument("--box", metavar="JSON")
    sp.add_argument("--spacing", metavar="JSON")
    sp.add_argument("--tol", type=float, default=1e-8, help="gradient tolerance (default 1e-8)")
    sp.add_argument("--maxiter", type=int, default=100, help="Newton iteration cap (default 100)")
    sp.add_argument("--product", action="store_true",
                    help="also enforce the Blaschke-Santalo sanity bound on the product")
    _add_output_args(sp)
    sp.set_defaults(handler=_cmd_santalo)

    sp = subs.add_parser("certify", help="minimizer certificate: criticality residuals, "
                         "second-order margins, slicing product, logp derivatives")
    _add_function_args(sp)
    _add_quadrature_args(sp, methods=("auto", "closed", "grid"))
    _add_output_args(sp)
    sp.set_defaults(handler=_cmd_certify)

    sp = subs.add_parser("logp", help="derivatives of log p(t), p(t) = t^n int f^t int (f-polar)^t")
    _add_function_args(sp)
    sp.add_argument("--t", type=float, default=1.0, help="evaluation point (default 1)")
    _add_quadrature_args(sp, methods=("auto", "closed", "grid"))
    _add_output_args(sp)
    sp.set_defaults(handler=_cmd_logp)

    sp = subs.add_parser("question4", help="scan of S(t) = h(f^t) + h((f^t)-polar) for the "
                         "heavy-tailed cube extension, with the S = 1 crossing")
    sp.add_argument("--t-min", type=float, default=0.25, help="scan start (default 0.25)")
    sp.add_argument("--t-max", type=float, default=6.0, help="scan end (default 6)")
    sp.add_argument("--steps", type=int, default=24, help="scan points (default 24)")
    sp.add_argument("--h", type=float, default=5e-4,
                    help="target grid step of the quadrature cross-check (default 5e-4)")
    _add_output_args(sp, figure=True)
    sp.set_defaults(handler=_cmd_question4)

    sp = subs.add_parser("slicing-table", help="extremal isotropic constants "
                         "(conjectured maximizers f0/f1/f_inf, minimizers gaussian/ball)")
    sp.add_argument("--dims", default="1,2", help="comma-separated dimensions (default 1,2)")
    sp.add_argument("--method", choices=["auto", "closed", "grid"], default="auto")
    _add_output_args(sp, figure=True)
    sp.set_defaults(handler=_cmd_slicing_table)

    sp = subs.add_parser("km-limit", help="sweep of the section-body moment ratio toward "
                         "the entropic isotropic constant")
    _add_function_args(sp)
    sp.add_argument("--ms", default="5,10,20,50,100,200",
                    help="comma-separated exponents (default 5,10,20,50,100,200)")
    sp.add_argument("--counts", type=int, default=8001,
                    help="nodes per axis of the master grid (default 8001)")
    _add_output_args(sp, figure=True)
    sp.set_defaults(handler=_cmd_km_limit)

    sp = subs.add_parser("cone-lift", help="cone lift of a body and its entropic constant")
    _add_body_args(sp)
    sp.add_argument("--method", choices=["auto", "closed", "grid"], default="auto")
    _add_output_args(sp)
    sp.set_defaults(handler=_cmd_cone_lift)

    sp = subs.add_parser("body-stats", help="volume, barycenter, covariance of a convex body")
    _add_body_args(sp)
    sp.add_argument("--body-method", choices=["auto", "mc"], default="auto",
                    help="closed/decomposition statistics, or Monte Carlo rejection")
    sp.add_argument("--samples", type=int, default=10_000_000,
                    help="mc sample count (default 1e7)")
    _add_output_args(sp)
    sp.set_defaults(handler=_cmd_body_stats)

    return parser


def _add_body_args(sub):
    g = sub.add_argument_group("body input (exactly one source)")
    g.add_argument("--body-kind", choices=["cube", "ball", "cross_polytope", "simplex"],
                   help="named body")
    g.add_argument("--body-dim", type=int, default=1, help="dimension for --body-kind (default 1)")
    g.add_argument("--vertices", metavar="JSON", help="vertex list for a vertex polytope")
    g.add_argument("--body", metavar="PATH", help="JSON body descriptor file")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except InputError as exc:
        print(f"lclab: input error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"lclab: numerical error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"lclab: input error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
