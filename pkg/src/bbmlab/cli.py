"""Command-line front end.

Reports go to stdout (or --out) in canonical JSON (sorted keys,
two-space indent, trailing newline) or CSV; a one-line human summary
goes to stderr so piped output stays machine-readable.

Exit codes: 0 success (and verification passed where applicable),
1 a verification failed (sweep verdict, demo verdict, MC cross-check),
2 invalid usage or configuration.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import heisenberg as h1
from .constants import c_euclidean_closed, c_euclidean_mc, c_heisenberg_mc
from .energy import global_quotient, quotient_upper_bound
from .geometry import (
    EUCLID_SIDE,
    H1_SIDE,
    euclidean_space,
    glued_space,
    heisenberg_space,
    sphere_space,
    torus_space,
)
from .mc import RandomStream
from .sweep import (
    SweepConfig,
    render_csv,
    render_json,
    resolve_function,
    resolve_space,
    run_glued_demo,
    run_sweep,
)

DEFAULT_SEED = 20250815


def _floats(text):
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}")


def _emit(args, payload, csv_text=None):
    if args.format == "csv" and csv_text is None:
        rows = []

        def flatten(prefix, obj):
            if isinstance(obj, dict):
                for k in sorted(obj):
                    flatten(f"{prefix}{k}." if prefix else f"{k}.", obj[k]) if isinstance(
                        obj[k], (dict, list)) else rows.append((prefix + k, obj[k]))
            elif isinstance(obj, list):
                for i, v in enumerate(obj):
                    flatten(f"{prefix}{i}.", v) if isinstance(v, (dict, list)) else rows.append(
                        (f"{prefix}{i}", v))

        flatten("", payload)
        csv_text = "key,value\n" + "".join(
            f"{k},{v if not isinstance(v, float) else repr(v)}\n" for k, v in rows)
    text = csv_text if args.format == "csv" else render_json(payload)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _space_from_args(args):
    kind = args.space
    if kind == "euclidean":
        return euclidean_space(args.dim)
    if kind == "torus":
        if args.period is None:
            raise ValueError("torus needs --period")
        return torus_space(args.dim, args.period)
    if kind == "sphere2":
        return sphere_space()
    if kind == "heisenberg1":
        return heisenberg_space()
    if kind == "glued":
        return glued_space()
    raise ValueError(f"unknown space {kind!r}")


def _function_config_from_args(args):
    cfg = {"preset": args.function}
    if args.function == "sine":
        cfg["axis"] = args.axis
    elif args.function == "bump":
        if args.center is None or args.radius is None:
            raise ValueError("bump needs --center and --radius")
        cfg["center"] = args.center
        cfg["radius"] = args.radius
        if args.side is not None:
            cfg["side"] = args.side
    elif args.function == "linear":
        if args.vec is not None:
            cfg["v"] = args.vec
    elif args.function == "h1_horizontal_linear":
        if args.vec is not None:
            if len(args.vec) != 2:
                raise ValueError("h1_horizontal_linear takes --vec a,b")
            cfg["a"], cfg["b"] = args.vec
    return cfg


def _add_space_function_flags(sp):
    sp.add_argument("--space", required=True,
                    choices=["euclidean", "torus", "sphere2", "heisenberg1", "glued"])
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--period", type=float, default=None)
    sp.add_argument("--function", required=True,
                    choices=["sine", "sphere_height", "bump", "linear", "h1_horizontal_linear"])
    sp.add_argument("--axis", type=int, default=0)
    sp.add_argument("--center", type=_floats, default=None)
    sp.add_argument("--radius", type=float, default=None)
    sp.add_argument("--side", choices=[EUCLID_SIDE, H1_SIDE], default=None)
    sp.add_argument("--vec", type=_floats, default=None)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="bbmlab",
        description="Nonlocal-to-local energy experiments on model metric measure spaces")
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--out", default=None, help="write the report here instead of stdout")
    ap.add_argument("--format", choices=["json", "csv"], default="json")
    ap.add_argument("--workers", type=int, default=1)
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constant", help="tangent-model constants")
    csub = c.add_subparsers(dest="model", required=True)
    ce = csub.add_parser("euclidean")
    ce.add_argument("--p", type=float, required=True)
    ce.add_argument("--n", type=int, required=True)
    ce.add_argument("--mc", action="store_true",
                    help="cross-check the closed form by Monte Carlo")
    ce.add_argument("--samples", type=int, default=1 << 20)
    ch = csub.add_parser("heisenberg")
    ch.add_argument("--p", type=float, required=True)
    ch.add_argument("--samples", type=int, default=1 << 21)

    d = sub.add_parser("distance", help="metric evaluations")
    dsub = d.add_subparsers(dest="metric", required=True)
    dh = dsub.add_parser("h1")
    dh.add_argument("--x", type=_floats, required=True)
    dh.add_argument("--y", type=_floats, required=True)

    b = sub.add_parser("busemann", help="Busemann function along a horizontal line")
    b.add_argument("--dir", type=_floats, required=True, metavar="A,B")
    b.add_argument("--z", type=_floats, required=True)
    b.add_argument("--s-max", type=float, default=1000.0)
    b.add_argument("--points", type=int, default=12)
    b.add_argument("--sign", choices=["+", "-"], default="+")

    q = sub.add_parser("quotient", help="one nonlocal quotient Q_r(f)")
    _add_space_function_flags(q)
    q.add_argument("--p", type=float, required=True)
    q.add_argument("--r", type=float, required=True)
    q.add_argument("--outer", type=int, default=1 << 15)
    q.add_argument("--inner", type=int, default=64)

    s = sub.add_parser("sweep", help="radius sweep with extrapolation and verdict")
    s.add_argument("--config", default=None, help="JSON file with a full sweep config")
    s.add_argument("--space", choices=["euclidean", "torus", "sphere2", "heisenberg1", "glued"])
    s.add_argument("--dim", type=int, default=2)
    s.add_argument("--period", type=float, default=None)
    s.add_argument("--function",
                   choices=["sine", "sphere_height", "bump", "linear", "h1_horizontal_linear"])
    s.add_argument("--axis", type=int, default=0)
    s.add_argument("--center", type=_floats, default=None)
    s.add_argument("--radius", type=float, default=None)
    s.add_argument("--side", choices=[EUCLID_SIDE, H1_SIDE], default=None)
    s.add_argument("--vec", type=_floats, default=None)
    s.add_argument("--p", type=float, default=None)
    s.add_argument("--r-max", type=float, default=None)
    s.add_argument("--r-min", type=float, default=None)
    s.add_argument("--levels", type=int, default=5)
    s.add_argument("--outer", type=int, default=1 << 15)
    s.add_argument("--inner", type=int, default=64)
    s.add_argument("--tolerance", type=float, default=0.02)
    s.add_argument("--residual-bound", type=float, default=0.05)
    s.add_argument("--constant-samples", type=int, default=1 << 21)

    g = sub.add_parser("glued-demo", help="two-sided sweep on the glued space")
    g.add_argument("--p", type=float, default=4.0)
    g.add_argument("--outer", type=int, default=1 << 17)
    g.add_argument("--inner", type=int, default=64)
    g.add_argument("--levels", type=int, default=4)

    return ap


def _cmd_constant(args):
    if args.model == "euclidean":
        value = c_euclidean_closed(args.p, args.n)
        payload = {"command": "constant", "model": "euclidean",
                   "p": args.p, "n": args.n, "value": value, "source": "closed-form"}
        code = 0
        if args.mc:
            est = c_euclidean_mc(args.p, args.n, args.samples, RandomStream(args.seed))
            agree = est.agrees_with(value, n_sigma=4.0)
            payload["mc"] = {"value": est.value, "std_error": est.std_error,
                             "samples": est.samples,
                             "z": (est.value - value) / est.std_error if est.std_error else 0.0}
            payload["agreement"] = "pass" if agree else "fail"
            code = 0 if agree else 1
        _emit(args, payload)
        print(f"C({args.p:g}, {args.n}) = {value!r}", file=sys.stderr)
        return code
    est = c_heisenberg_mc(args.p, args.samples, RandomStream(args.seed),
                          workers=args.workers)
    payload = {"command": "constant", "model": "heisenberg", "p": args.p,
               "value": est.value, "std_error": est.std_error,
               "samples": est.samples, "seed": args.seed, "source": "monte-carlo"}
    _emit(args, payload)
    print(f"C({args.p:g}, H^1) = {est.value:.6f} +/- {est.std_error:.2g}", file=sys.stderr)
    return 0


def _cmd_distance(args):
    if len(args.x) != 3 or len(args.y) != 3:
        raise ValueError("h1 points have 3 coordinates")
    value = h1.cc_distance(h1.HPoint(*args.x), h1.HPoint(*args.y))
    _emit(args, {"command": "distance", "metric": "h1",
                 "x": args.x, "y": args.y, "value": value})
    print(f"d_cc = {value!r}", file=sys.stderr)
    return 0


def _cmd_busemann(args):
    if len(args.dir) != 2:
        raise ValueError("--dir takes a horizontal direction a,b")
    if len(args.z) != 3:
        raise ValueError("--z takes 3 coordinates")
    if args.s_max <= 1 or args.points < 2:
        raise ValueError("need --s-max > 1 and --points >= 2")
    s_values = tuple(np.geomspace(1.0, args.s_max, args.points))
    probe = h1.BusemannProbe(direction=(args.dir[0], args.dir[1]),
                             z=tuple(args.z), s_values=s_values)
    pairs = h1.busemann(probe, sign=args.sign)
    a, b = probe.direction
    sgn = 1.0 if args.sign == "+" else -1.0
    predicted = -sgn * (a * args.z[0] + b * args.z[1])
    rate = h1.busemann_rate(pairs, predicted)
    payload = {"command": "busemann", "dir": list(args.dir), "z": list(args.z),
               "sign": args.sign,
               "points": [{"s": s, "value": v} for s, v in pairs],
               "predicted_limit": predicted,
               "final_gap": pairs[-1][1] - predicted,
               "rate_coefficient": rate}
    _emit(args, payload)
    print(f"b(s_max) - limit = {pairs[-1][1] - predicted:.3e} (fitted C/s with C = {rate:.3g})",
          file=sys.stderr)
    return 0


def _cmd_quotient(args):
    space = _space_from_args(args)
    f = resolve_function(_function_config_from_args(args), space)
    est = global_quotient(space, f, args.p, args.r, args.outer, args.inner,
                          RandomStream(args.seed), workers=args.workers)
    bound = quotient_upper_bound(space, f, args.p, args.r)
    payload = {"command": "quotient", "space": space.describe(), "function": f.describe(),
               "p": args.p, "r": args.r, "value": est.value, "std_error": est.std_error,
               "samples": est.samples, "seed": args.seed,
               "upper_bound": bound, "within_bound": est.value <= bound}
    _emit(args, payload)
    print(f"Q_r = {est.value:.6g} +/- {est.std_error:.2g} (bound {bound:.3g})", file=sys.stderr)
    return 0


def _sweep_config_from_args(args):
    if args.config is not None:
        if any(getattr(args, k) is not None
               for k in ("space", "function", "p", "r_max", "r_min")):
            raise ValueError("--config replaces the individual sweep flags; drop them")
        with open(args.config) as fh:
            return SweepConfig.from_dict(json.load(fh))
    required = {"space": args.space, "function": args.function, "p": args.p,
                "r_max": args.r_max, "r_min": args.r_min}
    missing = [k for k, v in required.items() if v is None]
    if missing:
        raise ValueError(f"sweep needs --config or flags: missing {missing}")
    space_cfg = {"kind": args.space}
    if args.space in ("euclidean", "torus"):
        space_cfg["dim"] = args.dim
    if args.space == "torus":
        if args.period is None:
            raise ValueError("torus needs --period")
        space_cfg["period"] = args.period
    return SweepConfig(
        space=space_cfg,
        function=_function_config_from_args(args),
        p=args.p, r_max=args.r_max, r_min=args.r_min, levels=args.levels,
        outer_samples=args.outer, inner_samples=args.inner, seed=args.seed,
        tolerance=args.tolerance, residual_bound=args.residual_bound,
        constant_samples=args.constant_samples,
    )


def _cmd_sweep(args):
    config = _sweep_config_from_args(args)
    report = run_sweep(config, workers=args.workers)
    _emit(args, report.to_dict(), csv_text=render_csv(report) if args.format == "csv" else None)
    print(f"limit = {report.fit.limit:.6g}, reference = {report.reference:.6g}, "
          f"deviation = {100 * report.deviation:.2f}% (tolerance {100 * config.tolerance:g}%): "
          f"{'pass' if report.verdict else 'fail'}", file=sys.stderr)
    return 0 if report.verdict else 1


def _cmd_glued_demo(args):
    demo = run_glued_demo(p=args.p, seed=args.seed, workers=args.workers,
                          outer_samples=args.outer, inner_samples=args.inner,
                          levels=args.levels)
    _emit(args, demo)
    re_ = demo["ratios"][EUCLID_SIDE]
    rh = demo["ratios"][H1_SIDE]
    print(f"ratio[{EUCLID_SIDE}] = {re_['value']:.5f} (target {re_['target']}), "
          f"ratio[{H1_SIDE}] = {rh['value']:.5f} (target {rh['target']}), "
          f"separation = {demo['separation_sigma']:.1f} sigma: {demo['verdict']}",
          file=sys.stderr)
    return 0 if demo["verdict"] == "pass" else 1


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "constant":
            return _cmd_constant(args)
        if args.command == "distance":
            return _cmd_distance(args)
        if args.command == "busemann":
            return _cmd_busemann(args)
        if args.command == "quotient":
            return _cmd_quotient(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "glued-demo":
            return _cmd_glued_demo(args)
        raise ValueError(f"unknown command {args.command!r}")
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
