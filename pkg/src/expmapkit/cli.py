"""Command-line interface.

Every subcommand writes into ``--out`` (created if missing) under fixed file
names.  Options can also come from a flat ``key=value`` file given with
``--config``; flags on the command line win.

Exit codes: 0 success, 1 a verification suite failed, 2 bad configuration or
input, 3 numerical non-convergence, 4 the parameter does not meet a
precondition (for instance the singular value does not escape).
"""
from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import io, plotting
from .dynamics import DEFAULT_T, as_parameter
from .errors import (
    ConfigError,
    ExpMapError,
    GammaThroughSingularValue,
    IncompatibleAddress,
    InvalidInput,
    LocateFailed,
    NonMonotoneCurves,
    NotConverged,
    NotEscaping,
    OutOfTracedRange,
    PrefixTooShort,
    PreconditionViolated,
    PullbackHitSingularValue,
    RangeExceeded,
)
from .partition import (
    build_partition,
    itinerary,
    kneading,
    minimal_exp_bound,
    periodicity_check,
    ray_itinerary,
    ray_orbit,
)
from .probe import (
    SingularEscapes,
    class_to_dict,
    classify_parameter,
    disconnection_witness,
    escape_grid,
    label_components,
    predict_connectivity,
    KneadingEvidence,
)
from .rays import ExternalAddress, singular_ray, trace_polyline, trace_ray
from .verify import SUITES, run_suites

EXIT_OK = 0
EXIT_SUITE_FAILED = 1
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3
EXIT_PRECONDITION = 4

MAX_CELLS = 8192 * 8192
DEFAULT_BOX = (-4.0, 4.0, -4.0, 4.0)

_EXIT_CODES = (
    ((ConfigError, InvalidInput, IncompatibleAddress, PrefixTooShort), EXIT_CONFIG),
    ((NotConverged, LocateFailed, PullbackHitSingularValue, RangeExceeded), EXIT_NOT_CONVERGED),
    (
        (
            NotEscaping,
            PreconditionViolated,
            GammaThroughSingularValue,
            NonMonotoneCurves,
            OutOfTracedRange,
        ),
        EXIT_PRECONDITION,
    ),
)


def exit_code_for(exc: BaseException) -> int:
    for kinds, code in _EXIT_CODES:
        if isinstance(exc, kinds):
            return code
    return EXIT_SUITE_FAILED


# ---------------------------------------------------------------------------
# argument types


def _floats(text, n, what):
    parts = [p for p in str(text).replace(",", " ").split()]
    if len(parts) != n:
        raise argparse.ArgumentTypeError(f"{what} needs {n} numbers, got {text!r}")
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number in {what} {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"{what} must be finite")
    return vals


def box_arg(text):
    """RE_LO,RE_HI,IM_LO,IM_HI"""
    box = _floats(text, 4, "box")
    if not (box[0] < box[1] and box[2] < box[3]):
        raise argparse.ArgumentTypeError(f"box {text!r} is empty")
    return box


def resolution_arg(text):
    """WxH, or a single N for a square grid."""
    parts = str(text).lower().split("x")
    try:
        dims = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad resolution {text!r}") from None
    if len(dims) == 1:
        dims = dims * 2
    if len(dims) != 2 or min(dims) < 2:
        raise argparse.ArgumentTypeError(f"bad resolution {text!r}")
    return tuple(dims)


def point_arg(text):
    re, im = _floats(text, 2, "point")
    return complex(re, im)


def positive_float(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def suites_arg(text):
    names = tuple(s.strip() for s in str(text).split(",") if s.strip())
    if not names or (len(names) == 1 and names[0] == "all"):
        return SUITES
    bad = [n for n in names if n not in SUITES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown suite(s) {bad}; choose from {SUITES}")
    return names


# ---------------------------------------------------------------------------
# parser


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--a-re", type=float, default=0.0, help="real part of a")
    p.add_argument("--a-im", type=float, default=0.0, help="imaginary part of a")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--config", help="key=value file; command-line flags override it")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget-n", type=positive_int, help="iteration budget n_max")
    p.add_argument("--threshold-T", dest="threshold_T", type=positive_float, default=DEFAULT_T)
    return p


def _partition_flags(p):
    p.add_argument("--K", type=positive_int, default=2, help="strips eta_-K..eta_K kept")
    p.add_argument("--R", type=float, default=0.0, help="M is measured where Re >= R")
    p.add_argument("--eps", type=positive_float, default=1e-6, help="boundary ambiguity width")
    p.add_argument("--p-max", type=positive_int, default=4, help="longest period tested")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expmapkit", description="Numerical experiments on the maps exp(z) + a."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()

    p = sub.add_parser("render", parents=[common], help="escape-time image of a box")
    p.add_argument("--box", type=box_arg, default=DEFAULT_BOX)
    p.add_argument("--resolution", type=resolution_arg, default=(512, 512))
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("ray", parents=[common], help="sample a dynamic ray")
    p.add_argument("--address", help='e.g. "0,1;const:0" or ";per:0,1"')
    p.add_argument("--t-lo", type=positive_float, default=0.5)
    p.add_argument("--t-hi", type=positive_float, default=10.0)
    p.add_argument("--count", type=positive_int, default=50)
    p.add_argument("--depth", type=positive_int, default=12)
    p.add_argument("--tol", type=positive_float, default=1e-9)
    p.set_defaults(func=cmd_ray)

    p = sub.add_parser("itinerary", parents=[common], help="strip itinerary of a point or ray point")
    p.add_argument("--point", type=point_arg, help="RE,IM")
    p.add_argument("--ray-address")
    p.add_argument("--ray-t", type=positive_float)
    p.add_argument("--m", type=positive_int, default=10, help="itinerary length")
    p.add_argument("--depth", type=positive_int, default=12)
    p.add_argument("--tol", type=positive_float, default=1e-9)
    _partition_flags(p)
    p.set_defaults(func=cmd_itinerary)

    p = sub.add_parser("kneading", parents=[common], help="itinerary of the singular value")
    p.add_argument("--m", type=positive_int, default=12)
    _partition_flags(p)
    p.set_defaults(func=cmd_kneading)

    p = sub.add_parser("classify", parents=[common], help="classify the parameter")
    p.add_argument("--p-max", type=positive_int, default=16)
    p.add_argument("--burn-in", type=int, default=500)
    p.add_argument("--tol", type=positive_float, default=1e-9)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("probe", parents=[common], help="grid components and a disconnection witness")
    p.add_argument("--box", type=box_arg, default=DEFAULT_BOX)
    p.add_argument("--resolution", type=resolution_arg, default=(256, 256))
    p.add_argument("--min-blocker", type=positive_int, default=3)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("verify", parents=[common], help="run the property suites")
    p.add_argument("--suite", type=suites_arg, default=SUITES, help="comma list or 'all'")
    p.add_argument("--samples", type=positive_int, default=100_000, help="elementary-chain samples")
    p.set_defaults(func=cmd_verify)
    return parser


def read_config(path) -> dict:
    """Flat key=value lines; '#' starts a comment.  Keys use flag spelling
    with or without the leading dashes."""
    out = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if not key:
            raise ConfigError(f"{path}:{n}: empty key")
        out[key] = value
    return out


def _subparsers(parser) -> dict:
    for action in parser._subparsers._group_actions:
        return dict(action.choices)
    return {}


def parse_args(argv=None, parser=None):
    """Parse the command line, then fill unset options from ``--config``.

    One config file can serve every subcommand: keys that belong to another
    subcommand are ignored, keys no subcommand knows are an error.
    """
    parser = parser or build_parser()
    args = parser.parse_args(argv)
    if not args.config:
        return args
    cfg = read_config(args.config)
    cfg.pop("config", None)
    subs = _subparsers(parser)
    known = {a.dest for sp in subs.values() for a in sp._actions} - {"help"}
    unknown = sorted(k for k in cfg if k not in known)
    if unknown:
        raise ConfigError(f"unknown config key(s): {unknown}")
    sp = subs[args.command]
    mine = {a.dest for a in sp._actions}
    # string defaults go through each option's type, so the config file is
    # parsed exactly like the command line
    sp.set_defaults(**{k: v for k, v in cfg.items() if k in mine})
    return parser.parse_args(argv)


# ---------------------------------------------------------------------------
# commands


def _param(args) -> complex:
    return as_parameter(complex(args.a_re, args.a_im))


def _outdir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _path(args, name) -> str:
    return os.path.join(args.out, name)


def _check_cells(resolution):
    w, h = resolution
    if w * h > MAX_CELLS:
        raise ConfigError(f"resolution {w}x{h} exceeds the cap of {MAX_CELLS} cells")


def cmd_render(args) -> int:
    a = _param(args)
    _check_cells(args.resolution)
    n_max = args.budget_n or 200
    g = escape_grid(a, args.box, args.resolution, n_max=n_max, T=args.threshold_T)
    esc = label_components(g, "escaping")
    non = label_components(g, "nonescaping")
    _outdir(args)
    io.write_ppm(_path(args, "render.ppm"), g)
    io.write_xgrid(_path(args, "render.xgrid"), g)
    io.write_json(
        _path(args, "render.json"),
        {
            "command": "render",
            "a": a,
            "box": list(g.box),
            "resolution": [g.width, g.height],
            "n_max": g.n_max,
            "T": g.T,
            "black_fraction": float((~g.escaped).mean()),
            "components": {"escaping": esc.to_dict(), "nonescaping": non.to_dict()},
        },
    )
    return EXIT_OK


def cmd_ray(args) -> int:
    a = _param(args)
    # parse before touching the file system: a bad address writes nothing
    if args.address is None:
        raise ConfigError("ray needs --address")
    s = ExternalAddress.parse(args.address)
    if not args.t_lo < args.t_hi:
        raise ConfigError("need t-lo < t-hi")
    line = trace_polyline(a, s, args.t_lo, args.t_hi, args.count, args.depth, args.tol)
    _outdir(args)
    io.write_ray_csv(_path(args, "ray.csv"), line)
    io.write_json(
        _path(args, "ray.json"),
        {
            "command": "ray",
            "a": a,
            "address": str(s),
            "witness": s.witness,
            "t_range": [args.t_lo, args.t_hi],
            "count": args.count,
            "depth": args.depth,
            "tol": args.tol,
            "max_residual": line.max_residual(),
        },
    )
    plotting.plot_ray(_path(args, "ray.png"), line)
    return EXIT_OK


def _partition_for(a, args):
    n_max = args.budget_n or 1000
    cls = classify_parameter(a, n_max=n_max, T=args.threshold_T)
    if not isinstance(cls, SingularEscapes):
        raise NotEscaping(
            f"a = {a!r} is {cls.name} at budget {n_max}; the strip partition needs an escaping singular value"
        )
    gamma = singular_ray(a, n_max=n_max, T=args.threshold_T)
    return build_partition(a, gamma, K=args.K, R=args.R), cls


def _period(it, p_max):
    p_max = min(p_max, len(it) // 3)
    if p_max < 1:
        return None
    return periodicity_check(it, p_max)


def _itinerary_report(command, a, p, it, p_max, extra):
    x_star = minimal_exp_bound(it) if len(it) else None
    period = _period(it, p_max)
    doc = {"command": command, "a": a, "m": extra.pop("m")}
    doc.update(extra)
    doc.update(io.itinerary_doc(it, x_star, p.constants(), period))
    return doc, period


def cmd_itinerary(args) -> int:
    a = _param(args)
    if (args.point is None) == (args.ray_address is None):
        raise ConfigError("give exactly one of --point or --ray-address")
    s = None
    if args.ray_address is not None:
        s = ExternalAddress.parse(args.ray_address)
        if args.ray_t is None:
            raise ConfigError("--ray-address needs --ray-t")
    p, _ = _partition_for(a, args)
    if s is None:
        z = args.point
        it = itinerary(p, z, args.m, args.eps)
        extra = {"m": args.m, "point": z}
        orbit_pts = _float_orbit(a, z, len(it))
    else:
        pt = trace_ray(a, s, args.ray_t, args.depth, args.tol)
        it = ray_itinerary(p, pt, args.m, args.eps)
        extra = {"m": args.m, "ray": {"address": str(s), "t": pt.t, "z": pt.z, "residual": pt.residual}}
        orbit_pts = [complex(x, y) for x, y in ray_orbit(a, pt, len(it)) if math.isfinite(x)]
    doc, _ = _itinerary_report("itinerary", a, p, it, args.p_max, extra)
    _outdir(args)
    io.write_json(_path(args, "itinerary.json"), doc)
    plotting.plot_partition(_path(args, "itinerary.png"), p, _visible(p, orbit_pts))
    return EXIT_OK


def _float_orbit(a, z, n):
    out = [complex(z)]
    with np.errstate(over="ignore"):
        for _ in range(n - 1):
            z = out[-1]
            if z.real > 700:
                break
            out.append(complex(np.exp(z)) + a)
    return out


def _visible(p, pts):
    lo, hi = p.re_range
    return [z for z in pts if lo <= z.real <= hi + 10.0 and abs(z.imag) < 40.0]


def cmd_kneading(args) -> int:
    a = _param(args)
    p, cls = _partition_for(a, args)
    it = kneading(p, args.m, args.eps)
    doc, period = _itinerary_report("kneading", a, p, it, args.p_max, {"m": args.m})
    evidence = KneadingEvidence(accessible=True, period=None if period is None else period.period)
    doc["prediction"] = predict_connectivity(cls, evidence).to_dict()
    _outdir(args)
    io.write_json(_path(args, "kneading.json"), doc)
    plotting.plot_partition(_path(args, "kneading.png"), p, _visible(p, _float_orbit(a, a, len(it))))
    return EXIT_OK


def cmd_classify(args) -> int:
    a = _param(args)
    cls = classify_parameter(
        a,
        n_max=args.budget_n or 1000,
        p_max=args.p_max,
        burn_in=args.burn_in,
        tol=args.tol,
        T=args.threshold_T,
    )
    _outdir(args)
    io.write_json(
        _path(args, "classify.json"),
        {"command": "classify", "a": a, **class_to_dict(cls), "prediction": predict_connectivity(cls).to_dict()},
    )
    return EXIT_OK


def cmd_probe(args) -> int:
    a = _param(args)
    _check_cells(args.resolution)
    g = escape_grid(a, args.box, args.resolution, n_max=args.budget_n or 200, T=args.threshold_T)
    wit = disconnection_witness(g, args.min_blocker)
    _outdir(args)
    io.write_xgrid(_path(args, "probe.xgrid"), g)
    io.write_ppm(_path(args, "probe.ppm"), g)
    io.write_json(
        _path(args, "probe.json"),
        {
            "command": "probe",
            "a": a,
            "box": list(g.box),
            "resolution": [g.width, g.height],
            "n_max": g.n_max,
            "T": g.T,
            "components": {
                "escaping": label_components(g, "escaping").to_dict(),
                "nonescaping": label_components(g, "nonescaping").to_dict(),
            },
            # a finite grid can exhibit a separation, never certify connectivity
            "witness": None if wit is None else wit.to_dict(),
        },
    )
    plotting.plot_grid(_path(args, "probe.png"), g, wit)
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_suites(args.suite, seed=args.seed, elementary_samples=args.samples)
    passed = all(r["passed"] for r in results.values())
    _outdir(args)
    io.write_json(
        _path(args, "verify.json"),
        {"command": "verify", "seed": args.seed, "suites": results, "passed": passed},
    )
    return EXIT_OK if passed else EXIT_SUITE_FAILED


def main(argv=None) -> int:
    parser = build_parser()
    try:
        try:
            args = parse_args(argv, parser)
        except SystemExit as exc:
            # argparse already printed usage; hand back its code (0 for --help)
            return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
        return args.func(args)
    except ExpMapError as exc:
        code = exit_code_for(exc)
        print(f"expmapkit: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    except OSError as exc:
        print(f"expmapkit: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
