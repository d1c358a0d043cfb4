"""Command-line surface: critical-length runs, EC tests, parameter sweeps,
region scans, curve emission and oracle queries.

Outputs are deterministic: every numeric value is printed with 12
significant digits, CSV rows follow parameter order, and JSON keys are
sorted.  Exit codes follow sysexits conventions (64 usage, 65 data, 70
internal); the ectest subcommand instead reports its verdict as the exit
code (0 EC, 1 NotEC, 2 Inconclusive).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig
from .critlen import critical_length, critical_length_for_design
from .design import bernstein_basis, eval_curve
from .ectest import EC, INCONCLUSIVE, NOT_EC, ec_test
from .errors import EclengthError
from .expfam import RootSet, operator_from_json
from .oracles import (
    CLOSED_FORM_CASES,
    bessel_first_zero,
    brute_force_ec,
    solve_closed_form,
    wronskian_scan,
)
from .space import make_spliced, make_uniform, splice_from_json

EXIT_OK = 0
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_INTERNAL = 70


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _fmt(x) -> str:
    """12 significant digits, the single numeric format of all outputs."""
    return format(float(x), ".12g")


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return float(_fmt(v)) if math.isfinite(v) else str(v)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    return obj


def _emit_json(payload, out: str | None) -> None:
    text = json.dumps(_jsonify(payload), sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_rows(header, rows, out: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([c if isinstance(c, str) else _fmt(c) for c in row])
    if out:
        Path(out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


# ----------------------------------------------------------------------
# Operator and splice parsing

_ROOT_TOKEN = re.compile(
    r"^(?P<lhs>[^:]+):(?P<mult>\d+)(?:x(?P<rep>\d+))?$"
)


def parse_root_token(token: str):
    """Root shorthand ``re[,im]:mult`` with an optional ``xN`` repetition
    suffix multiplying the count, e.g. ``0:1x3`` == ``0:3``."""
    m = _ROOT_TOKEN.match(token)
    if not m:
        raise ValueError(f"bad root token {token!r}; grammar is re[,im]:mult[xN]")
    lhs = m.group("lhs")
    try:
        if "," in lhs:
            re_s, im_s = lhs.split(",", 1)
            re_v, im_v = float(re_s), float(im_s)
        else:
            re_v, im_v = float(lhs), 0.0
    except ValueError:
        raise ValueError(f"bad root token {token!r}; grammar is re[,im]:mult[xN]")
    mult = int(m.group("mult")) * int(m.group("rep") or 1)
    if im_v < 0:
        raise ValueError("im < 0 rejected; pairs are stored once with im > 0")
    if mult < 1:
        raise ValueError("multiplicity must be positive")
    return re_v, im_v, mult


def roots_from_tokens(tokens) -> RootSet:
    acc: dict = {}
    for tok in tokens:
        re_v, im_v, mult = parse_root_token(tok)
        acc[(re_v, im_v)] = acc.get((re_v, im_v), 0) + mult
    return RootSet(tuple((r, i, m) for (r, i), m in acc.items()))


_PRESET = re.compile(r"^(trig|hyp)(\d+)$")


def preset_operator(name: str) -> RootSet | None:
    """Named kernels: trigN = {1, x, .., x^{N-2}, cos, sin},
    hypN = {1, x, .., x^{N-2}, cosh, sinh}; dimension N+1."""
    m = _PRESET.match(name)
    if not m:
        return None
    n = int(m.group(2))
    if n < 1:
        raise ValueError("preset order must be >= 1")
    entries = []
    if n >= 2:
        entries.append((0.0, 0.0, n - 1))
    if m.group(1) == "trig":
        entries.append((0.0, 1.0, 1))
    else:
        entries.extend([(-1.0, 0.0, 1), (1.0, 0.0, 1)])
    return RootSet(tuple(entries))


def load_operator(spec: str):
    """Operator from a preset name, inline JSON, or a JSON file path."""
    preset = preset_operator(spec)
    if preset is not None:
        return preset
    if spec.lstrip().startswith("{"):
        return operator_from_json(json.loads(spec))
    path = Path(spec)
    if path.exists():
        return operator_from_json(json.loads(path.read_text()))
    raise ValueError(f"cannot interpret operator spec {spec!r}")


def _operator_from_args(args):
    given = [bool(args.operator), bool(args.coeffs), bool(args.roots)]
    if sum(given) != 1:
        raise _UsageError("give exactly one of --operator, --coeffs, --roots")
    if args.operator:
        return load_operator(args.operator)
    if args.coeffs:
        return operator_from_json({"coeffs": [float(c) for c in args.coeffs]})
    return roots_from_tokens(args.roots)


def _substitute(obj, symbol: str, value: float):
    if isinstance(obj, dict):
        return {k: _substitute(v, symbol, value) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_substitute(v, symbol, value) for v in obj]
    if isinstance(obj, str) and obj == symbol:
        return value
    return obj


def _cfg_from_args(args) -> RunConfig:
    kwargs = {}
    for field_name, attr in (
        ("tol_test", "tol_test"),
        ("tol_det", "tol_det"),
        ("tol_dicho", "tol_dicho"),
        ("ell0_factor", "ell0_factor"),
        ("k_max", "k_max"),
        ("seed", "seed"),
        ("jobs", "jobs"),
    ):
        if hasattr(args, attr) and getattr(args, attr) is not None:
            kwargs[field_name] = getattr(args, attr)
    if getattr(args, "check_sections", False):
        kwargs["check_sections"] = True
    return RunConfig(**kwargs)


# ----------------------------------------------------------------------
# Subcommands

def _cmd_critlen(args) -> int:
    op = _operator_from_args(args)
    cfg = _cfg_from_args(args)
    if args.design:
        result = critical_length_for_design(op, cfg)
    else:
        result = critical_length(op, cfg)
    _emit_json(result.to_dict(include_trace=args.trace), args.out)
    return EXIT_OK


def _load_space(args):
    spec = args.space
    if spec.lstrip().startswith("{") or Path(spec).exists():
        text = spec if spec.lstrip().startswith("{") else Path(spec).read_text()
        obj = json.loads(text)
        if "sections" in obj:
            return splice_from_json(obj)
        op = operator_from_json(obj)
    else:
        op = load_operator(spec)
    if args.interval is None:
        raise _UsageError("--interval a b is required for a single-operator space")
    a, b = args.interval
    return make_uniform(op, a, args.knots or [], b)


def _cmd_ectest(args) -> int:
    sp = _load_space(args)
    cfg = _cfg_from_args(args)
    if args.debug_gamma:
        cfg = RunConfig(**{**cfg.__dict__, "keep_levels": True})
    report = ec_test(sp, cfg)
    _emit_json(report.to_dict(include_levels=args.debug_gamma), args.out)
    return {EC: 0, NOT_EC: 1, INCONCLUSIVE: 2}[report.verdict]


def _sweep_point(payload):
    template_json, symbol, value, design, cfg_kwargs = payload
    cfg = RunConfig(**cfg_kwargs)
    obj = _substitute(json.loads(template_json), symbol, value)
    op = operator_from_json(obj)
    res = critical_length_for_design(op, cfg) if design else critical_length(op, cfg)
    return (
        value,
        res.value,
        res.mu if res.mu is not None else "",
        res.ell0 if res.ell0 is not None else "",
    )


def _cmd_sweep(args) -> int:
    template = args.template
    if not template.lstrip().startswith("{"):
        template = Path(template).read_text()
    json.loads(template)  # validate early
    b0, b1, steps = args.range
    steps = int(steps)
    if steps < 1:
        raise _UsageError("sweep needs at least one step")
    values = np.linspace(float(b0), float(b1), steps)
    cfg = _cfg_from_args(args)
    cfg_kwargs = {
        "tol_test": cfg.tol_test,
        "tol_det": cfg.tol_det,
        "tol_dicho": cfg.tol_dicho,
        "ell0_factor": cfg.ell0_factor,
        "k_max": cfg.k_max,
        "keep_trace": False,
    }
    payloads = [(template, args.symbol, float(v), args.design, cfg_kwargs)
                for v in values]
    if cfg.jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_sweep_point, payloads))
    else:
        rows = [_sweep_point(p) for p in payloads]
    _emit_rows(("param", "value", "mu", "ell0"), rows, args.out)
    if args.plot:
        from . import plotting

        plotting.render_sweep(rows, args.plot, xlabel=args.symbol)
    return EXIT_OK


_SPLICE_TOKEN = re.compile(r"^(trig|hyp):(.+)$")


def parse_splice_template(tokens, n: int):
    """Tokens like ``trig:T hyp:H`` with symbolic or literal lengths."""
    kinds = {}
    out = []
    symbols = set()
    for tok in tokens:
        m = _SPLICE_TOKEN.match(tok)
        if not m:
            raise ValueError(f"bad splice token {tok!r}; use kind:length with kind trig|hyp")
        kind, length = m.group(1), m.group(2)
        if kind not in kinds:
            from .expfam import build_family

            kinds[kind] = build_family(preset_operator(f"{kind}{n}"))
        if length in ("T", "H"):
            symbols.add(length)
            out.append((kinds[kind], length))
        else:
            out.append((kinds[kind], float(length)))
    if "T" not in symbols or "H" not in symbols:
        raise ValueError("splice template must use both symbols T and H")
    return out


def make_template_space(template, t_value: float, h_value: float):
    specs = []
    for fam, length in template:
        if length == "T":
            specs.append((fam, t_value))
        elif length == "H":
            specs.append((fam, h_value))
        else:
            specs.append((fam, length))
    return make_spliced(specs)


def _failing_index(report) -> int:
    if report.failure is not None and report.failure.stage == "step0" \
            and len(report.failure.index) == 2:
        return int(report.failure.index[0])
    return -1


def region_boundary(make_space, h_min: float, h_max: float, tol: float,
                    cfg: RunConfig):
    """Binary search for the EC-to-NotEC transition along H.

    Returns (h_star, failing_index, kind) with kind "interior" for a real
    transition, "ceiling" when the whole column is EC up to h_max, and
    "floor" when even h_min fails.  Assumes the verdict is monotone in H.
    """
    report_hi = ec_test(make_space(h_max), cfg)
    if report_hi.verdict == EC:
        return h_max, -2, "ceiling"
    report_lo = ec_test(make_space(h_min), cfg)
    if report_lo.verdict != EC:
        return h_min, _failing_index(report_lo), "floor"
    lo, hi = h_min, h_max
    last_fail = report_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        rep = ec_test(make_space(mid), cfg)
        if rep.verdict == EC:
            lo = mid
        else:
            hi = mid
            last_fail = rep
    return 0.5 * (lo + hi), _failing_index(last_fail), "interior"


def emit_region(template, t_values, h_values, tol: float, cfg: RunConfig):
    """Raster of verdicts plus a refined boundary polyline.

    Boundary rows carry the Step-0 determinant index that fails just above
    the boundary (or -1 when the failure is a positivity violation), and a
    cusp flag set where that index changes between neighbouring columns.
    """
    raster = []
    boundary = []
    prev_index = None
    for t in t_values:
        for h in h_values:
            rep = ec_test(make_template_space(template, t, h), cfg)
            raster.append((t, h, rep.verdict, _failing_index(rep)))
        h_star, idx, kind = region_boundary(
            lambda hv: make_template_space(template, t, hv),
            h_values[0], h_values[-1], tol, cfg,
        )
        cusp = int(prev_index is not None and idx != prev_index and kind == "interior")
        boundary.append((t, h_star if kind != "floor" else math.nan, idx, cusp, kind))
        prev_index = idx if kind == "interior" else prev_index
    return raster, boundary


def _cmd_region(args) -> int:
    cfg = _cfg_from_args(args)
    cfg = RunConfig(**{**cfg.__dict__, "check_sections": True})
    template = parse_splice_template(args.splice, args.n)
    t_lo, t_hi = args.t_range
    h_lo, h_hi = args.h_range
    t_values = [float(v) for v in np.linspace(t_lo, t_hi, args.grid)]
    h_values = [float(v) for v in np.linspace(h_lo, h_hi, args.h_steps)]
    raster, boundary = emit_region(template, t_values, h_values, args.tol, cfg)
    _emit_rows(("T", "H", "verdict", "failing_det_index"), raster, args.out)
    if args.boundary:
        rows = [(t, h, i, str(c)) for t, h, i, c, _kind in boundary]
        _emit_rows(("T", "H_star", "failing_det_index", "cusp"), rows, args.boundary)
    if args.plot:
        from . import plotting

        plotting.render_region(raster, boundary, args.plot)
    return EXIT_OK


def write_svg(polyline: np.ndarray, control: np.ndarray, stream) -> None:
    """Minimal SVG: the curve polyline over its control polygon."""
    pts = np.vstack([polyline, control])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    width, height, margin = 640.0, 480.0, 20.0

    def map_pt(p):
        x = margin + (p[0] - lo[0]) / span[0] * (width - 2 * margin)
        y = height - margin - (p[1] - lo[1]) / span[1] * (height - 2 * margin)
        return f"{_fmt(x)},{_fmt(y)}"

    stream.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">\n'
    )
    ctrl_path = " ".join(map_pt(p) for p in control)
    stream.write(
        f'  <polyline points="{ctrl_path}" fill="none" stroke="#999999" '
        'stroke-dasharray="4 3" stroke-width="1"/>\n'
    )
    curve_path = " ".join(map_pt(p) for p in polyline)
    stream.write(
        f'  <polyline points="{curve_path}" fill="none" stroke="#cc3333" '
        'stroke-width="2"/>\n'
    )
    for p in control:
        xy = map_pt(p).split(",")
        stream.write(f'  <circle cx="{xy[0]}" cy="{xy[1]}" r="3" fill="#555555"/>\n')
    stream.write("</svg>\n")


def _cmd_curve(args) -> int:
    op = load_operator(args.operator)
    a, b = args.interval
    sp = make_uniform(op, a, [], b)
    nb = bernstein_basis(sp, a, b)
    control = np.loadtxt(args.control, delimiter=",", ndmin=2)
    polyline = eval_curve(nb, control, samples=args.samples)
    if args.output == "svg":
        if polyline.shape[1] != 2:
            raise ValueError("SVG output needs two-dimensional control points")
        if args.out:
            with open(args.out, "w") as fh:
                write_svg(polyline, control, fh)
        else:
            write_svg(polyline, control, sys.stdout)
    else:
        _emit_rows(
            tuple(f"x{d}" for d in range(polyline.shape[1])),
            [tuple(row) for row in polyline],
            args.out,
        )
    if args.plot:
        from . import plotting

        plotting.render_curve(polyline, control, args.plot)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    if args.case == "bessel":
        val = bessel_first_zero(args.order)
        payload = {"method": val.method, "value": val.value,
                   "bracket": list(val.bracket)}
    elif args.case == "closed-form":
        val = solve_closed_form(args.form, args.a, args.b)
        payload = {"method": val.method, "value": val.value,
                   "bracket": list(val.bracket)}
    elif args.case == "wronskian":
        op = load_operator(args.operator)
        zero = wronskian_scan(op, args.k, args.h_max, args.step)
        payload = {"method": "wronskian-scan", "k": args.k,
                   "first_zero": zero if zero is not None else None}
    elif args.case == "brute":
        op = load_operator(args.operator)
        a, b = args.interval
        sp = make_uniform(op, a, args.knots or [], b)
        payload = {"method": "determinant-grid", "grid": args.grid,
                   "verdict": brute_force_ec(sp, grid=args.grid)}
    else:
        raise _UsageError(f"unknown oracle {args.case!r}")
    _emit_json(payload, args.out)
    return EXIT_OK


# ----------------------------------------------------------------------
# Parser assembly

def _add_common(p, dicho: bool = False):
    p.add_argument("--tol-test", dest="tol_test", type=float, default=None,
                   help="zero/positivity tolerance of the EC test (default 1e-9)")
    p.add_argument("--tol-det", dest="tol_det", type=float, default=None,
                   help="relative endpoint-determinant threshold (default 1e-12)")
    p.add_argument("--seed", type=int, default=None, help="seed echoed into outputs")
    p.add_argument("--out", default=None, help="write output to this file")
    if dicho:
        p.add_argument("--tol-dicho", dest="tol_dicho", type=float, default=None,
                       help="dichotomy bracket tolerance (default 1e-10)")
        p.add_argument("--ell0-factor", dest="ell0_factor", type=float, default=None,
                       help="safe-section shrink factor in (0,1) (default 0.95)")
        p.add_argument("--k-max", dest="k_max", type=int, default=None,
                       help="rough-estimate probe limit (default 64)")


def build_parser() -> _Parser:
    parser = _Parser(prog="eclength", description=__doc__)
    parser.add_argument("--version", action="version", version=f"eclength {__version__}")
    sub = parser.add_subparsers(dest="cmd")

    p = sub.add_parser("critlen", parents=[], help="critical length of an operator")
    p.add_argument("--operator", help="preset name (trigN/hypN), inline JSON, or JSON file")
    p.add_argument("--coeffs", nargs="+", default=None,
                   help="low-order coefficients a0..an of the monic polynomial")
    p.add_argument("--roots", nargs="+", default=None,
                   help="root tokens re[,im]:mult[xN]")
    p.add_argument("--design", action="store_true",
                   help="critical length for design (deflate one zero root)")
    p.add_argument("--trace", action="store_true", help="include the probe trace")
    _add_common(p, dicho=True)
    p.set_defaults(func=_cmd_critlen)

    p = sub.add_parser("ectest", help="EC verdict for a space on an interval")
    p.add_argument("--space", required=True,
                   help="operator spec, or splice JSON with a sections list")
    p.add_argument("--interval", nargs=2, type=float, default=None, metavar=("A", "B"))
    p.add_argument("--knots", nargs="*", type=float, default=None)
    p.add_argument("--check-sections", dest="check_sections", action="store_true",
                   help="sample-check positivity of every section basis")
    p.add_argument("--debug-gamma", action="store_true",
                   help="keep and emit the per-level coefficient tensors")
    _add_common(p)
    p.set_defaults(func=_cmd_ectest)

    p = sub.add_parser("sweep", help="critical length along a one-parameter family")
    p.add_argument("--template", required=True,
                   help="operator JSON with one free symbol (inline or file)")
    p.add_argument("--range", nargs=3, required=True, metavar=("B0", "B1", "STEPS"))
    p.add_argument("--symbol", default="b", help="free symbol name (default b)")
    p.add_argument("--design", action="store_true")
    p.add_argument("--jobs", type=int, default=None, help="worker processes")
    p.add_argument("--plot", default=None, help="also render a PNG figure here")
    _add_common(p, dicho=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("region", help="EC region scan for a two-parameter splice")
    p.add_argument("--splice", nargs="+", required=True,
                   help="section tokens kind:length with symbols T and H")
    p.add_argument("--n", type=int, required=True, help="preset order of the sections")
    p.add_argument("--grid", type=int, default=40, help="columns along T")
    p.add_argument("--h-steps", dest="h_steps", type=int, default=16,
                   help="raster rows along H")
    p.add_argument("--t-range", dest="t_range", nargs=2, type=float,
                   default=(0.1, 3.0), metavar=("LO", "HI"))
    p.add_argument("--h-range", dest="h_range", nargs=2, type=float,
                   default=(0.05, 6.0), metavar=("LO", "HI"))
    p.add_argument("--tol", type=float, default=1e-8, help="boundary refinement tolerance")
    p.add_argument("--boundary", default=None, help="write the boundary CSV here")
    p.add_argument("--plot", default=None, help="also render a PNG figure here")
    _add_common(p)
    p.set_defaults(func=_cmd_region)

    p = sub.add_parser("curve", help="design curve for a control polygon")
    p.add_argument("--operator", required=True)
    p.add_argument("--interval", nargs=2, type=float, required=True, metavar=("A", "B"))
    p.add_argument("--control", required=True, help="CSV file of control points")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--output", choices=("csv", "svg"), default="csv")
    p.add_argument("--plot", default=None, help="also render a PNG figure here")
    _add_common(p)
    p.set_defaults(func=_cmd_curve)

    p = sub.add_parser("oracle", help="independent ground-truth values")
    osub = p.add_subparsers(dest="case")
    q = osub.add_parser("bessel")
    q.add_argument("--order", type=float, required=True)
    _add_common(q)
    q = osub.add_parser("closed-form")
    q.add_argument("--case", dest="form", choices=CLOSED_FORM_CASES, required=True)
    q.add_argument("--a", type=float, default=1.0)
    q.add_argument("--b", type=float, default=1.0)
    _add_common(q)
    q = osub.add_parser("wronskian")
    q.add_argument("--operator", required=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--h-max", dest="h_max", type=float, required=True)
    q.add_argument("--step", type=float, default=None)
    _add_common(q)
    q = osub.add_parser("brute")
    q.add_argument("--operator", required=True)
    q.add_argument("--interval", nargs=2, type=float, required=True, metavar=("A", "B"))
    q.add_argument("--knots", nargs="*", type=float, default=None)
    q.add_argument("--grid", type=int, default=200)
    _add_common(q)
    p.set_defaults(func=_cmd_oracle)

    return parser


def run(argv) -> int:
    """Entry point used by the console script; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "cmd", None) is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    if args.cmd == "oracle" and getattr(args, "case", None) is None:
        print("usage error: choose an oracle subcommand", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EclengthError, ValueError, KeyError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
