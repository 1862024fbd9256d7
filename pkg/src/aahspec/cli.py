"""Command-line front end.

Every subcommand writes one table (CSV or JSON lines) to ``--out`` or to
standard output. Options may also come from a ``key = value`` file passed
with ``--config``; flags on the command line take precedence. The
environment variable ``AAHSPEC_OUTPUT_DIR`` sets the directory that relative
``--out`` paths are resolved against.

Exit status: 0 on success, 1 when ``--strict`` is set and a bound report
fails, 2 on usage errors, 74 when the output cannot be written.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from . import __version__
from .convergence import (BoundReport, delta_report, deviation_sweep, duality_check,
                          reference_convergent, samuelson_norm_check)
from .greens import PoleError, impurity_bound_states
from .io import Table, interval_table, render_table, report_table
from .models import AAH, CHIRAL, ModelParams, build_cell
from .rational import Convergent, cf_expand, convergents, convergents_of
from .spectral import (GAP_THRESHOLD, butterfly, cell_gap_zeros, compute_bands, detect_gaps,
                       family_poles, family_spectrum, gap_zeros, label_gaps, spectrum_intervals)
from .transfer import PropagationBlocked, transfer_matrix_at

OUTPUT_ENV = "AAHSPEC_OUTPUT_DIR"
EXIT_STRICT = 1
EXIT_IO = 74

COMMANDS = ("expand", "spectrum", "gaps", "labels", "zeros", "impurity", "butterfly",
            "convergence", "duality")


class UsageError(Exception):
    pass


def parse_flux(text: str) -> tuple[int, int]:
    """``"p/q"`` with ``q >= 1``, ``0 <= p <= q`` and ``gcd(p, q) = 1``."""
    try:
        p_s, q_s = text.split("/")
        p, q = int(p_s), int(q_s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"flux must look like p/q, got {text!r}")
    if q < 1:
        raise argparse.ArgumentTypeError("flux denominator must be >= 1")
    if not 0 <= p <= q:
        raise argparse.ArgumentTypeError("flux must satisfy 0 <= p <= q")
    if math.gcd(p, q) != 1:
        raise argparse.ArgumentTypeError(f"flux {p}/{q} is not reduced")
    return p, q


def _positive(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return x


def _float_list(text: str) -> list[float]:
    return [float(s) for s in text.split(",") if s.strip()]


def _int_list(text: str) -> list[int]:
    return [int(s) for s in text.split(",") if s.strip()]


def read_config(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            cfg[k.replace("-", "_")] = v
    return cfg


def _common(p: argparse.ArgumentParser) -> None:
    flux = p.add_mutually_exclusive_group()
    flux.add_argument("--flux", type=parse_flux, help="rational flux p/q")
    flux.add_argument("--alpha", help="named constant (golden, sqrt2), p/q or a decimal")
    p.add_argument("--depth", type=int, default=12, help="continued-fraction depth for --alpha")
    p.add_argument("--V", type=float, default=1.0, help="potential strength")
    p.add_argument("--t", type=float, default=1.0, help="hopping")
    p.add_argument("--delta", type=float, default=0.0, help="phase delta (or delta_y)")
    p.add_argument("--variant", choices=(AAH, CHIRAL), default=AAH)
    p.add_argument("--family", action="store_true", help="use the union over delta")
    p.add_argument("--n-theta", type=int, default=64, help="Bloch phase grid")
    p.add_argument("--n-k", type=int, default=None, help="initial momentum grid")
    p.add_argument("--gap-threshold", type=_positive, default=GAP_THRESHOLD)
    p.add_argument("--tau-def", type=_positive, default=1e-10, help="deficiency tolerance")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--strict", action="store_true", help="exit 1 if any bound report fails")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", help="key = value file; flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aahspec", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}
    for name in COMMANDS:
        sp = sub.add_parser(name)
        _common(sp)
        subs[name] = sp
    subs["gaps"].add_argument("--include-unresolved", action="store_true")
    subs["impurity"].add_argument("--strength", type=float, required=True)
    subs["impurity"].add_argument("--site", type=int, default=1)
    subs["butterfly"].add_argument("--qmax", type=int, required=True)
    subs["butterfly"].set_defaults(n_theta=16)
    subs["duality"].set_defaults(n_theta=16)
    c = subs["convergence"]
    c.add_argument("--deltas", type=_float_list, default=[0.0, 0.3, math.pi / 2],
                   help="comma-separated delta_y values")
    c.add_argument("--samuelson", action="store_true", help="also check Bloch norms")
    c.add_argument("--omega", type=float, default=0.0)
    c.add_argument("--eps", type=float, default=None, help="enable pGF deviation checks")
    c.add_argument("--tol", type=_positive, default=None, help="target for pGF deviations")
    c.add_argument("--qs", type=_int_list, default=None, help="convergent denominators for pGF")
    c.add_argument("--q-ref", type=int, default=None)
    parser._subparsers_map = subs
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = cli_only = parser.parse_args(argv)
    if args.config:
        sp = parser._subparsers_map[args.command]
        try:
            cfg = read_config(args.config)
        except (OSError, UsageError) as exc:
            sp.error(str(exc))
        known = {a.dest for a in sp._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            sp.error(f"unknown config keys: {', '.join(unknown)}")
        for a in sp._actions:
            if a.dest in cfg and isinstance(a.default, bool):
                cfg[a.dest] = cfg[a.dest].lower() in ("1", "true", "yes", "on")
        sp.set_defaults(**cfg)
        args = parser.parse_args(argv)
        # a flux given on the command line replaces either kind from the file
        if cli_only.alpha is not None:
            args.flux = None
        elif cli_only.flux is not None:
            args.alpha = None
        elif args.flux is not None and args.alpha is not None:
            sp.error("config gives both flux and alpha")
    return args


def _flux(args) -> tuple[int, int]:
    if args.flux is not None:
        return args.flux
    if args.alpha is None:
        raise UsageError("a flux is required: give --flux p/q or --alpha")
    c = convergents_of(args.alpha, depth=args.depth)[-1]
    # only alpha mod 1 matters for a single approximant
    p = c.p % c.q
    return (p, c.q) if c.q > 1 else (0, 1)


def _params(args) -> ModelParams:
    p, q = _flux(args)
    return ModelParams(p, q, V=args.V, t=args.t, delta=args.delta, variant=args.variant)


def _spectrum(args, params):
    if args.family:
        return family_spectrum(params, n_theta=max(args.n_theta, 16))
    return spectrum_intervals(compute_bands(build_cell(params), max(args.n_theta, 16)))


def cmd_expand(args) -> Table:
    src = args.alpha if args.alpha is not None else Fraction(*args.flux)
    cf = cf_expand(src, args.depth)
    cols = (("n", int), ("a", int), ("p", int), ("q", int))
    return Table(cols, [[c.index, a, c.p, c.q] for a, c in zip(cf.terms, convergents(cf))])


def cmd_spectrum(args) -> Table:
    params = _params(args)
    ss = _spectrum(args, params)
    return interval_table((params.p, params.q, params.V, lo, hi) for lo, hi in ss.intervals)


GAP_COLUMNS = (("p", int), ("q", int), ("V", float), ("r", int), ("gap_lo", float),
               ("gap_hi", float), ("resolved", bool))


def cmd_gaps(args) -> Table:
    params = _params(args)
    gaps = detect_gaps(_spectrum(args, params), args.gap_threshold, args.include_unresolved)
    return Table(GAP_COLUMNS, [[params.p, params.q, params.V, g.index_r, g.lo, g.hi, g.resolved]
                               for g in gaps])


def cmd_labels(args) -> Table:
    params = _params(args)
    if params.variant != AAH:
        raise UsageError("labels need --variant aah")
    gaps = detect_gaps(_spectrum(args, params), args.gap_threshold)
    cols = (("p", int), ("q", int), ("V", float), ("r", int), ("m", int), ("n", int),
            ("ids", float))
    return Table(cols, [[params.p, params.q, params.V, g.index_r, lab.m, lab.n,
                         float(lab.ids_value)] for g, lab in zip(gaps, label_gaps(params, gaps))])


def cmd_zeros(args) -> Table:
    params = _params(args)
    n_theta = args.n_theta + (args.n_theta % 2)
    if args.family:
        gaps = detect_gaps(_spectrum(args, params), args.gap_threshold)
        e, w = family_poles(params, n_theta=n_theta)
        found = gap_zeros(e, w, gaps)
    else:
        found = cell_gap_zeros(build_cell(params), max(n_theta, 16), args.gap_threshold)
    cell = build_cell(params)
    cols = (("p", int), ("q", int), ("V", float), ("r", int), ("gap_lo", float),
            ("gap_hi", float), ("omega", float), ("residual", float), ("tm_class", str))
    return Table(cols, [[params.p, params.q, params.V, g.index_r, g.lo, g.hi, om, res,
                         _tm_class(cell, om, args.tau_def)] for g, om, res in found])


def _tm_class(cell, omega, tau_def) -> str:
    """Reduced transfer-matrix class of one cell at ``omega``, or why it has none."""
    if cell.corner == 0:
        return "no_hopping"
    try:
        return transfer_matrix_at(cell, omega, tau_def=tau_def).classification.value
    except PropagationBlocked:
        return "blocked"
    except PoleError:
        return "pole"


def cmd_impurity(args) -> Table:
    params = _params(args)
    cell = build_cell(params)
    if not 1 <= args.site <= cell.period:
        raise UsageError(f"--site must lie in 1..{cell.period}")
    ss = spectrum_intervals(compute_bands(cell, max(args.n_theta, 16)))
    lo, hi = ss.intervals[0][0], ss.intervals[-1][1]
    windows = [(-math.inf, lo)] + [(g.lo, g.hi) for g in detect_gaps(ss, args.gap_threshold)]
    windows.append((hi, math.inf))
    cols = (("p", int), ("q", int), ("V", float), ("strength", float), ("site", int),
            ("gap_lo", float), ("gap_hi", float), ("omega", float))
    rows = []
    for w in windows:
        for om in impurity_bound_states(cell, args.strength, w, args.n_k, site=args.site):
            rows.append([params.p, params.q, params.V, args.strength, args.site, w[0], w[1], om])
    return Table(cols, rows)


def cmd_butterfly(args) -> Table:
    if args.qmax < 2:
        raise UsageError("--qmax must be >= 2")
    return interval_table(butterfly(args.qmax, V=args.V, n_theta=max(args.n_theta, 16), t=args.t,
                                    workers=args.workers))


def _convergence_reports(args) -> list[BoundReport]:
    if args.alpha is None:
        raise UsageError("convergence needs --alpha")
    convs = convergents_of(args.alpha, depth=args.depth)
    jobs = [(c, d) for c in convs for d in args.deltas]

    def one(job):
        c, d = job
        out = [delta_report(c, args.alpha, d)]
        if args.samuelson:
            # shifting p by q flips alternate bond signs, a gauge change that keeps the norm
            p = c.p % c.q if c.q > 1 else 0
            cell = build_cell(ModelParams(p, c.q, delta=d, variant=CHIRAL))
            out.append(samuelson_norm_check(cell))
        return out

    reports = _map(one, jobs, args.workers)
    if args.eps is not None:
        qs = args.qs or [c.q for c in convs if c.q >= 2]
        q_ref = args.q_ref or reference_convergent(args.alpha, 20 * max(qs)).q
        for d in args.deltas:
            reports.append(deviation_sweep(args.alpha, qs, args.omega, args.eps, q_ref,
                                           delta_y=d, tol=args.tol))
    return [r for group in reports for r in group]


def _map(fn, jobs, workers):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


def cmd_convergence(args):
    return _convergence_reports(args)


def cmd_duality(args):
    p, q = _flux(args)
    return [duality_check(Convergent(p, q), V=args.V, n_theta=max(args.n_theta, 16))]


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def output_path(out: str | None) -> str | None:
    if out is None:
        return None
    base = os.environ.get(OUTPUT_ENV)
    if base and not os.path.isabs(out):
        return os.path.join(base, out)
    return out


def run(args: argparse.Namespace) -> int:
    """Execute a parsed command; returns the exit status."""
    result = HANDLERS[args.command](args)
    strict_failed = False
    if isinstance(result, list):
        strict_failed = any(r.passed is False for r in result)
        result = report_table(result)
    text = render_table(result, args.format)
    path = output_path(args.out)
    if path is None:
        sys.stdout.write(text)
    else:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"aahspec: cannot write {path}: {exc}", file=sys.stderr)
            return EXIT_IO
    return EXIT_STRICT if (args.strict and strict_failed) else 0


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        return run(args)
    except (UsageError, ValueError) as exc:
        print(f"aahspec {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
