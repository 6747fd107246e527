"""confactor command line.

Usage:
    confactor dn --system haar --weights const:1 --N 4 --eps ones
    confactor search --system haar --weights logpow:1.0 --N 256 --strategy greedy --restarts 64 --seed 7 --out result.json
    confactor scan --system haar --weights const:1 --grid 16:1024:x2 --out scan.csv
    confactor extremal --system haar --weights const:1 --N 256 --eps best --out witness.json
    confactor coeffs --system haar --weights logpow:1.0 --N 1024 --f identity --out coeffs.csv
    confactor checks --draws 200 --seed 0 --ci
    confactor olevsky --N 256 --gamma 0.3333 --exponent 1.3333 --out demo.csv

Exit codes: 0 success, 2 invalid configuration, 3 failed inequality check.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

from . import __version__
from .checks import run_all
from .extremal import lower_bound_check
from .factors import compute_DN, fit_growth, fourier_coefficients, weighted_partial_sums
from .olevsky import prescribed_demo
from .ons import parse_system, rademacher_signs
from .piecewise import LipschitzFunction, PiecewiseLinear
from .plot import render_scan_svg
from .search import best_signs, growth_scan, parse_grid
from .sequences import SignSequence, parse_weights

SCHEMA = 1
EXIT_OK, EXIT_CONFIG, EXIT_CHECK = 0, 2, 3


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- parsing helpers

def _system(args):
    try:
        return parse_system(args.system, mean_zero_only=not args.no_mean_zero)
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from None


def _weights(args):
    try:
        return parse_weights(args.weights)
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from None


def _resolve_eps(spec: str, system, weights, N: int, args):
    """Returns (signs, search result or None)."""
    if spec == "ones":
        return SignSequence.ones(N), None
    if spec == "zeros":
        return SignSequence.zeros(N), None
    if spec == "best":
        res = best_signs(system, weights, N, args.strategy, args.restarts, args.seed)
        return res.best_signs, res
    if spec.startswith("rademacher:"):
        return rademacher_signs(spec.split(":", 1)[1], N), None
    try:
        vals = [int(x) for x in spec.split(",")]
    except ValueError:
        raise ConfigError(
            f"bad --eps {spec!r}; grammar: ones | zeros | best | rademacher:T | comma-separated list of -1/0/1"
        ) from None
    if len(vals) != N:
        raise ConfigError(f"--eps lists {len(vals)} signs but N = {N}")
    return SignSequence(vals), None


def _load_function(spec: str) -> LipschitzFunction:
    if spec == "identity":
        return LipschitzFunction(PiecewiseLinear.identity())
    if spec.startswith("const:"):
        return LipschitzFunction(PiecewiseLinear.constant(float(spec[6:])))
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"bad --f {spec!r}; grammar: identity | const:C | PATH.json (piecewise-linear JSON)")
    return LipschitzFunction(PiecewiseLinear.from_dict(json.loads(path.read_text())))


def _format(args, default: str) -> str:
    if getattr(args, "format", None):
        return args.format
    out = getattr(args, "out", None)
    if out:
        suffix = Path(out).suffix.lstrip(".").lower()
        if suffix in ("json", "csv", "svg"):
            return suffix
    return default


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _write(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from None


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}


def _report(args, argv, payload: dict, started: float) -> dict:
    report = {"schema": SCHEMA, "command": args.command, "version": __version__,
              "argv": list(argv), "config": _config(args)}
    report.update(payload)
    report["timings"] = {"wall_seconds": time.perf_counter() - started}
    return report


def _emit(args, report: dict, rows: list[dict] | None = None, svg: str | None = None) -> None:
    if not args.out:
        return
    fmt = _format(args, "json")
    if fmt == "json":
        _write(args.out, json.dumps(report, indent=2) + "\n")
    elif fmt == "csv":
        if rows is None:
            raise ConfigError(f"{args.command} has no CSV output; use --format json")
        _write(args.out, _csv_text(rows))
    else:
        if svg is None:
            raise ConfigError(f"{args.command} has no SVG output; use scan")
        _write(args.out, svg)


# ---------------------------------------------------------------- subcommands

def cmd_dn(args, argv, started):
    system, weights = _system(args), _weights(args)
    eps, search = _resolve_eps(args.eps, system, weights, args.N, args)
    value = compute_DN(system, weights, eps, args.N)
    payload = {"N": args.N, "D_N": value, "signs": list(eps)}
    if search is not None:
        payload["search"] = search.to_dict()
    report = _report(args, argv, payload, started)
    _emit(args, report, [{"N": args.N, "D_N": value}])
    print(repr(value))
    return EXIT_OK


def cmd_search(args, argv, started):
    system, weights = _system(args), _weights(args)
    res = best_signs(system, weights, args.N, args.strategy, args.restarts, args.seed)
    report = _report(args, argv, res.to_dict(), started)
    _emit(args, report, [{k: v for k, v in res.to_dict().items() if k != "signs"}])
    print(f"N={res.N} best D_N={res.best_value!r} strategy={res.strategy} evaluations={res.evaluations}")
    return EXIT_OK


def cmd_scan(args, argv, started):
    system, weights = _system(args), _weights(args)
    try:
        grid = parse_grid(args.grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    scan = growth_scan(system, weights, grid, args.strategy, args.restarts, args.seed)
    payload = {"N_grid": scan.N_grid, "values": scan.values, "fit": scan.fit.to_dict(),
               "results": [r.to_dict() for r in scan.results]}
    report = _report(args, argv, payload, started)
    _emit(args, report, scan.to_rows(), render_scan_svg(scan))
    if args.plot:
        _write(args.plot, render_scan_svg(scan))
    for n, v in zip(scan.N_grid, scan.values):
        print(f"{n}\t{v!r}")
    print(f"fit: {scan.fit.model} slope={scan.fit.slope:.6g} R^2={scan.fit.r_squared:.6f}")
    return EXIT_OK


def cmd_extremal(args, argv, started):
    system, weights = _system(args), _weights(args)
    if args.N < 2:
        raise ConfigError("extremal needs N >= 2")
    eps, search = _resolve_eps(args.eps, system, weights, args.N, args)
    wit = lower_bound_check(system, weights, eps, args.N)
    payload = wit.to_dict(include_function=True)
    payload["signs"] = list(eps)
    if search is not None:
        payload["search"] = search.to_dict()
    report = _report(args, argv, payload, started)
    _emit(args, report, [{k: v for k, v in wit.to_dict(False).items()}])
    print(f"functional_value={wit.functional_value!r} D_N={wit.D_N!r} "
          f"deficit_bound={wit.deficit_bound!r} holds={wit.holds}")
    return EXIT_OK if wit.holds else EXIT_CHECK


def cmd_coeffs(args, argv, started):
    system, weights = _system(args), _weights(args)
    f = _load_function(args.f)
    fc = fourier_coefficients(f, system, args.N)
    S = weighted_partial_sums(f, system, weights, args.N)
    ms = list(range(1, args.N + 1))
    fit = fit_growth(ms, S.tolist())
    rows = [{"n": m, "c_n": float(c), "S_n": float(s)} for m, c, s in zip(ms, fc.c, S)]
    payload = {"N": args.N, "coefficients": fc.c.tolist(), "partial_sums": S.tolist(),
               "bessel_gap": fc.bessel_gap(), "fit": fit.to_dict()}
    report = _report(args, argv, payload, started)
    _emit(args, report, rows)
    print(f"S_N={float(S[-1])!r} bessel_gap={fc.bessel_gap():.3g} fit={fit.model}")
    return EXIT_OK


def cmd_checks(args, argv, started):
    suites = run_all(args.draws, args.seed)
    ok = all(s.passed for s in suites)
    report = _report(args, argv, {"suites": [s.to_dict() for s in suites], "passed": ok}, started)
    _emit(args, report, [s.to_dict() for s in suites])
    for s in suites:
        if not args.ci or not s.passed:
            print(f"{'PASS' if s.passed else 'FAIL'} {s.name}: {s.cases} cases, worst={s.worst:.3g} ({s.tolerance})")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_olevsky(args, argv, started):
    try:
        rep = prescribed_demo(args.N, args.gamma, args.exponent, args.b_factor)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    report = _report(args, argv, {**rep.summary(), "rows": rep.rows()}, started)
    _emit(args, report, rep.rows())
    print(f"b={rep.b!r} S_N={float(rep.partial_sums[-1])!r} max_deviation={rep.max_deviation:.3g}")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _common(sp, need_n: bool = True):
    sp.add_argument("--system", default="haar", help="haar | walsh | trig | rademacher | custom:PATH.json")
    sp.add_argument("--weights", default="const:1", help="const:C | logpow:EPS | power:GAMMA | custom:PATH.json")
    sp.add_argument("--no-mean-zero", action="store_true", help="keep functions with nonzero integral")
    if need_n:
        sp.add_argument("--N", type=int, required=True)
    _output(sp)


def _output(sp):
    sp.add_argument("--out", help="output file")
    sp.add_argument("--format", choices=["json", "csv", "svg"], help="defaults to the --out suffix")


def _search_opts(sp):
    sp.add_argument("--strategy", default="auto", choices=["auto", "exhaustive", "greedy"])
    sp.add_argument("--restarts", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="confactor", description="Absolute convergence factor diagnostics.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("dn", help="evaluate D_N for one sign sequence")
    _common(sp)
    sp.add_argument("--eps", default="ones")
    _search_opts(sp)
    sp.set_defaults(func=cmd_dn)

    sp = sub.add_parser("search", help="maximize D_N over sign sequences")
    _common(sp)
    _search_opts(sp)
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("scan", help="best D_N over a grid of N with a growth fit")
    _common(sp, need_n=False)
    sp.add_argument("--grid", required=True, help="a:b:xK (geometric) | a:b:+K | n1,n2,...")
    sp.add_argument("--plot", help="also write an SVG chart here")
    _search_opts(sp)
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("extremal", help="build f_N and check the lower bound")
    _common(sp)
    sp.add_argument("--eps", default="best")
    _search_opts(sp)
    sp.set_defaults(func=cmd_extremal)

    sp = sub.add_parser("coeffs", help="Fourier coefficients and weighted partial sums of f")
    _common(sp)
    sp.add_argument("--f", default="identity", help="identity | const:C | PATH.json")
    sp.set_defaults(func=cmd_coeffs)

    sp = sub.add_parser("checks", help="randomized identity and inequality suites")
    sp.add_argument("--draws", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--ci", action="store_true", help="print failures only")
    _output(sp)
    sp.set_defaults(func=cmd_checks)

    sp = sub.add_parser("olevsky", help="prescribed-coefficient system demo")
    sp.add_argument("--N", type=int, default=256)
    sp.add_argument("--gamma", type=float, default=1 / 3)
    sp.add_argument("--exponent", type=float, default=4 / 3)
    sp.add_argument("--b-factor", type=float, default=0.9)
    _output(sp)
    sp.set_defaults(func=cmd_olevsky)
    return p


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "N", 1) is not None and getattr(args, "N", 1) < 1:
        print("confactor: error: --N must be positive", file=sys.stderr)
        return EXIT_CONFIG
    started = time.perf_counter()
    try:
        return args.func(args, argv, started)
    except (ConfigError, ValueError) as exc:
        print(f"confactor: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
