"""``mono-laplace`` command line front end.

Exit codes: 0 success, 2 a checked claim failed, 3 indeterminate verdict,
64 usage error, 65 bad configuration or unknown kernel.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import exactseq, plotting, report, results
from .errors import DomainError, MonoLaplaceError, ToleranceNotMet
from .monorules import INDETERMINATE, ShapeHint, classify_ratio
from .quadrature import DEFAULT_CONFIG, QuadConfig
from .registry import BUILTIN, UnknownKernel, expression_pair, get_pair, parse_v
from .specfun import kernel_hv

EXIT_OK, EXIT_FAIL, EXIT_INDETERMINATE, EXIT_USAGE, EXIT_CONFIG = 0, 2, 3, 64, 65
THREADS_ENV = "MONO_LAPLACE_THREADS"


class UsageError(Exception):
    pass


class ConfigError(Exception):
    pass


@dataclasses.dataclass
class RunConfig:
    """Overrides layered as module defaults < --config file < flags."""

    rel_tol: Optional[float] = None
    abs_tol: Optional[float] = None
    max_panels: Optional[int] = None
    truncation_tail_bound: Optional[float] = None
    x_min: float = 1e-2
    x_max: float = 1e2
    points: int = 33
    v_grid: tuple = results.DEFAULT_V_GRID

    @classmethod
    def load(cls, path: Optional[str]) -> "RunConfig":
        if path is None:
            return cls()
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "v_grid" in data:
            data["v_grid"] = tuple(float(v) for v in data["v_grid"])
        return cls(**data)

    def quad(self, base: QuadConfig = DEFAULT_CONFIG) -> QuadConfig:
        over = {k: getattr(self, k) for k in ("rel_tol", "abs_tol", "max_panels", "truncation_tail_bound")
                if getattr(self, k) is not None}
        try:
            return dataclasses.replace(base, **over)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad tolerance settings: {exc}") from exc

    def x_grid(self) -> tuple:
        if not (0 < self.x_min < self.x_max) or self.points < 2:
            raise UsageError("need 0 < x-min < x-max and at least 2 points")
        return tuple(float(x) for x in np.geomspace(self.x_min, self.x_max, self.points))


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1")
    return n


@contextmanager
def _pool():
    n = _threads()
    if n == 1:
        yield None
        return
    with ThreadPoolExecutor(max_workers=n) as ex:
        yield ex


def _map(fn, items, pool):
    return list(pool.map(fn, items)) if pool is not None else [fn(i) for i in items]


def _write(text: str, output: Optional[str]):
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, newline="")


def _resolved(rc: RunConfig, cfg: QuadConfig, **extra) -> dict:
    return {"quad": dataclasses.asdict(cfg), **extra}


# ---------------------------------------------------------------- commands

SEQ_SUITES = ("phi-dn", "phi-bn", "phi-star", "hv")


def _sequence_report(suite: str, n_max: Optional[int], v) -> exactseq.ExactSeqReport:
    if suite == "phi-dn":
        return exactseq.phi_dn_checks(200 if n_max is None else n_max)
    if suite == "phi-bn":
        return exactseq.phi_bn_checks(100 if n_max is None else n_max)
    if suite == "phi-star":
        return exactseq.phi_star_checks(200 if n_max is None else n_max)
    if v is None:
        raise UsageError("suite hv needs --v")
    return exactseq.hv_sequences(v, 50 if n_max is None else n_max)


def cmd_verify_sequences(args, rc: RunConfig) -> int:
    v = _parse_v_arg(args.v) if args.v is not None else None
    suites = SEQ_SUITES if args.suite == "all" else (args.suite,)
    reps = []
    for s in suites:
        if s == "hv" and v is None and args.suite == "all":
            reps += [_sequence_report(s, args.n_max, Fraction(1, 4)),
                     _sequence_report(s, args.n_max, Fraction(3, 4))]
        else:
            reps.append(_sequence_report(s, args.n_max, v))
    ok = all(r.passed for r in reps)
    body = {"passed": ok, "reports": [r.to_dict() for r in reps]}
    cfg = {"suite": args.suite, "n_max": args.n_max, "v": None if v is None else str(v)}
    _write(report.dumps(report.envelope("verify-sequences", cfg, body)), args.output)
    return EXIT_OK if ok else EXIT_FAIL


def _parse_v_arg(text):
    try:
        return parse_v(text)
    except UnknownKernel as exc:
        raise UsageError(str(exc)) from exc


def _classify_entry(args):
    if args.f is not None or args.g is not None:
        if args.f is None or args.g is None:
            raise UsageError("--f and --g go together")
        hint = ShapeHint.unimodal() if args.hint == "unimodal" else ShapeHint()
        return expression_pair(args.f, args.g, hint)
    if args.pair is None:
        raise UsageError("give --pair or --f/--g")
    return get_pair(args.pair, args.v)


def classify_document(entry, cfg: QuadConfig) -> dict:
    verdict = classify_ratio(entry.F, entry.G, entry.hint, cfg, kernel_ratio=entry.kernel_ratio)
    return {"pair": entry.name, "description": entry.description, "hint": entry.hint.kind,
            "verdict": verdict.to_dict()}


def cmd_classify(args, rc: RunConfig) -> int:
    entry = _classify_entry(args)
    cfg = rc.quad()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ToleranceNotMet)
        doc = classify_document(entry, cfg)
    _write(report.dumps(report.envelope("classify", _resolved(rc, cfg, pair=entry.name), doc)), args.output)
    return EXIT_INDETERMINATE if doc["verdict"]["kind"] == INDETERMINATE else EXIT_OK


def _v_list(args, rc: RunConfig) -> tuple:
    if args.v:
        return tuple(float(_parse_v_arg(t)) for item in args.v for t in item.split(",") if t)
    return tuple(rc.v_grid)


def run_bounds(suite: str, v_grid, x_grid, cfg, r1=None, r2=None):
    with _pool() as pool:
        return results.bound_suite(suite, v_grid, x_grid, r1=r1, r2=r2, cfg=cfg, pool=pool)


def cmd_bounds(args, rc: RunConfig) -> int:
    cfg = rc.quad(results.TIGHT)
    suites = results.SUITES if args.suite == "all" else (args.suite,)
    reps = [run_bounds(s, _v_list(args, rc), rc.x_grid(), cfg, args.r1, args.r2) for s in suites]
    if args.format == "csv":
        text = report.csv_text(report.BOUND_COLUMNS, [row for r in reps for row in r.rows])
    else:
        body = {"passed": all(r.passed for r in reps), "suites": [r.to_dict() for r in reps]}
        text = report.dumps(report.envelope("bounds", _resolved(rc, cfg, r1=args.r1, r2=args.r2), body))
    _write(text, args.output)
    return EXIT_OK if all(r.passed for r in reps) else EXIT_FAIL


EMIT_FNS = {"phi": "phi", "A": "alzer-a", "alzer-a": "alzer-a", "L": "villarino-l",
            "villarino-l": "villarino-l", "Q": "qi-q", "qi-q": "qi-q",
            "lambda": None, "hv": None, "theta-v": None}


def emit_rows(fn: str, rc: RunConfig, v=None, v_min=0.55, v_max=0.95, cfg=DEFAULT_CONFIG):
    """(columns, rows) for one plotted function; rows follow grid order."""
    if fn == "theta-v":
        vs = np.round(np.linspace(v_min, v_max, rc.points), 12)
        return ("v", "t_star", "theta"), [(float(v), *results.theta_v(v)) for v in vs]
    xs = rc.x_grid()
    if fn in ("lambda", "hv"):
        if v is None:
            raise UsageError(f"--fn {fn} needs --v")
        vf = float(v)
        if fn == "hv":
            return ("v", "t", "value"), [(vf, t, float(kernel_hv(vf, t))) for t in xs]
        with _pool() as pool, warnings.catch_warnings():
            warnings.simplefilter("ignore", ToleranceNotMet)
            vals = _map(lambda x: results.lambda_v(vf, x, cfg), xs, pool)
        return ("v", "x", "value"), [(vf, x, y) for x, y in zip(xs, vals)]
    f = results.DIGAMMA_ROUTE[EMIT_FNS[fn]]
    return ("x", "value"), [(x, f(x)) for x in xs]


def cmd_emit(args, rc: RunConfig) -> int:
    v = _parse_v_arg(args.v) if args.v is not None else None
    if args.v_min >= args.v_max:
        raise UsageError("need v-min < v-max")
    cols, rows = emit_rows(args.fn, rc, v, args.v_min, args.v_max, rc.quad())
    _write(report.csv_text(cols, rows), args.output)
    return EXIT_OK


REPORT_LAMBDA_V = ("0", "1/4", "1/2", "3/4", "1", "2")


def cmd_report_all(args, rc: RunConfig) -> int:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = rc.quad()
    summary = {}

    seq = [exactseq.phi_dn_checks(), exactseq.phi_bn_checks(), exactseq.phi_star_checks(),
           exactseq.hv_sequences(Fraction(1, 4)), exactseq.hv_sequences(Fraction(3, 4))]
    summary["sequences"] = {r.name: r.passed for r in seq}
    (out / "sequences.json").write_text(report.dumps(report.envelope(
        "verify-sequences", {"suite": "all"}, {"reports": [r.to_dict() for r in seq]})))

    entries = [get_pair(n) for n in ("phi", "alzer-a", "villarino-l", "qi-q")]
    entries += [get_pair("lambda", v) for v in REPORT_LAMBDA_V]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ToleranceNotMet)
        docs = [classify_document(e, cfg) for e in entries]
    summary["classify"] = {d["pair"]: d["verdict"]["kind"] for d in docs}
    (out / "classify.json").write_text(report.dumps(report.envelope(
        "classify", _resolved(rc, cfg), {"pairs": docs})))

    tight = rc.quad(results.TIGHT)
    reps = [run_bounds(s, rc.v_grid, rc.x_grid(), tight) for s in results.SUITES]
    summary["bounds"] = {r.suite_id: r.passed for r in reps}
    (out / "bounds.json").write_text(report.dumps(report.envelope(
        "bounds", _resolved(rc, tight), {"suites": [r.to_dict() for r in reps]})))
    (out / "bounds.csv").write_text(report.csv_text(
        report.BOUND_COLUMNS, [row for r in reps for row in r.rows]), newline="")
    plotting.margin_plot(out / "bounds_margins.png", {r.suite_id: r.rows for r in reps})

    dense = dataclasses.replace(rc, x_min=1e-3, x_max=1e3, points=128)
    curves = {}
    for fn in ("phi", "alzer-a", "villarino-l", "qi-q"):
        cols, rows = emit_rows(fn, dense)
        (out / f"{fn}.csv").write_text(report.csv_text(cols, rows), newline="")
        curves[fn] = ([r[0] for r in rows], [r[1] for r in rows])
    plotting.line_plot(out / "phi.png", {"phi": curves["phi"]}, ylabel="Phi(x)", hlines=(0.0, 4.2))
    plotting.line_plot(out / "alq.png", {k: curves[k] for k in ("alzer-a", "villarino-l", "qi-q")},
                       ylabel="value")

    lam_rows, lam_series = [], {}
    for v in REPORT_LAMBDA_V:
        _, rows = emit_rows("lambda", dense, Fraction(v), cfg=cfg)
        lam_rows += rows
        lam_series[f"v={v}"] = ([r[1] for r in rows], [r[2] for r in rows])
    (out / "lambda.csv").write_text(report.csv_text(("v", "x", "value"), lam_rows), newline="")
    plotting.line_plot(out / "lambda.png", lam_series, ylabel="Lambda(x)", hlines=(-0.5,))

    theta_rc = dataclasses.replace(rc, points=41)
    th_rows = []
    for lo, hi in ((0.02, 0.48), (0.52, 0.98)):
        th_rows += emit_rows("theta-v", theta_rc, v_min=lo, v_max=hi)[1]
    (out / "theta_v.csv").write_text(report.csv_text(("v", "t_star", "theta"), th_rows), newline="")
    plotting.line_plot(out / "theta_v.png",
                       {"v < 1/2": ([r[0] for r in th_rows[:41]], [r[2] for r in th_rows[:41]]),
                        "v > 1/2": ([r[0] for r in th_rows[41:]], [r[2] for r in th_rows[41:]])},
                       xlabel="v", ylabel="theta_v", logx=False, hlines=(0.5,))

    ok = all(summary["sequences"].values()) and all(summary["bounds"].values())
    summary["passed"] = ok
    (out / "summary.json").write_text(report.dumps(report.envelope(
        "report-all", _resolved(rc, cfg), summary)))
    sys.stdout.write(report.dumps(summary))
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mono-laplace", description="Monotonicity of Laplace transform ratios.")
    p.add_argument("--version", action="version", version=f"%(prog)s {report.__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file of RunConfig overrides")
    common.add_argument("--rel-tol", type=float)
    common.add_argument("--abs-tol", type=float)
    common.add_argument("--max-panels", type=int)
    common.add_argument("-o", "--output", help="output file (default stdout)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("verify-sequences", parents=[common], help="exact rational sequence checks")
    s.add_argument("--suite", choices=SEQ_SUITES + ("all",), default="all")
    s.add_argument("--n-max", type=int)
    s.add_argument("--v", help="rational v for the hv suite, e.g. 3/4")
    s.set_defaults(func=cmd_verify_sequences)

    s = sub.add_parser("classify", parents=[common], help="shape of F/G for a kernel pair")
    s.add_argument("--pair", help=f"built-in: {', '.join(BUILTIN)} or lambda:v=<rational>")
    s.add_argument("--v")
    s.add_argument("--f", help="numerator kernel expression")
    s.add_argument("--g", help="denominator kernel expression")
    s.add_argument("--hint", choices=("monotone", "unimodal"), default="monotone")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("bounds", parents=[common], help="K_v inequality sweeps")
    s.add_argument("--suite", choices=results.SUITES + ("all",), default="all")
    s.add_argument("--v", action="append", help="v value(s); repeat or comma separate")
    s.add_argument("--r1", type=float)
    s.add_argument("--r2", type=float)
    s.add_argument("--x-min", type=float)
    s.add_argument("--x-max", type=float)
    s.add_argument("--points", type=int)
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("emit", parents=[common], help="CSV of a function on a grid")
    s.add_argument("--fn", required=True, choices=tuple(EMIT_FNS))
    s.add_argument("--v")
    s.add_argument("--x-min", type=float)
    s.add_argument("--x-max", type=float)
    s.add_argument("--points", type=int)
    s.add_argument("--v-min", type=float, default=0.55)
    s.add_argument("--v-max", type=float, default=0.95)
    s.set_defaults(func=cmd_emit)

    s = sub.add_parser("report-all", parents=[common], help="every suite plus CSV, JSON and PNG output")
    s.add_argument("--output-dir", default="report")
    s.set_defaults(func=cmd_report_all)
    return p


def _run_config(args) -> RunConfig:
    rc = RunConfig.load(args.config)
    for key in ("rel_tol", "abs_tol", "max_panels", "x_min", "x_max", "points"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(rc, key, val)
    if args.command == "emit" and args.fn == "theta-v" and getattr(args, "points", None) is None:
        rc.points = 9
    return rc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = _run_config(args)
        return args.func(args, rc)
    except (ConfigError, UnknownKernel) as exc:
        print(f"mono-laplace: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (UsageError, DomainError) as exc:
        print(f"mono-laplace: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MonoLaplaceError as exc:
        print(f"mono-laplace: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
