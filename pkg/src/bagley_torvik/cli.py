"""Command-line front end.

Subcommands
-----------
solve        evaluate one method on a grid and write ``t,y,yc,yf`` as CSV
compare      evaluate several methods and report deviations from the closed form
bench        time the closed form against the Mittag-Leffler series
roots        print the characteristic roots and root sums as JSON
asymptotics  tabulate the closed form next to its small- and large-time forms

The CSV output starts with ``#`` comment lines carrying a hash of the
configuration; anything machine-dependent (timings, host) goes into a JSON
sidecar next to the CSV so that identical configurations give byte-identical
CSV files.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import io
import json
import math
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import asymptotics as asy
from . import closed_form as cf
from . import reference as ref
from .errors import BagleyTorvikError, UnsupportedParameter
from .roots import BTCoefficients, RootSystem, weight_A
from .solution import Method, SolutionSeries

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_METHOD_ALIASES = {
    "closed": Method.ClosedForm,
    "closedform": Method.ClosedForm,
    "podlubny": Method.PodlubnySeries,
    "podlubnyseries": Method.PodlubnySeries,
    "series": Method.PodlubnySeries,
    "arora": Method.AroraSeries,
    "aroraseries": Method.AroraSeries,
    "fd": Method.FiniteDifference,
    "finitedifference": Method.FiniteDifference,
    "small": Method.AsymptoticSmallT,
    "asymptoticsmallt": Method.AsymptoticSmallT,
    "large": Method.AsymptoticLargeT,
    "asymptoticlarget": Method.AsymptoticLargeT,
}

# regions where a reference method is known to be unreliable
_KNOWN_REGIONS = {
    Method.AroraSeries: (3.0, "half-power series diverges for t >~ 3"),
    Method.PodlubnySeries: (9.0, "Mittag-Leffler series loses precision for t >~ 9"),
}


class ConfigError(ValueError):
    """Invalid command-line or JSON configuration (exit code 2)."""


# --------------------------------------------------------------------------
# configuration


def parse_method(name) -> Method:
    if isinstance(name, Method):
        return name
    key = str(name).replace("_", "").replace("-", "").lower()
    if key in _METHOD_ALIASES:
        return _METHOD_ALIASES[key]
    raise ConfigError(f"unknown method {name!r}")


def parse_forcing(text: str) -> cf.Forcing:
    """Build a forcing from ``zero``, ``constant:C``, ``power:C0,a0[,C1,a1...]``,
    ``sin:Omega,omega``, ``pulse:A,toff`` or ``besselj0:A``."""
    kind, _, rest = str(text).strip().partition(":")
    kind = kind.lower()
    try:
        args = [float(x) for x in rest.split(",")] if rest else []
    except ValueError as exc:
        raise ConfigError(f"bad forcing arguments in {text!r}") from exc
    try:
        if kind == "zero" and not args:
            return cf.Zero()
        if kind == "constant" and len(args) == 1:
            return cf.Constant(args[0])
        if kind == "power" and args and len(args) % 2 == 0:
            return cf.PowerSum(tuple(zip(args[::2], args[1::2])))
        if kind == "sin" and len(args) == 2:
            return cf.Sinusoid(args[0], args[1])
        if kind == "pulse" and len(args) == 2:
            return cf.Pulse(args[0], args[1])
        if kind == "besselj0" and len(args) <= 1:
            return cf.BesselJ0(args[0] if args else 1.0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"cannot parse forcing {text!r}")


@dataclass
class ProblemConfig:
    """Everything needed to reproduce a run.

    The grid is ``t_min + (t_max - t_min) k / n_points`` for
    ``k = 1..n_points``, i.e. ``n_points`` points on ``(t_min, t_max]``.
    """

    a: float = 1.3
    b: float = 2.6
    c: float = 3.4
    y0: float = 0.0
    v0: float = 0.0
    forcing: str = "sin:1.0,2.5"
    t_min: float = 0.0
    t_max: float = 10.0
    n_points: int = 200
    methods: List[str] = field(default_factory=lambda: ["ClosedForm"])
    tolerances: Dict[str, float] = field(
        default_factory=lambda: {"quadrature": 1e-9, "series_abs_tol": 1e-12}
    )

    def __post_init__(self):
        self.validate()

    def validate(self) -> "ProblemConfig":
        for name in ("a", "b", "c", "y0", "v0", "t_min", "t_max"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"{name} must be a finite number")
            setattr(self, name, float(v))
        if self.a == 0:
            raise ConfigError("a must be nonzero")
        if isinstance(self.n_points, bool) or not isinstance(self.n_points, int) or self.n_points < 2:
            raise ConfigError("n_points must be an integer >= 2")
        if not 0 <= self.t_min < self.t_max:
            raise ConfigError("need 0 <= t_min < t_max")
        if not isinstance(self.methods, list) or not self.methods:
            raise ConfigError("methods must be a non-empty list")
        self.methods = [parse_method(m).value for m in self.methods]
        self.forcing = parse_forcing(self.forcing).descriptor()
        tol = dict(self.tolerances)
        for key in tol:
            if key not in ("quadrature", "series_abs_tol"):
                raise ConfigError(f"unknown tolerance {key!r}")
            if not float(tol[key]) > 0:
                raise ConfigError(f"tolerance {key} must be positive")
            tol[key] = float(tol[key])
        self.tolerances = {"quadrature": 1e-9, "series_abs_tol": 1e-12, **tol}
        return self

    # ---- derived objects
    @property
    def coeffs(self) -> BTCoefficients:
        return BTCoefficients(self.a, self.b, self.c)

    @property
    def problem(self) -> cf.BTProblem:
        return cf.BTProblem(self.coeffs, cf.InitialConditions(self.y0, self.v0),
                            parse_forcing(self.forcing))

    @property
    def grid(self) -> np.ndarray:
        k = np.arange(1, self.n_points + 1)
        return self.t_min + (self.t_max - self.t_min) * k / self.n_points

    # ---- serialisation
    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(**data)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]


# --------------------------------------------------------------------------
# method evaluation


def _half_powers(forcing) -> List[tuple]:
    """``(a_m, m)`` pairs with ``f(t) = sum_m a_m t**(m/2)``, if possible."""
    if isinstance(forcing, cf.Zero):
        return []
    if isinstance(forcing, cf.Constant):
        return [(forcing.C0, 0)]
    if isinstance(forcing, cf.PowerSum):
        out = []
        for C, al in forcing.terms:
            m = 2.0 * al
            if m < 0 or m != int(m):
                break
            out.append((C, int(m)))
        else:
            return out
    raise UnsupportedParameter(
        f"{forcing.descriptor()} is not a finite sum of non-negative half powers"
    )


def _closed(cfg: ProblemConfig, t):
    problem = cfg.problem
    rs = problem.roots
    yc = cf.yc(rs, problem.ics, t)
    yf = cf.yf(rs, problem.forcing, t, epsabs=cfg.tolerances["quadrature"])
    return yc, yf, []


def _podlubny(cfg: ProblemConfig, t):
    ctl = ref.SeriesControls(abs_tol=cfg.tolerances["series_abs_tol"], on_failure="nan")
    s = ref.podlubny_solve(cfg.problem, t, ctl)
    return s.yc, s.yf, s.failures


def _arora(cfg: ProblemConfig, t):
    problem = cfg.problem
    powers = _half_powers(problem.forcing)
    tol = cfg.tolerances["series_abs_tol"]
    zero = cf.InitialConditions()
    yc, yf, failures = np.empty(t.shape), np.empty(t.shape), []
    for i, ti in enumerate(t):
        rc = ref.arora_series_detailed(problem.coeffs, problem.ics, [], float(ti), tol=tol)
        rf = ref.arora_series_detailed(problem.coeffs, zero, powers, float(ti), tol=tol)
        yc[i], yf[i] = rc.value, rf.value
        if rc.diverging or rf.diverging:
            yc[i] = yf[i] = np.nan
            failures.append((float(ti), "half-power series diverging"))
    return yc, yf, failures


def _finite_difference(cfg: ProblemConfig, t):
    grid = ref.FDGrid.over(cfg.t_max, cfg.n_points)
    s = ref.finite_difference_solve(cfg.problem, grid)
    return np.interp(t, s.t, s.yc), np.interp(t, s.t, s.yf), []


def _asymptotic(cfg: ProblemConfig, t, regime: asy.AsymptoticRegime):
    problem = cfg.problem
    rs = problem.roots
    f = problem.forcing
    yc = asy.yc_asymptotic(problem.coeffs, problem.ics, regime, t)
    if isinstance(f, cf.Zero):
        yf = np.zeros_like(t)
    elif isinstance(f, (cf.Constant, cf.PowerSum)):
        terms = [(f.C0, 0.0)] if isinstance(f, cf.Constant) else f.terms
        yf = asy.yf_power_asymptotic(rs, terms, regime, t)
    elif regime.kind is asy.RegimeKind.SmallT:
        f0, f1 = f.maclaurin()
        yf = asy.yf_smallt_general(rs, f0, f1, t)
    elif isinstance(f, cf.Sinusoid):
        yf = asy.yf_sinusoid_asymptotic(rs, f.Omega, f.omega, t)
    else:
        raise UnsupportedParameter(f"no large-time form for {f.descriptor()}")
    return np.asarray(yc, dtype=float), np.asarray(yf, dtype=float), []


_EVALUATORS = {
    Method.ClosedForm: _closed,
    Method.PodlubnySeries: _podlubny,
    Method.AroraSeries: _arora,
    Method.FiniteDifference: _finite_difference,
    Method.AsymptoticSmallT: lambda cfg, t: _asymptotic(cfg, t, asy.SMALL_T),
    Method.AsymptoticLargeT: lambda cfg, t: _asymptotic(cfg, t, asy.LARGE_T),
}


def evaluate(cfg: ProblemConfig, method, t: Optional[np.ndarray] = None) -> SolutionSeries:
    """Evaluate ``method`` on the configured grid (or on ``t``)."""
    method = parse_method(method)
    t = cfg.grid if t is None else np.asarray(t, dtype=float)
    start = time.perf_counter()
    yc, yf, failures = _EVALUATORS[method](cfg, t)
    wall = time.perf_counter() - start
    yc = np.broadcast_to(np.asarray(yc, dtype=float), t.shape).copy()
    yf = np.broadcast_to(np.asarray(yf, dtype=float), t.shape).copy()
    return SolutionSeries(
        method, t, yc + yf, yc, yf,
        meta={"a": cfg.a, "b": cfg.b, "c": cfg.c, "y0": cfg.y0, "v0": cfg.v0,
              "forcing": cfg.forcing},
        wall_time=wall, failures=failures,
    )


# --------------------------------------------------------------------------
# output


def _fmt(x: float) -> str:
    return "%.17g" % x


def render_csv(cfg: ProblemConfig, columns: Dict[str, np.ndarray], label: str) -> str:
    buf = io.StringIO()
    buf.write(f"# config-sha256: {cfg.digest()}\n")
    buf.write(f"# {label}\n")
    names = list(columns)
    buf.write(",".join(names) + "\n")
    for row in zip(*(columns[n] for n in names)):
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _machine() -> dict:
    return {"python": platform.python_version(), "platform": platform.platform(),
            "processor": platform.processor() or platform.machine(),
            "numpy": np.__version__}


def _emit(out: Optional[str], csv_text: str, sidecar: dict) -> None:
    if out is None:
        sys.stdout.write(csv_text)
        return
    path = Path(out)
    path.write_text(csv_text)
    path.with_suffix(path.suffix + ".json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True, default=str) + "\n"
    )


def _series_sidecar(cfg: ProblemConfig, s: SolutionSeries) -> dict:
    return {"config": cfg.to_dict(), "config_sha256": cfg.digest(),
            "method": s.method.value, "wall_time": s.wall_time,
            "failures": s.failures, "machine": _machine()}


# --------------------------------------------------------------------------
# subcommands


def cmd_solve(cfg: ProblemConfig, out: Optional[str] = None) -> SolutionSeries:
    method = parse_method(cfg.methods[0])
    s = evaluate(cfg, method)
    csv_text = render_csv(cfg, {"t": s.t, "y": s.y, "yc": s.yc, "yf": s.yf},
                          f"method: {method.value}")
    _emit(out, csv_text, _series_sidecar(cfg, s))
    return s


def cmd_compare(cfg: ProblemConfig, out: Optional[str] = None) -> dict:
    methods = [parse_method(m) for m in cfg.methods]
    if len(set(methods)) < 2:
        raise ConfigError("compare needs at least two distinct methods")
    baseline = Method.ClosedForm if Method.ClosedForm in methods else methods[0]
    series = {m: evaluate(cfg, m) for m in methods}
    base = series[baseline].y
    report = {"baseline": baseline.value, "methods": {}}
    for m, s in series.items():
        entry = {"wall_time": s.wall_time, "n_failures": len(s.failures)}
        if s.failures:
            entry["first_failure"] = {"t": s.failures[0][0], "reason": s.failures[0][1]}
        if m is not baseline:
            dev = np.abs(s.y - base)
            ok = np.isfinite(dev)
            entry["max_abs_deviation"] = float(np.max(dev[ok])) if ok.any() else None
            entry["mean_abs_deviation"] = float(np.mean(dev[ok])) if ok.any() else None
            entry["argmax_t"] = float(s.t[ok][np.argmax(dev[ok])]) if ok.any() else None
        if m in _KNOWN_REGIONS:
            start, why = _KNOWN_REGIONS[m]
            flagged = s.t[s.t > start]
            if flagged.size:
                entry["known_unreliable_region"] = {
                    "t_from": float(flagged[0]), "t_to": float(flagged[-1]), "reason": why,
                }
        report["methods"][m.value] = entry
    columns = {"t": series[baseline].t}
    columns.update({m.value: s.y for m, s in series.items()})
    csv_text = render_csv(cfg, columns, "compare: " + ",".join(m.value for m in methods))
    _emit(out, csv_text, {"config": cfg.to_dict(), "config_sha256": cfg.digest(),
                          "report": report, "machine": _machine()})
    return report


def cmd_bench(cfg: ProblemConfig, repeats: int = 1) -> dict:
    """Wall time of the series solution over the closed form, ``chi``.

    The initial conditions ``y0 = v0 = 1`` of the benchmark protocol are
    applied whatever the configuration says.
    """
    forcing = parse_forcing(cfg.forcing)
    if not isinstance(forcing, (cf.BesselJ0, cf.Constant, cf.Sinusoid)):
        raise ConfigError("bench supports besselj0, constant and sin forcings")
    bench_cfg = dataclasses.replace(cfg, y0=1.0, v0=1.0)

    def best(method):
        times = []
        for _ in range(max(1, repeats)):
            times.append(evaluate(bench_cfg, method).wall_time)
        return min(times)

    t_closed = best(Method.ClosedForm)
    t_series = best(Method.PodlubnySeries)
    return {"forcing": cfg.forcing, "n_points": cfg.n_points,
            "time_closed_form": t_closed, "time_series": t_series,
            "chi": t_series / t_closed, "machine": _machine()}


def cmd_roots(a: float, b: float, c: float) -> dict:
    rs = RootSystem.from_coefficients(a, b, c)
    cpx = lambda z: [float(complex(z).real), float(complex(z).imag)]
    return {
        "coefficients": {"a": rs.coeffs.a, "b": rs.coeffs.b, "c": rs.coeffs.c},
        "roots": [cpx(r) for r in rs.roots],
        "residuals": [float(x) for x in rs.residuals],
        "dP": [cpx(x) for x in rs.dP],
        "A": {str(ell): weight_A(rs, ell) for ell in (-3, -2, -1, 0, 1)},
        "intermediates": {k: cpx(getattr(rs, k))
                          for k in ("beta", "gamma", "delta", "R", "Tplus", "Tminus")},
    }


def cmd_asymptotics(cfg: ProblemConfig, out: Optional[str] = None) -> Dict[str, np.ndarray]:
    t = cfg.grid
    exact = evaluate(cfg, Method.ClosedForm)
    columns = {"t": t, "closed_form": exact.y}
    for method, name in ((Method.AsymptoticSmallT, "small_t"),
                         (Method.AsymptoticLargeT, "large_t")):
        try:
            columns[name] = evaluate(cfg, method).y
        except UnsupportedParameter:
            columns[name] = np.full(t.shape, np.nan)
    _emit(out, render_csv(cfg, columns, "asymptotics"),
          {"config": cfg.to_dict(), "config_sha256": cfg.digest(), "machine": _machine()})
    return columns


# --------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for flag in ("--a", "--b", "--c", "--y0", "--v0", "--t-min", "--t-max"):
        common.add_argument(flag, type=float, default=None)
    common.add_argument("--n", type=int, default=None, help="number of grid points")
    common.add_argument("--force", default=None,
                        help="zero | constant:C | power:C0,a0[,C1,a1...] | "
                             "sin:Omega,omega | pulse:A,toff | besselj0:A")
    common.add_argument("--method", action="append", default=None,
                        help="method name; repeat or comma-separate for compare")
    common.add_argument("--out", default=None, help="CSV output path (default stdout)")
    common.add_argument("--config", default=None, help="JSON configuration file")
    common.add_argument("--dump-config", action="store_true",
                        help="print the resolved configuration as JSON and exit")

    parser = argparse.ArgumentParser(prog="bagley-torvik", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="evaluate one method")
    sub.add_parser("compare", parents=[common], help="compare several methods")
    bench = sub.add_parser("bench", parents=[common], help="closed form vs series timing")
    bench.add_argument("--repeats", type=int, default=1)
    sub.add_parser("roots", parents=[common], help="characteristic roots")
    sub.add_parser("asymptotics", parents=[common], help="closed form vs asymptotic forms")
    return parser


def _load_config(args) -> ProblemConfig:
    data = {}
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read configuration: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
    overrides = {"a": args.a, "b": args.b, "c": args.c, "y0": args.y0, "v0": args.v0,
                 "t_min": args.t_min, "t_max": args.t_max, "n_points": args.n,
                 "forcing": args.force}
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.method:
        data["methods"] = [m for item in args.method for m in item.split(",") if m]
    elif args.command == "compare" and "methods" not in data:
        data["methods"] = ["ClosedForm", "FiniteDifference"]
    try:
        return ProblemConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG

    if args.command == "roots":
        a = 1.3 if args.a is None else args.a
        b = 2.6 if args.b is None else args.b
        c = 3.4 if args.c is None else args.c
        try:
            report = cmd_roots(a, b, c)
        except BagleyTorvikError as exc:
            print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(json.dumps(report, indent=2))
        return EXIT_OK

    try:
        cfg = _load_config(args)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.dump_config:
        print(json.dumps(cfg.to_dict(), indent=2, sort_keys=True))
        return EXIT_OK

    try:
        if args.command == "solve":
            s = cmd_solve(cfg, args.out)
            for t_fail, why in s.failures:
                print(f"warning: t={t_fail!r}: {why}", file=sys.stderr)
        elif args.command == "compare":
            report = cmd_compare(cfg, args.out)
            print(json.dumps(report, indent=2, default=str),
                  file=sys.stderr if args.out is None else sys.stdout)
        elif args.command == "bench":
            print(json.dumps(cmd_bench(cfg, args.repeats), indent=2))
        elif args.command == "asymptotics":
            cmd_asymptotics(cfg, args.out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnsupportedParameter as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BagleyTorvikError as exc:
        where = getattr(exc, "diagnostics", {}).get("t")
        suffix = f" (t={where})" if where is not None else ""
        print(f"numerical error: {type(exc).__name__}: {exc}{suffix}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
