"""Command-line front end.

    oscillab sieve   --app divisor --nmax 1000000 --build
    oscillab report  --app divisor --tmin 1024 --tmax 131072 --lambda 0.1 --alpha 0.25
    oscillab mellin  --app squarefree --s 2.0

Exit codes: 0 success, 2 usage, 3 missing cache, 4 numeric error.
"""

import argparse
from dataclasses import asdict, dataclass, fields, replace
import datetime as _dt
import json
import math
import os
from pathlib import Path
import sys

import numpy as np

from . import sieve as sv
from .delta import (
    CSV_COLUMNS,
    AlphaMode,
    AlphaSpec,
    DeltaFunction,
    Side,
    delta_at,
    format_number,
    measure_above,
    moment_integral,
    omega_report,
    sign_changes,
)
from .dirichlet import application
from .errors import CacheError, OscillabError
from .main_term import closed_form_main_term
from .mellin import default_contour, mellin_contour, mellin_direct

COMMANDS = ("sieve", "delta", "moments", "measure", "signs", "mellin", "report")
EXIT_USAGE, EXIT_CACHE, EXIT_NUMERIC = 2, 3, 4
DEFAULT_CACHE = ".oscillab-cache"
DEFAULT_NMAX = 100_000


class UsageError(Exception):
    pass


class CacheMiss(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    app: str = "divisor"
    theta: float = 1.0
    n_max: int = 0
    t_min: float = 1000.0
    t_max: float = 0.0
    free_range: bool = False
    lam: float = 0.1
    alpha_mode: str = "constant"
    alpha: float = 0.25
    alpha_c: float = 0.1
    smoothing_y: float = 0.0
    cache_dir: str = DEFAULT_CACHE
    threads: int = 1
    output: str = "csv"
    out_path: str = ""
    build: bool = False
    stamp: bool = False
    s: complex = 2.0
    x_max: float = 0.0
    H: float = 1000.0
    points: int = 1000
    explicit_t_max: bool = False

    @property
    def alpha_spec(self):
        return AlphaSpec(AlphaMode(self.alpha_mode), self.alpha, self.alpha_c)

    @property
    def workers(self):
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)

    def windows(self):
        """Starting points T of the dyadic windows [T, 2T].

        With an explicit t_max every T = t_min 2^k <= t_max starts a window;
        otherwise the single window [t_min, 2 t_min] is used.
        """
        last = self.t_max if self.explicit_t_max else self.t_min
        out, T = [], self.t_min
        while T <= last * (1 + 1e-12):
            out.append(T)
            T *= 2
        return out


_FLAGS = {
    # flag: (config field, type)
    "app": ("app", str),
    "theta": ("theta", float),
    "nmax": ("n_max", int),
    "tmin": ("t_min", float),
    "tmax": ("t_max", float),
    "lambda": ("lam", float),
    "alpha": ("alpha", float),
    "alpha_mode": ("alpha_mode", str),
    "alpha_c": ("alpha_c", float),
    "smoothing_y": ("smoothing_y", float),
    "cache_dir": ("cache_dir", str),
    "threads": ("threads", int),
    "output": ("output", str),
    "out": ("out_path", str),
    "s": ("s", complex),
    "xmax": ("x_max", float),
    "H": ("H", float),
    "points": ("points", int),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _complex(text):
    return complex(text.replace(" ", ""))


def build_parser():
    p = _Parser(prog="oscillab", description="Error terms of summatory functions and their oscillation.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--app")
    p.add_argument("--theta", type=float)
    p.add_argument("--nmax", type=int)
    p.add_argument("--tmin", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--free-range", action="store_true", default=None)
    p.add_argument("--lambda", dest="lambda", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--alpha-mode", dest="alpha_mode", choices=[m.value for m in AlphaMode])
    p.add_argument("--alpha-c", dest="alpha_c", type=float)
    p.add_argument("--smoothing-y", dest="smoothing_y", type=float)
    p.add_argument("--cache-dir", dest="cache_dir")
    p.add_argument("--threads", type=int)
    p.add_argument("--output", choices=["csv", "json"])
    p.add_argument("--out")
    p.add_argument("--build", action="store_true", default=None)
    p.add_argument("--stamp", action="store_true", default=None)
    p.add_argument("--s", type=_complex)
    p.add_argument("--xmax", type=float)
    p.add_argument("--H", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--config", help="JSON file with RunConfig field names")
    return p


def parse_config(argv, env=None):
    """(command, RunConfig) from argv; flags override the config file.

    The cache directory comes from --cache-dir, then OSCILLAB_CACHE, then the
    config file, then the default.
    """
    env = os.environ if env is None else env
    args = vars(build_parser().parse_args(argv))
    values = {}
    if args.get("config"):
        try:
            with open(args["config"]) as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
        known = {f.name for f in fields(RunConfig)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        values.update(data)
    if env.get("OSCILLAB_CACHE"):
        values["cache_dir"] = env["OSCILLAB_CACHE"]
    for flag, (name, _) in _FLAGS.items():
        if args.get(flag) is not None:
            values[name] = args[flag]
    for flag in ("free_range", "build", "stamp"):
        if args.get(flag):
            values[flag] = True
    try:
        if "s" in values:
            values["s"] = complex(values["s"])
        cfg = RunConfig(**values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    return args["command"], _finish(args["command"], cfg)


def _finish(command, cfg):
    if cfg.output not in ("csv", "json"):
        raise UsageError("--output must be csv or json")
    try:
        application(cfg.app, cfg.theta)
        AlphaSpec(AlphaMode(cfg.alpha_mode), cfg.alpha, cfg.alpha_c)
    except (OscillabError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    if not cfg.t_min >= 1:
        raise UsageError("--tmin must be at least 1")
    t_max = cfg.t_max or 2 * cfg.t_min
    if t_max < cfg.t_min:
        raise UsageError("--tmax must not be below --tmin")
    if cfg.t_max and not cfg.free_range and command == "report":
        ratio = math.log2(t_max / cfg.t_min)
        if abs(ratio - round(ratio)) > 1e-9:
            raise UsageError("report windows are dyadic: tmax/tmin must be a power of 2 (or --free-range)")
    # a report needs the whole last window [t_max, 2 t_max]
    reach = (2 * t_max if cfg.t_max else t_max) if command == "report" else t_max
    n_max = cfg.n_max or max(DEFAULT_NMAX, math.ceil(reach))
    if reach > n_max:
        raise UsageError(f"range up to {reach} exceeds --nmax {n_max}")
    if cfg.lam < 0:
        raise UsageError("--lambda must be non-negative")
    return replace(cfg, t_max=t_max, n_max=n_max, explicit_t_max=bool(cfg.t_max))


# -- pipeline ----------------------------------------------------------------


def cache_path(cfg, kind):
    theta = format_number(kind.theta)
    return Path(cfg.cache_dir) / f"{kind.name}_theta{theta}_n{cfg.n_max}.osc"


def load_table(cfg, kind, log):
    path = cache_path(cfg, kind)
    if path.exists():
        seq = sv.cache_load(path, kind)
    elif cfg.build:
        log(f"sieving {kind.name} up to {cfg.n_max}")
        seq = sv.sieve(kind, cfg.n_max, workers=cfg.workers)
        path.parent.mkdir(parents=True, exist_ok=True)
        sv.cache_store(seq, path)
    else:
        raise CacheMiss(f"no cache at {path}; rerun with --build or run the sieve command")
    return sv.PrefixTable.from_sequence(seq)


def _delta(cfg, log):
    app = application(cfg.app, cfg.theta)
    table = load_table(cfg, app.kind, log)
    return app, DeltaFunction(table, closed_form_main_term(app))


def _csv(header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _cell(v):
    return v if isinstance(v, str) else format_number(v)


def _json(obj):
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _cmd_sieve(cfg, log):
    kind = application(cfg.app, cfg.theta).kind
    path = cache_path(cfg, kind)
    log(f"sieving {kind.name} up to {cfg.n_max}")
    seq = sv.sieve(kind, cfg.n_max, workers=cfg.workers)
    path.parent.mkdir(parents=True, exist_ok=True)
    sv.cache_store(seq, path)
    total = float(sv.kahan_prefix(seq.values)[-1])
    row = {"kind": kind.name, "theta": kind.theta, "n_max": cfg.n_max, "sum": total, "path": str(path)}
    if cfg.output == "json":
        return _json(row)
    return _csv(list(row), [list(row.values())])


def _cmd_delta(cfg, log):
    _, d = _delta(cfg, log)
    xs = np.linspace(cfg.t_min, cfg.t_max, cfg.points)
    ys = delta_at(d, xs)
    if cfg.output == "json":
        return _json({"x": xs.tolist(), "delta": ys.tolist()})
    return _csv(["x", "delta"], zip(xs, ys))


def _cmd_moments(cfg, log):
    _, d = _delta(cfg, log)
    header = ["T", "moment2", "moment4"]
    rows = []
    smooth = cfg.smoothing_y != 0
    if smooth:
        header.append("smoothed2")
    for T in cfg.windows():
        log(f"moments on [{T}, {2 * T}]")
        row = [T, moment_integral(d, T, 2), moment_integral(d, T, 4)]
        if smooth:
            y = cfg.smoothing_y if cfg.smoothing_y > 0 else 1e3 * T
            row.append(moment_integral(d, T, 2, weight_alpha=cfg.alpha_spec.at(T), smoothing_y=y))
        rows.append(row)
    if cfg.output == "json":
        return _json([dict(zip(header, r)) for r in rows])
    return _csv(header, rows)


def _cmd_measure(cfg, log):
    _, d = _delta(cfg, log)
    header = ["T", "lambda", "alpha", "measure_plus", "measure_minus", "measure_abs"]
    rows = []
    for T in cfg.windows():
        a = cfg.alpha_spec
        rows.append(
            [T, cfg.lam, a.at(T)]
            + [measure_above(d, T, cfg.lam, a, side) for side in (Side.PLUS, Side.MINUS, Side.ABS)]
        )
    if cfg.output == "json":
        return _json([dict(zip(header, r)) for r in rows])
    return _csv(header, rows)


def _cmd_signs(cfg, log):
    _, d = _delta(cfg, log)
    xs = sign_changes(d, cfg.t_min, cfg.t_max)
    if cfg.output == "json":
        return _json(xs)
    return "".join(format_number(x) + "\n" for x in xs)


def _cmd_mellin(cfg, log):
    app, d = _delta(cfg, log)
    s = complex(cfg.s)
    x_max = cfg.x_max or cfg.n_max
    direct, e_direct = mellin_direct(d, s, x_max, sigma2=app.sigma2)
    contour, e_contour = mellin_contour(app, default_contour(app, H=cfg.H), s)
    out = {
        "s": [s.real, s.imag],
        "direct": [direct.real, direct.imag],
        "contour": [contour.real, contour.imag],
        "bounds": {"direct": e_direct, "contour": e_contour},
        "difference": abs(direct - contour),
        "within_bounds": bool(abs(direct - contour) <= e_direct + e_contour),
    }
    return _json(out)


def _cmd_report(cfg, log):
    _, d = _delta(cfg, log)
    reports = []
    for T in cfg.windows():
        log(f"report on [{T}, {2 * T}]")
        reports.append(omega_report(d, T, cfg.lam, cfg.alpha_spec))
    if cfg.output == "json":
        return _json(
            {
                "app": cfg.app,
                "theta": cfg.theta,
                "alpha": cfg.alpha_spec.describe(),
                "reports": [r.to_dict() for r in reports],
            }
        )
    lines = [",".join(CSV_COLUMNS)] + [r.csv_row() for r in reports]
    return "\n".join(lines) + "\n"


_DISPATCH = {
    "sieve": _cmd_sieve,
    "delta": _cmd_delta,
    "moments": _cmd_moments,
    "measure": _cmd_measure,
    "signs": _cmd_signs,
    "mellin": _cmd_mellin,
    "report": _cmd_report,
}


def run(cfg, command, stdout=None, stderr=None):
    """Execute one command; returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr

    def log(msg):
        print(msg, file=stderr, flush=True)

    try:
        text = _DISPATCH[command](cfg, log)
    except (CacheMiss, CacheError) as exc:
        log(f"error: {exc}")
        return EXIT_CACHE
    except (OscillabError, ArithmeticError, ValueError) as exc:
        log(f"error: {exc}")
        return EXIT_NUMERIC
    if cfg.stamp:
        text = f"# generated {_dt.datetime.now(_dt.timezone.utc).isoformat()}\n" + text
    if cfg.out_path:
        Path(cfg.out_path).write_text(text)
    else:
        stdout.write(text)
    return 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        command, cfg = parse_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg, command)


if __name__ == "__main__":
    sys.exit(main())
