"""Command-line front end.

Subcommands write one table each (CSV or JSON).  Exit status 0 on success,
2 when a parameter violates a precondition, 3 when an internal consistency
check fails.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .boxspec import BoxCylinder, SpectralFamily, spectrum
from .counting import counting_curve
from .errors import BisteklovError, ConfigurationError, ConsistencyError, DomainError, NumericalError
from .fdsolver import BoundaryPartition, Grid2D, steklov_spectrum_2d
from .profile import (
    BoundaryProfile,
    boundary_profile_eval,
    boundary_profile_second_derivative_at_zero,
    h_inverse,
    profile_eval,
    t_profile_derivative,
    unit_ball_volume,
)
from .weyl import (
    BoundaryData,
    convergence_report_counts,
    convergence_report_eigenvalues,
    fit_rate_constant,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONSISTENCY = 3

SPECTRUM_COLUMNS = ("k", "lambda", "family")  # followed by m_1..m_{n-1}
COUNT_COLUMNS = ("tau", "A0", "Af", "weyl_pred", "ratio0", "ratioF")
SOLVE_COLUMNS = ("k", "lambda", "rayleigh_residual")
WEYL_COLUMNS = ("x", "exact", "predicted", "ratio", "trend")
PROFILE_COLUMNS = ("function", "argument", "value", "branch")


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _parse_cell(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


@dataclass
class Table:
    columns: tuple
    rows: list
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        records = [dict(zip(self.columns, row)) for row in self.rows]
        return json.dumps({"meta": self.meta, "records": records}, indent=2, sort_keys=False) + "\n"


def read_table(path) -> Table:
    """Read a CSV or JSON table written by this CLI."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        records = doc["records"]
        columns = tuple(records[0]) if records else ()
        return Table(columns, [tuple(r[c] for c in columns) for r in records], doc.get("meta", {}))
    reader = csv.reader(io.StringIO(text))
    columns = tuple(next(reader))
    return Table(columns, [tuple(_parse_cell(c) for c in row) for row in reader])


# ---------------------------------------------------------------- parsing


def _floats(text: str, what: str) -> list:
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise DomainError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise DomainError(f"{what}: no values given")
    return vals


def _tau_grid(text: str) -> list:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    text = str(text)
    if ":" in text:
        try:
            start, stop, step = (float(v) for v in text.split(":"))
        except ValueError:
            raise DomainError(f"tau grid must be start:stop:step, got {text!r}") from None
        if not (start > 0 and step > 0 and stop >= start):
            raise DomainError(f"tau grid requires 0 < start <= stop and step > 0, got {text!r}")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(n)]
    return _floats(text, "tau grid")


def _k_range(text: str) -> list:
    text = str(text)
    try:
        if ":" in text:
            a, b = (int(v) for v in text.split(":"))
            return list(range(a, b + 1))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise DomainError(f"k range must be a:b or a list of integers, got {text!r}") from None


def _rect(text: str):
    try:
        a, b = (float(v) for v in str(text).lower().split("x"))
    except ValueError:
        raise DomainError(f"--rect must look like 1x2, got {text!r}") from None
    return a, b


def _grid(text: str):
    parts = str(text).lower().split("x")
    try:
        vals = [int(v) for v in parts]
    except ValueError:
        raise DomainError(f"--grid must be N or NXxNY, got {text!r}") from None
    if len(vals) == 1:
        return vals[0], vals[0]
    if len(vals) == 2:
        return vals[0], vals[1]
    raise DomainError(f"--grid must be N or NXxNY, got {text!r}")


def _box(args) -> BoxCylinder:
    sides = _floats(args.sides, "--sides")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return BoxCylinder.from_sides(sides, float(args.height), float(args.rho))


# ---------------------------------------------------------------- commands


def cmd_profile(args) -> Table:
    what = args.eval
    rows = []
    if what == "t":
        for s in _floats(args.s, "--s"):
            r = profile_eval(s)
            rows.append(("t", s, r.value, r.branch))
    elif what == "dt":
        rows = [("dt", s, t_profile_derivative(s), "") for s in _floats(args.s, "--s")]
    elif what == "h":
        rows = [("h", t, h_inverse(t), "") for t in _floats(args.t, "--t")]
    elif what in ("Y", "Z"):
        p = BoundaryProfile(float(args.eta), float(args.height), what)
        rows = [(what, x, boundary_profile_eval(p, x), "") for x in _floats(args.x, "--x")]
    elif what == "Ypp0":
        p = BoundaryProfile(float(args.eta), float(args.height))
        rows = [("Ypp0", float(args.eta) * float(args.height), boundary_profile_second_derivative_at_zero(p), "")]
    elif what == "omega":
        rows = [("omega", int(m), unit_ball_volume(int(m)), "") for m in _floats(args.m, "--m")]
    else:
        raise DomainError(f"unknown profile function {what!r}")
    return Table(PROFILE_COLUMNS, rows)


def cmd_box_spectrum(args) -> Table:
    box = _box(args)
    modes = spectrum(box, SpectralFamily.parse(args.family), int(args.K))
    cols = SPECTRUM_COLUMNS + tuple(f"m_{i + 1}" for i in range(box.n - 1))
    rows = [(k, md.lam, md.family.value) + md.m for k, md in enumerate(modes, start=1)]
    return Table(cols, rows)


def cmd_count(args) -> Table:
    box = _box(args)
    if args.family is not None:
        SpectralFamily.parse(args.family)
    curve = counting_curve(box, _tau_grid(args.tau_grid))
    rows = list(zip(curve.taus, curve.counts0, curve.countsF, curve.weyl, curve.ratios0, curve.ratiosF))
    return Table(COUNT_COLUMNS, rows)


def cmd_weyl_check(args) -> Table:
    box = _box(args)
    family = SpectralFamily.parse(args.family)
    meta = {}
    if args.k_range is not None:
        ks = _k_range(args.k_range)
        if not ks:
            raise DomainError("empty k range")
        lam = [m.lam for m in spectrum(box, family, max(ks))]
        report = convergence_report_eigenvalues(lam, BoundaryData.for_box(box), ks)
    else:
        if args.tau_grid is None:
            raise DomainError("weyl-check needs --tau-grid or --k-range")
        report = convergence_report_counts(box, family, _tau_grid(args.tau_grid))
        if len(report.grid) >= 4:
            meta["rate_constant"] = fit_rate_constant(report.grid, report.ratio)
    meta["trend"] = report.trend
    rows = [(x, e, p, r, report.trend) for x, e, p, r in zip(report.grid, report.exact, report.predicted, report.ratio)]
    return Table(WEYL_COLUMNS, rows, meta)


def cmd_solve2d(args) -> Table:
    a, b = _rect(args.rect)
    nx, ny = _grid(args.grid)
    grid = Grid2D(a, b, nx, ny)
    part = BoundaryPartition.parse(args.faces)
    res = steklov_spectrum_2d(grid, part, int(args.K))
    rows = [(k, float(v), float(r)) for k, (v, r) in enumerate(zip(res.eigenvalues, res.rayleigh_residuals), start=1)]
    return Table(SOLVE_COLUMNS, rows, {"asymmetry_norm": res.asymmetry_norm})


COMMANDS = {
    "profile": cmd_profile,
    "box-spectrum": cmd_box_spectrum,
    "count": cmd_count,
    "weyl-check": cmd_weyl_check,
    "solve2d": cmd_solve2d,
}

# option destinations accepted in a config-file section, per command
_BOX_KEYS = {"sides", "height", "rho", "family"}
CONFIG_KEYS = {
    "profile": {"eval", "s", "t", "x", "eta", "height", "m"},
    "box-spectrum": _BOX_KEYS | {"K"},
    "count": _BOX_KEYS | {"tau_grid"},
    "weyl-check": _BOX_KEYS | {"tau_grid", "k_range"},
    "solve2d": {"rect", "grid", "faces", "K"},
}
_COMMON_KEYS = {"out", "format"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bisteklov", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value file with one [command] section")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"))

    def box(p, family_default="dirichlet"):
        p.add_argument("--sides", help="comma-separated base sides l_1..l_{n-1}")
        p.add_argument("--height", help="cylinder height l_n")
        p.add_argument("--rho", help="density on the Steklov face")
        p.add_argument("--family", help="dirichlet or neumann lateral faces")

    p = sub.add_parser("profile", help="evaluate scalar profile kernels")
    common(p)
    p.add_argument("--eval", help="t, dt, h, Y, Z, Ypp0 or omega")
    p.add_argument("--s")
    p.add_argument("--t")
    p.add_argument("--x")
    p.add_argument("--eta")
    p.add_argument("--height")
    p.add_argument("--m")

    p = sub.add_parser("box-spectrum", help="closed-form Steklov spectrum of a box cylinder")
    common(p)
    box(p)
    p.add_argument("-K", dest="K")

    p = sub.add_parser("count", help="exact counting functions A0, Af on a tau grid")
    common(p)
    box(p)
    p.add_argument("--tau-grid", dest="tau_grid")

    p = sub.add_parser("weyl-check", help="compare counts or eigenvalues with the Weyl law")
    common(p)
    box(p)
    p.add_argument("--tau-grid", dest="tau_grid")
    p.add_argument("--k-range", dest="k_range")

    p = sub.add_parser("solve2d", help="finite-difference Steklov spectrum on a rectangle")
    common(p)
    p.add_argument("--rect")
    p.add_argument("--grid")
    p.add_argument("--faces")
    p.add_argument("-K", dest="K")
    return parser


_DEFAULTS = {
    "format": "csv",
    "rho": "1",
    "family": None,
    "K": "10",
    "eval": "t",
}
_REQUIRED = {
    "profile": (),
    "box-spectrum": ("sides", "height"),
    "count": ("sides", "height", "tau_grid"),
    "weyl-check": ("sides", "height"),
    "solve2d": ("rect", "grid", "faces"),
}


def _load_config(path: str, command: str) -> dict:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigurationError(f"cannot read config {path!r}: {exc}") from None
    unknown_sections = set(cp.sections()) - set(COMMANDS)
    if unknown_sections:
        raise ConfigurationError(f"unknown config section(s): {', '.join(sorted(unknown_sections))}")
    if not cp.has_section(command):
        return {}
    allowed = CONFIG_KEYS[command] | _COMMON_KEYS
    out = {}
    for key, value in cp.items(command):
        dest = key.replace("-", "_")
        if dest not in allowed:
            raise ConfigurationError(f"unknown key {key!r} in section [{command}]")
        out[dest] = value
    return out


def resolve(args) -> argparse.Namespace:
    """Merge config-file values under command-line flags and apply defaults."""
    merged = dict(vars(args))
    if args.config:
        for k, v in _load_config(args.config, args.command).items():
            if merged.get(k) is None:
                merged[k] = v
    for k, v in _DEFAULTS.items():
        if merged.get(k) is None and (k in CONFIG_KEYS[args.command] | _COMMON_KEYS):
            merged[k] = v
    if args.command == "weyl-check" and merged.get("family") is None:
        merged["family"] = "neumann"
    if args.command == "box-spectrum" and merged.get("family") is None:
        merged["family"] = "dirichlet"
    missing = [k for k in _REQUIRED[args.command] if merged.get(k) is None]
    if missing:
        raise DomainError(f"missing required parameter(s): {', '.join(missing)}")
    if merged.get("format") not in ("csv", "json"):
        raise DomainError(f"--format must be csv or json, got {merged.get('format')!r}")
    return argparse.Namespace(**merged)


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        table = COMMANDS[cfg.command](cfg)
        table.meta = {"toolkit": "bisteklov", "version": __version__,
                      "config": {k: v for k, v in sorted(vars(cfg).items()) if v is not None and k != "config"},
                      **table.meta}
        text = table.to_json() if cfg.format == "json" else table.to_csv()
        if cfg.out:
            Path(cfg.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except ConsistencyError as exc:
        print(f"error: internal consistency check failed: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except NumericalError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (BisteklovError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def main() -> None:
    sys.exit(run())
