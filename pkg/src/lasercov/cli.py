"""Command-line experiment runner.

Every subcommand writes a CSV table (header row with units), a JSON sidecar
holding the resolved configuration and seed, and a PNG figure next to the
CSV. ``--plot-script`` additionally writes a standalone plotting script.

Examples::

    lasercov rstar --axis B --grid 0.6:0.99:0.01
    lasercov coverage --env SubUrban --iterations 20000 --out cov.csv
    lasercov association --iterations 50000 --out shares.csv
    lasercov altitude --grid 20:200:10 --out altitude.csv
    lasercov turbulence --geom 1e-16:1e-13:13 --out turbulence.csv
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import CoverageModel
from .errors import ConfigError, NumericalError
from .laser import critical_distance_no_turbulence, critical_distance_turbulent, resolve_r_star
from .model import ENVIRONMENTS, UAV_CLASSES, SystemConfig, apply_overrides, default_config, load, to_flat, validate
from .plotting import FigureSpec, plot_script, render
from .simcore import MODES, run_campaign

log = logging.getLogger("lasercov")

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
ALL_ENVS = tuple(ENVIRONMENTS)


@dataclass
class ExperimentSpec:
    subcommand: str
    config: SystemConfig
    grid: np.ndarray | None
    iterations: int
    seed: int
    out: Path
    workers: int = 1
    envs: tuple[str, ...] = ALL_ENVS
    options: dict = field(default_factory=dict)


@dataclass
class Table:
    columns: list[str]
    rows: list[list]
    figure: FigureSpec

    def write(self, path: Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns)
            for row in self.rows:
                w.writerow([_fmt(v) for v in row])


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.10g}"


# --------------------------------------------------------------------------
# grids


def parse_grid(text: str, geometric: bool = False) -> np.ndarray:
    """``start:stop:step`` (inclusive stop), ``start:stop:n`` when geometric,
    or a comma-separated list. The result must be nonempty and strictly
    increasing."""
    text = text.strip()
    if "," in text or ":" not in text:
        values = np.array([float(t) for t in text.split(",") if t.strip()])
    else:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid {text!r}: expected start:stop:step")
        a, b, c = (float(p) for p in parts)
        if geometric:
            if a <= 0 or b <= 0 or c < 1 or c != int(c):
                raise ConfigError(f"grid {text!r}: geometric grids need positive ends and an integer count")
            values = np.geomspace(a, b, int(c))
        else:
            if c <= 0:
                raise ConfigError(f"grid {text!r}: step must be > 0")
            n = int(math.floor((b - a) / c + 1e-9)) + 1
            values = a + c * np.arange(max(n, 0))
    if values.size == 0:
        raise ConfigError(f"grid {text!r} is empty")
    if np.any(np.diff(values) <= 0):
        raise ConfigError(f"grid {text!r} is not strictly increasing")
    return values


def _db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


# --------------------------------------------------------------------------
# subcommands


def cmd_rstar(spec: ExperimentSpec) -> Table:
    """Critical charging distance against B or cn2."""
    axis = spec.options.get("axis", "B")
    cfg = spec.config
    h = cfg.uav_height
    default = {"B": "0.6:0.99:0.01", "cn2": None}
    grid = spec.grid
    if grid is None:
        grid = parse_grid(default["B"]) if axis == "B" else np.concatenate(([0.0], np.geomspace(1e-16, 1e-13, 13)))
    closed = critical_distance_no_turbulence(cfg.laser, h).r_star
    rows = []
    for v in grid:
        if axis == "B":
            sol = critical_distance_turbulent(cfg.laser, h, B=float(v), tol=cfg.numerics.root_tol)
        else:
            laser = dataclasses.replace(cfg.laser, cn2=float(v))
            if v == 0:
                sol = critical_distance_no_turbulence(laser, h)
            else:
                sol = critical_distance_turbulent(laser, h, tol=cfg.numerics.root_tol)
        rows.append([float(v), sol.r_star, closed])
    xname = "B[-]" if axis == "B" else "cn2[m^-2/3]"
    fig = FigureSpec(x=xname, y=["R_star[m]", "R_star_no_turbulence[m]"], logx=(axis == "cn2"),
                     title="Critical charging distance", ylabel="R* [m]")
    return Table([xname, "R_star[m]", "R_star_no_turbulence[m]"], rows, fig)


def _mc(spec: ExperimentSpec, cfg: SystemConfig, gamma_db, r_star=None, seed_offset=0):
    if spec.iterations <= 0:
        return None
    return run_campaign(cfg, spec.iterations, seed=spec.seed + seed_offset, gamma_db=gamma_db,
                        r_star=r_star, workers=spec.workers, progress=spec.options.get("progress", False))


def cmd_coverage_sweep(spec: ExperimentSpec) -> Table:
    """Coverage against the SINR threshold, analytic and simulated."""
    gamma_db = spec.grid if spec.grid is not None else parse_grid("-10:30:2")
    rows = []
    for k, env in enumerate(spec.envs):
        cfg = spec.config.with_env(env) if env != spec.config.env.label else spec.config
        analytic = CoverageModel(cfg).coverage(_db_to_linear(gamma_db)).coverage
        mc = _mc(spec, cfg, gamma_db, seed_offset=k)
        for j, g in enumerate(gamma_db):
            rows.append([env, g, analytic[j],
                         mc.coverage[j] if mc else math.nan, mc.coverage_stderr[j] if mc else math.nan])
    fig = FigureSpec(x="gamma[dB]", y=["C_analytic[-]", "C_mc[-]"], group="env", markers=["C_mc[-]"],
                     title="Coverage probability vs SINR threshold", ylabel="coverage probability")
    return Table(["env", "gamma[dB]", "C_analytic[-]", "C_mc[-]", "mc_stderr[-]"], rows, fig)


def cmd_association(spec: ExperimentSpec) -> Table:
    """Serving-mode shares per environment and per R*, or the conditional
    central association probability against distance."""
    if spec.options.get("conditional"):
        return _association_conditional(spec)
    r_stars = spec.options.get("r_stars") or [None]
    rows = []
    for k, env in enumerate(spec.envs):
        for q, rs in enumerate(r_stars):
            cfg = spec.config.with_env(env) if env != spec.config.env.label else spec.config
            if rs is not None:
                cfg = dataclasses.replace(cfg, r_star=float(rs))
            model = CoverageModel(cfg)
            shares = model.association_shares()
            mc = _mc(spec, cfg, np.array([0.0]), seed_offset=100 * k + q)
            for mode in MODES:
                rows.append([env, model.r_star, mode, shares[mode], mc.shares[mode] if mc else math.nan])
    fig = FigureSpec(x="R_star[m]", y=["share_analytic[-]", "share_mc[-]"], group="mode", markers=["share_mc[-]"],
                     title="Serving-mode shares", ylabel="share")
    return Table(["env", "R_star[m]", "mode", "share_analytic[-]", "share_mc[-]"], rows, fig)


def _association_conditional(spec: ExperimentSpec) -> Table:
    r = spec.grid if spec.grid is not None else parse_grid("0:1000:20")
    width = float(np.min(np.diff(r))) if len(r) > 1 else 20.0
    edges = np.concatenate((r - width / 2, [r[-1] + width / 2]))
    edges[0] = max(edges[0], 0.0)
    rows = []
    for k, env in enumerate(spec.envs):
        cfg = spec.config.with_env(env) if env != spec.config.env.label else spec.config
        model = CoverageModel(cfg)
        mc = _mc(spec, cfg, np.array([0.0]), seed_offset=k)
        for cls in UAV_CLASSES:
            a = model.association_central(r, cls)
            trials, hits = mc.conditional_association("central_" + cls, edges) if mc else (None, None)
            for j, rj in enumerate(r):
                freq = hits[j] / trials[j] if mc and trials[j] else math.nan
                rows.append([f"{env}-{cls}", rj, a[j], freq, trials[j] if mc else 0])
    fig = FigureSpec(x="r[m]", y=["A_central_analytic[-]", "A_central_mc[-]"], group="env_class",
                     markers=["A_central_mc[-]"], title="Conditional central association",
                     ylabel="probability")
    return Table(["env_class", "r[m]", "A_central_analytic[-]", "A_central_mc[-]", "trials[-]"], rows, fig)


def cmd_altitude_sweep(spec: ExperimentSpec) -> Table:
    """Coverage at a fixed threshold against UAV altitude."""
    heights = spec.grid if spec.grid is not None else parse_grid("20:200:10")
    gamma = _db_to_linear([spec.options.get("gamma_db", 10.0)])
    rows = []
    for env in spec.envs:
        base = spec.config.with_env(env) if env != spec.config.env.label else spec.config
        for h in heights:
            cfg = base.with_uav_height(float(h))
            model = CoverageModel(cfg)
            rows.append([env, h, model.r_star, model.coverage(gamma).coverage[0]])
    fig = FigureSpec(x="h[m]", y=["C_analytic[-]"], group="env", title="Coverage vs UAV altitude",
                     ylabel="coverage probability")
    return Table(["env", "h[m]", "R_star[m]", "C_analytic[-]"], rows, fig)


def cmd_turbulence_sweep(spec: ExperimentSpec) -> Table:
    """Coverage at a fixed threshold against cn2, one curve per B."""
    cn2 = spec.grid if spec.grid is not None else np.geomspace(1e-16, 1e-13, 13)
    levels = spec.options.get("b_levels") or [0.8, 0.9, 0.95]
    gamma = _db_to_linear([spec.options.get("gamma_db", 10.0)])
    rows = []
    env = spec.envs[0]
    base = spec.config.with_env(env) if env != spec.config.env.label else spec.config
    for b in levels:
        for c in cn2:
            cfg = base.with_laser(cn2=float(c), B_threshold=float(b))
            model = CoverageModel(cfg)
            rows.append([f"B={b:g}", c, model.r_star, model.coverage(gamma).coverage[0]])
    fig = FigureSpec(x="cn2[m^-2/3]", y=["C_analytic[-]"], group="B", logx=True,
                     title=f"Turbulence effect on coverage ({env})", ylabel="coverage probability")
    return Table(["B", "cn2[m^-2/3]", "R_star[m]", "C_analytic[-]"], rows, fig)


def cmd_validate(spec: ExperimentSpec) -> Table:
    """Analytic and simulated coverage side by side with their gap."""
    if spec.iterations <= 0:
        raise ConfigError("validate needs --iterations > 0")
    table = cmd_coverage_sweep(spec)
    table.columns.append("abs_diff[-]")
    for row in table.rows:
        row.append(abs(row[2] - row[3]))
    return table


COMMANDS = {
    "rstar": cmd_rstar,
    "coverage": cmd_coverage_sweep,
    "association": cmd_association,
    "altitude": cmd_altitude_sweep,
    "turbulence": cmd_turbulence_sweep,
    "validate": cmd_validate,
}


# --------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration field (repeatable)")
    common.add_argument("--env", choices=ALL_ENVS, action="append",
                        help="environment(s) to evaluate (repeatable; default: all, or Urban for turbulence)")
    common.add_argument("--iterations", type=int, default=0, help="Monte Carlo realizations (0 = analytic only)")
    common.add_argument("--seed", type=int, help="master seed (default: numerics.seed)")
    common.add_argument("--workers", type=int, default=1, help="simulation processes")
    common.add_argument("--out", type=Path, help="output CSV path")
    common.add_argument("--grid", help="sweep grid start:stop:step or a comma list")
    common.add_argument("--geom", help="geometric sweep grid start:stop:count")
    common.add_argument("--plot-script", action="store_true", help="also write a standalone plotting script")
    common.add_argument("--no-figure", action="store_true", help="skip rendering the PNG figure")
    common.add_argument("--progress", action="store_true", help="report simulation progress on stderr")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="lasercov", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    p = sub.add_parser("rstar", parents=[common], help="critical charging distance sweep")
    p.add_argument("--axis", choices=["B", "cn2"], default="B")
    sub.add_parser("coverage", parents=[common], help="coverage vs SINR threshold")
    p = sub.add_parser("association", parents=[common], help="serving-mode shares")
    p.add_argument("--r-star", type=float, action="append", dest="r_stars",
                   help="fix R* (repeatable); default: solve from the laser link")
    p.add_argument("--conditional", action="store_true",
                   help="conditional central association vs distance instead of shares")
    p = sub.add_parser("altitude", parents=[common], help="coverage vs UAV altitude")
    p.add_argument("--gamma-db", type=float, default=10.0)
    p = sub.add_parser("turbulence", parents=[common], help="coverage vs cn2 per B level")
    p.add_argument("--gamma-db", type=float, default=10.0)
    p.add_argument("--b-level", type=float, action="append", dest="b_levels")
    sub.add_parser("validate", parents=[common], help="analytic vs Monte Carlo coverage")
    return parser


def spec_from_args(args) -> ExperimentSpec:
    config = load(args.config) if args.config else default_config()
    if args.set:
        config = apply_overrides(config, args.set)
    if args.env and len(args.env) == 1:
        config = config.with_env(args.env[0])
    config = validate(config)
    if args.grid and args.geom:
        raise ConfigError("use either --grid or --geom")
    grid = parse_grid(args.grid) if args.grid else parse_grid(args.geom, geometric=True) if args.geom else None
    if args.iterations < 0:
        raise ConfigError("--iterations must be >= 0")
    envs = tuple(args.env) if args.env else (("Urban",) if args.subcommand == "turbulence" else ALL_ENVS)
    options = {k: getattr(args, k) for k in ("axis", "r_stars", "conditional", "gamma_db", "b_levels")
               if hasattr(args, k)}
    options["progress"] = args.progress
    out = args.out or Path(f"{args.subcommand}.csv")
    seed = config.numerics.seed if args.seed is None else args.seed
    return ExperimentSpec(args.subcommand, config, grid, args.iterations, seed, out,
                          max(1, args.workers), envs, options)


def run(spec: ExperimentSpec, figure: bool = True, script: bool = False) -> Path:
    table = COMMANDS[spec.subcommand](spec)
    out = spec.out
    out.parent.mkdir(parents=True, exist_ok=True)
    table.write(out)
    sidecar = {
        "subcommand": spec.subcommand,
        "seed": spec.seed,
        "iterations": spec.iterations,
        "environments": list(spec.envs),
        "grid": None if spec.grid is None else [float(x) for x in spec.grid],
        "options": {k: v for k, v in spec.options.items() if k != "progress"},
        "config": to_flat(spec.config),
        "r_star_m": _safe_r_star(spec.config),
        "version": __version__,
    }
    out.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True, default=str))
    png = out.with_suffix(".png")
    if figure:
        render(out, png, table.figure)
    if script:
        out.with_name(out.stem + "_plot.py").write_text(plot_script(out.name, png.name, table.figure))
    return out


def _safe_r_star(config):
    try:
        return resolve_r_star(config)
    except NumericalError:
        return None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        spec = spec_from_args(args)
        out = run(spec, figure=not args.no_figure, script=args.plot_script)
    except ConfigError as exc:
        problems = getattr(exc, "problems", None) or [str(exc)]
        for p in problems:
            print(f"config error: {p}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
