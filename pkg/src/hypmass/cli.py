"""Command-line front end: ``hypmass {flow, ellipse, mass-report, verify}``.

Exit codes: 0 success, 1 usage/I-O error, 2 hypothesis or domain violation,
3 solver failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .btz import N_PHI, EllipseSpec, byst_at_radius, default_eps_grid, fig1_sweep, m_infinity, write_sweep_csv
from .errors import DomainError, HypothesisError, InputError, SolverError
from .flow import FlowConfig, boundary_data_from_curvature, solution_from_table, solve
from .grid import PeriodicGridFunction, phi_grid
from .io import fmt, load_periodic_csv, read_solution_csv, write_solution_csv
from .mass import mass_report

EXIT_OK, EXIT_USAGE, EXIT_HYPOTHESIS, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3, 4

log = logging.getLogger("hypmass")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; that code is reserved here
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _pair(text) -> tuple[float, float]:
    parts = [p for p in str(text).split(",") if p.strip()]
    if len(parts) != 2:
        raise ValueError(f"expected 'a,b', got {text!r}")
    return float(parts[0]), float(parts[1])


def _float_list(text) -> tuple[float, ...]:
    vals = tuple(float(p) for p in str(text).split(",") if p.strip())
    if not vals:
        raise ValueError("empty list")
    return vals


@dataclass(frozen=True)
class Option:
    flag: str
    type: object
    default: object = None
    help: str = ""
    switch: bool = False

    @property
    def key(self) -> str:
        return self.flag.lstrip("-").replace("-", "_")


OPTIONS = {
    "flow": (
        Option("--k-csv", Path, help="boundary curvature k(phi) as phi,k rows"),
        Option("--k-const", float, help="constant boundary curvature"),
        Option("--k-cosine", _pair, help="k = a + b cos(phi), given as a,b"),
        Option("--r0", float, 1.0, "initial radius"),
        Option("--r-max", float, 1e3, "final radius"),
        Option("--n-phi", int, 256, "angular resolution"),
        Option("--tol", float, 1e-8, "local error tolerance"),
        Option("--tail-fit-window", float, 10.0, "fit v over r >= r_max / window"),
        Option("--out", Path, Path("solution.csv"), "solution CSV (r,phi,u,v)"),
        Option("--report", Path, Path("mass_report.csv"), "mass report CSV"),
    ),
    "ellipse": (
        Option("--m", float, help="BTZ mass parameter"),
        Option("--eps", float, help="ellipse eccentricity parameter"),
        Option("--R", float, help="finite radius: BYST mass of Sigma_R"),
        Option("--limit", _bool, False, "large-R limit m_inf (default mode)", switch=True),
        Option("--sweep", _bool, False, "m_inf over a grid of (m, eps), as CSV", switch=True),
        Option("--m-list", _float_list, (1.0, 0.0, -1.0), "sweep masses, comma separated"),
        Option("--eps-list", _float_list, None, "sweep eps values (default 0:2:0.05)"),
        Option("--n-phi", int, N_PHI, "quadrature points"),
        Option("--out", Path, None, "sweep CSV path (default stdout)"),
    ),
    "mass-report": (
        Option("--solution", Path, help="solution CSV written by 'flow'"),
        Option("--out", Path, Path("mass_report.csv"), "mass report CSV"),
        Option("--tol", float, 1e-8, "tolerance used for the monotonicity count"),
        Option("--tail-fit-window", float, 10.0, "fit v over r >= r_max / window"),
    ),
    "verify": (
        Option("--quick", _bool, False, "reduced grids and ensembles", switch=True),
    ),
}


@dataclass(frozen=True)
class RunConfig:
    """Merged settings for one invocation (flags > config file > defaults)."""

    command: str
    options: dict = field(default_factory=dict)
    verbose: bool = False

    def __getattr__(self, name):
        try:
            return self.__dict__["options"][name]
        except KeyError:
            raise AttributeError(name) from None

    def flow_config(self) -> FlowConfig:
        return FlowConfig(r0=self.r0, r_max=self.r_max, n_phi=self.n_phi, tol=self.tol,
                          tail_fit_window=self.tail_fit_window)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hypmass", description="Quasi-local mass computations in 2D.")
    parser.add_argument("--version", action="version", version=f"hypmass {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, opts in OPTIONS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="key=value settings file")
        p.add_argument("-v", "--verbose", action="store_true")
        for opt in opts:
            if opt.switch:
                p.add_argument(opt.flag, dest=opt.key, action="store_const", const=True,
                               default=None, help=opt.help)
            else:
                p.add_argument(opt.flag, dest=opt.key, type=opt.type, default=None, help=opt.help)
    return parser


def read_config_file(path: Path, command: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment.  Unknown keys are errors."""
    known = {opt.key: opt for opt in OPTIONS[command]}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise InputError(f"{path}:{lineno}: unknown key {key!r} for '{command}'")
        try:
            out[key] = known[key].type(value)
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return out


def resolve(args: argparse.Namespace) -> RunConfig:
    file_opts = read_config_file(args.config, args.command) if args.config else {}
    merged = {}
    for opt in OPTIONS[args.command]:
        flag_value = getattr(args, opt.key)
        if flag_value is not None:
            merged[opt.key] = flag_value
        elif opt.key in file_opts:
            merged[opt.key] = file_opts[opt.key]
        else:
            merged[opt.key] = opt.default
    return RunConfig(args.command, merged, bool(args.verbose))


def _boundary_curvature(cfg: RunConfig) -> PeriodicGridFunction:
    given = [k for k in ("k_csv", "k_const", "k_cosine") if cfg.options[k] is not None]
    if len(given) != 1:
        raise UsageError("flow: give exactly one of --k-csv, --k-const, --k-cosine")
    if cfg.k_csv is not None:
        return load_periodic_csv(cfg.k_csv)
    if cfg.k_const is not None:
        return PeriodicGridFunction.constant(cfg.k_const, cfg.n_phi)
    a, b = cfg.k_cosine
    return PeriodicGridFunction(a + b * np.cos(phi_grid(cfg.n_phi)))


def cmd_flow(cfg: RunConfig) -> int:
    config = cfg.flow_config()
    k = _boundary_curvature(cfg)
    u0 = boundary_data_from_curvature(k, config.r0)
    sol = solve(u0, config)
    report = mass_report(sol)
    write_solution_csv(sol, cfg.out)
    report.to_csv(cfg.report)
    print(report.summary())
    log.info("steps: %d accepted, %d rejected", sol.accepted_steps, sol.rejected_steps)
    return EXIT_OK


def cmd_ellipse(cfg: RunConfig) -> int:
    if cfg.sweep:
        if cfg.R is not None or cfg.limit:
            raise UsageError("ellipse: --sweep excludes --R and --limit")
        eps = default_eps_grid() if cfg.eps_list is None else np.array(cfg.eps_list)
        rows = fig1_sweep(cfg.m_list, eps, cfg.n_phi)
        write_sweep_csv(rows, cfg.out if cfg.out is not None else sys.stdout)
        return EXIT_OK
    if cfg.m is None or cfg.eps is None:
        raise UsageError("ellipse: --m and --eps are required")
    if cfg.R is not None and cfg.limit:
        raise UsageError("ellipse: choose one of --R and --limit")
    if cfg.R is not None:
        value = byst_at_radius(EllipseSpec(cfg.m, cfg.eps, cfg.R), cfg.n_phi)
        print(f"byst={fmt(value)}")
    else:
        print(f"m_infinity={fmt(m_infinity(cfg.m, cfg.eps, cfg.n_phi))}")
    return EXIT_OK


def cmd_mass_report(cfg: RunConfig) -> int:
    if cfg.solution is None:
        raise UsageError("mass-report: --solution is required")
    radii, u = read_solution_csv(cfg.solution)
    sol = solution_from_table(radii, u, tol=cfg.tol, tail_fit_window=cfg.tail_fit_window)
    report = mass_report(sol)
    report.to_csv(cfg.out)
    print(report.summary())
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    from .verify import run

    return EXIT_OK if run(quick=cfg.quick, echo=print) else EXIT_VERIFY


COMMANDS = {"flow": cmd_flow, "ellipse": cmd_ellipse, "mass-report": cmd_mass_report,
            "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        cfg = resolve(args)
        logging.basicConfig(level=logging.DEBUG if cfg.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HypothesisError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (InputError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
