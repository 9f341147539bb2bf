"""Command-line front end.

Every command writes a table: CSV preceded by a commented JSON metadata
block (``--format json`` gives a single JSON document instead). Output is a
pure function of the arguments, so identical invocations produce identical
bytes.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .model1d import (
    T_SWITCH,
    DataQualityError,
    DomainError,
    ejected_energy,
    ejected_energy_inf,
    spectrum_rect,
    theta_asymptotic,
    theta_rect,
)
from .model3d import Atom3D, evolve3d, theta3d_asymptotic, theta3d_rect
from .quadrature import QuadratureError
from .train import TrainSpec, full_train_survival, simplified_train
from .volterra import PulseProgram, SolverError, VolterraProblem, invert_laplace_theta, solve

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
NUMERICAL_ERRORS = (SolverError, QuadratureError, DataQualityError, ArithmeticError, FloatingPointError)

log = logging.getLogger("deltaion")


class InputError(ValueError):
    """Malformed user input (bad CSV line, inconsistent options)."""


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    plot: dict | None = None  # keyword arguments for plotting.render


@dataclass
class RunConfig:
    command: str
    tolerance: float
    step: float | None
    kmax: float | None
    t_switch: float | None
    output_format: str
    output: str | None
    params: dict


# --- formatting ----------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".15g")


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else _fmt(v)
    return v


def render_csv(table: Table) -> str:
    buf = io.StringIO()
    meta = json.dumps(_jsonable(table.metadata), indent=2, sort_keys=True)
    for line in meta.splitlines():
        buf.write(f"# {line}\n")
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def render_json(table: Table) -> str:
    doc = {
        "metadata": table.metadata,
        "columns": table.columns,
        "rows": [[_fmt(v) if isinstance(v, str) else v for v in row] for row in table.rows],
    }
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


# --- pulse program input -------------------------------------------------


def read_pulse_csv(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Parse ``t, eta`` samples. Blank lines and ``#`` comments are ignored;
    the first data line may be a header."""
    ts, etas = [], []
    seen_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise InputError(f"line {lineno}: expected 2 columns, found {len(parts)}")
        try:
            t, eta = float(parts[0]), float(parts[1])
        except ValueError:
            if not seen_data and not ts and all(p and not _is_number(p) for p in parts):
                seen_data = True  # header
                continue
            raise InputError(f"line {lineno}: cannot parse {line!r} as two numbers") from None
        seen_data = True
        if not (math.isfinite(t) and math.isfinite(eta)):
            raise InputError(f"line {lineno}: values must be finite")
        if ts and t <= ts[-1]:
            raise InputError(f"line {lineno}: time {t} does not increase")
        if t < 0:
            raise InputError(f"line {lineno}: time must be >= 0")
        ts.append(t)
        etas.append(eta)
    if len(ts) < 2:
        raise InputError("need at least two samples")
    return np.array(ts), np.array(etas)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


# --- commands ------------------------------------------------------------


def _grid(lo, hi, n):
    if n < 1:
        raise InputError("--points must be >= 1")
    if hi < lo:
        raise InputError("range upper bound below lower bound")
    return np.linspace(lo, hi, n) if n > 1 else np.array([lo])


def cmd_survival(args, cfg: RunConfig) -> Table:
    ts = _grid(args.t_min, args.t_max, args.points)
    if ts[0] < 0:
        raise InputError("times must be >= 0")
    table = Table(["r", "t", "survival", "path", "ratio_asymptotic"])
    step = cfg.step or 2.5e-3
    for r in args.r:
        if args.path == "closed":
            th = theta_rect(r, ts, t_switch=cfg.t_switch)
        elif args.path == "volterra":
            sol = solve(
                VolterraProblem(PulseProgram.rect(r, ts[-1]), max(ts[-1], step), step=step, tolerance=cfg.tolerance)
            )
            th = sol.theta(ts)
        elif args.path == "laplace":
            if ts[-1] > 50:
                raise InputError("the laplace path supports t <= 50")
            th = np.array([1.0 + 0j if t == 0 else invert_laplace_theta(r, t) for t in ts])
        else:
            th = theta_asymptotic(r, ts, t_switch=T_SWITCH if cfg.t_switch is None else cfg.t_switch)
        P = np.abs(th) ** 2
        b = r + 1.0
        for t, p in zip(ts, P):
            ratio = ""
            if b < 0 and t > 0:
                # normalised by the leading r^4 / ((r+1)^4 pi t^3) decay
                ratio = p * b**4 * math.pi * t**3 / r**4
            table.rows.append([r, t, p, args.path, ratio])
    table.plot = dict(x="t", y="survival", group="r", logy=True)
    return table


def cmd_spectrum(args, cfg: RunConfig) -> Table:
    ks = _grid(args.k_min, args.k_max, args.points)
    table = Table(["tau", "k", "spectral_density"])
    for tau in args.tau:
        if tau < 0:
            raise InputError("tau must be >= 0")
        dens = np.abs(spectrum_rect(ks, args.r, tau)) ** 2 if tau > 0 else np.zeros_like(ks)
        for k, d in zip(ks, dens):
            table.rows.append([tau, k, d])
    peaks = {}
    for tau in args.tau:
        rows = [row for row in table.rows if row[0] == tau]
        best = max(rows, key=lambda row: row[2])
        peaks[_fmt(tau)] = best[1]
    table.metadata["peak_k"] = peaks
    table.plot = dict(x="k", y="spectral_density", group="tau")
    return table


def cmd_energy(args, cfg: RunConfig) -> Table:
    table = Table(["r", "tau", "energy"])
    kmax = cfg.kmax or 50.0
    for r in args.r:
        for tau in args.tau:
            if tau < 0:
                raise InputError("tau must be >= 0")
            table.rows.append([r, tau, ejected_energy(r, tau, kmax=kmax)])
        if args.inf:
            table.rows.append([r, "inf", ejected_energy_inf(r)])
    table.plot = dict(x="tau", y="energy", group="r")
    return table


def cmd_train(args, cfg: RunConfig) -> Table:
    try:
        spec = TrainSpec(args.r, args.tau, args.sigma, args.n)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    simple = simplified_train(spec)
    step = cfg.step or spec.tau / 40
    nodes = max(1, round(spec.tau / step))
    full = full_train_survival(spec, nodes_per_pulse=nodes, tolerance=cfg.tolerance)
    n = np.arange(1, spec.n_pulses + 1)
    decay = np.exp(-2 * simple.gamma * n)
    table = Table(["n", "survival_full", "survival_simplified", "exp_decay", "within_horizon"])
    for i in range(spec.n_pulses):
        table.rows.append(
            [int(n[i]), full.survival[i], simple.survival[i], decay[i], bool(n[i] <= simple.validity_horizon)]
        )
    fit_n = min(simple.validity_horizon, spec.n_pulses)
    meta = {
        "rho": [simple.rho.real, simple.rho.imag],
        "gamma": simple.gamma,
        "validity_horizon": simple.validity_horizon,
        "effective_step": spec.tau / nodes,
    }
    if args.r != 0 and fit_n >= 3:
        slope, err = full.decay_fit(fit_n)
        meta.update(fitted_decay_per_pulse=-slope, fit_stderr=err, fit_pulses=fit_n)
    table.metadata.update(meta)
    table.plot = dict(x="n", y="survival_full")
    return table


def cmd_custom(args, cfg: RunConfig) -> Table:
    text = sys.stdin.read() if args.program == "-" else Path(args.program).read_text()
    t, eta = read_pulse_csv(text)
    program = PulseProgram.sampled(t, eta, rule=args.interp)
    t_end = args.t_end if args.t_end is not None else float(t[-1])
    if t_end <= 0:
        raise InputError("--t-end must be > 0")
    ts = _grid(0.0, t_end, args.points)
    step = cfg.step or 5e-3
    if args.three_d:
        Q, a = args.three_d
        atom = Atom3D(Q, a)
        rec = evolve3d(atom, program, t_end=t_end, step=step, times=ts, tolerance=cfg.tolerance)
        theta = rec.theta
        table_meta = {"model": "3d", "Q": Q, "a": a, "p": atom.p}
    else:
        sol = solve(VolterraProblem(program, max(t_end, step), step=step, tolerance=cfg.tolerance))
        theta = sol.theta(ts)
        table_meta = {"model": "1d"}
    table = Table(["t", "theta_re", "theta_im", "survival"], metadata=table_meta)
    for ti, th in zip(ts, theta):
        table.rows.append([ti, th.real, th.imag, abs(th) ** 2])
    table.metadata["samples"] = int(t.size)
    table.plot = dict(x="t", y="survival")
    return table


def cmd_atom3d(args, cfg: RunConfig) -> Table:
    atom = Atom3D(args.Q, args.a)
    taus = np.asarray(args.tau, dtype=float)
    if np.any(taus < 0):
        raise InputError("tau must be >= 0")
    Q1 = (1 + args.r) * args.Q
    if args.path == "projection":
        th = np.atleast_1d(theta3d_rect(atom, args.r, taus, kmax=cfg.kmax or 40.0))
    elif args.path == "volterra":
        step = cfg.step or 5e-3
        th = np.array(
            [
                evolve3d(
                    atom, PulseProgram.rect(args.r, tau), t_end=max(tau, step), step=step, tolerance=cfg.tolerance
                ).theta[-1]
                if tau > 0
                else 1.0 + 0j
                for tau in taus
            ]
        )
    else:
        th = np.atleast_1d(theta3d_asymptotic(atom, args.r, taus))
    table = Table(["tau", "theta_re", "theta_im", "survival", "path"])
    for tau, v in zip(taus, th):
        table.rows.append([tau, v.real, v.imag, abs(v) ** 2, args.path])
    table.metadata.update(p=atom.p, omega0=atom.omega0, Q1=Q1)
    table.plot = dict(x="tau", y="survival")
    return table


COMMANDS = {
    "survival": cmd_survival,
    "spectrum": cmd_spectrum,
    "energy": cmd_energy,
    "train": cmd_train,
    "custom": cmd_custom,
    "atom3d": cmd_atom3d,
}


def _positive(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0: {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="deltaion", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--tolerance", type=_positive, default=1e-6, help="solver step residual tolerance (default 1e-6)")
    p.add_argument("--step", type=_positive, default=None, help="Volterra step; default depends on the command")
    p.add_argument("--kmax", type=_positive, default=None, help="momentum cutoff of spectral quadratures")
    p.add_argument("--t-switch", type=float, default=None, help="time beyond which closed forms switch to asymptotics")
    p.add_argument("--format", choices=("csv", "json"), default="csv", dest="output_format")
    p.add_argument("-o", "--output", default=None, help="output file (default stdout)")
    p.add_argument("--plot", default=None, metavar="PNG", help="also render a figure (needs matplotlib)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("survival", help="survival probability under a rectangular pulse")
    s.add_argument("--r", type=float, nargs="+", required=True)
    s.add_argument("--t-min", type=float, default=0.0)
    s.add_argument("--t-max", type=float, default=10.0)
    s.add_argument("--points", type=int, default=101)
    s.add_argument("--path", choices=("closed", "volterra", "laplace", "asymptotic"), default="closed")

    s = sub.add_parser("spectrum", help="momentum distribution of ejected electrons")
    s.add_argument("--r", type=float, required=True)
    s.add_argument("--tau", type=float, nargs="+", required=True)
    s.add_argument("--k-min", type=float, default=0.0)
    s.add_argument("--k-max", type=float, default=5.0)
    s.add_argument("--points", type=int, default=201)

    s = sub.add_parser("energy", help="energy carried by ejected electrons")
    s.add_argument("--r", type=float, nargs="+", required=True)
    s.add_argument("--tau", type=float, nargs="*", default=[])
    s.add_argument("--inf", action="store_true", help="add the infinitely long pulse limit")

    s = sub.add_parser("train", help="periodic train of short pulses")
    s.add_argument("--r", type=float, required=True)
    s.add_argument("--tau", type=float, required=True)
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--n", type=int, default=100)

    s = sub.add_parser("custom", help="arbitrary sampled perturbation read from CSV")
    s.add_argument("program", help="CSV file with columns t, eta ('-' for stdin)")
    s.add_argument("--t-end", type=float, default=None)
    s.add_argument("--points", type=int, default=201)
    s.add_argument("--interp", choices=("linear", "previous"), default="linear")
    s.add_argument("--three-d", type=float, nargs=2, metavar=("Q", "A"), default=None)

    s = sub.add_parser("atom3d", help="three-dimensional shell model, rectangular pulse")
    s.add_argument("--Q", type=_positive, required=True)
    s.add_argument("--a", type=_positive, default=1.0)
    s.add_argument("--r", type=float, required=True)
    s.add_argument("--tau", type=float, nargs="+", required=True)
    s.add_argument("--path", choices=("projection", "volterra", "asymptotic"), default="projection")
    return p


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with code 2
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    params = {
        k: v
        for k, v in vars(args).items()
        if k not in ("tolerance", "step", "kmax", "t_switch", "output_format", "output", "plot", "verbose", "command")
    }
    cfg = RunConfig(
        args.command, args.tolerance, args.step, args.kmax, args.t_switch, args.output_format, args.output, params
    )
    try:
        with np.errstate(all="ignore"):
            table = COMMANDS[args.command](args, cfg)
    except (InputError, DomainError, NotImplementedError, FileNotFoundError) as exc:
        print(f"deltaion: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERICAL_ERRORS as exc:
        print(f"deltaion: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"deltaion: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    # the destination is not part of the result, so it stays out of the metadata
    recorded = {k: v for k, v in asdict(cfg).items() if k != "output"}
    table.metadata = {"version": __version__, "config": recorded, **table.metadata}
    text = render_json(table) if cfg.output_format == "json" else render_csv(table)
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        stdout.write(text)
    if args.plot and table.plot:
        from .plotting import render

        try:
            render(table.columns, table.rows, path=args.plot, title=args.command, **table.plot)
        except RuntimeError as exc:
            print(f"deltaion: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
