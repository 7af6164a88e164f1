"""Experiment orchestration: single runs, epsilon sweeps, null checks, convergence.

Configs are INI files with sections [model], [data], [grid] and [run]::

    [model]
    kind = chaplygin
    gamma = 1.4

    [data]
    epsilon = 0.1

    [grid]
    N = 4000
    R_max = 120

    [run]
    T_max = 100

Unknown sections or keys are rejected.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__, diagnostics, eos, mesh, nullcheck, potential, solver, transform
from .errors import (ChapgasError, ConfigError, InsufficientPoints, ResolutionMismatch,
                     TooCoarse)

EXIT_OK, EXIT_CONFIG, EXIT_ABORTED = 0, 2, 3
MARGIN = 5.0


@dataclass(frozen=True)
class RunConfig:
    kind: str = eos.CHAPLYGIN
    P0: float = 2.0
    rho_bar: float = 1.0
    S_bar: float = 0.0
    c_v: float = 1.0
    gamma: float = 1.4
    epsilon: float = 0.1
    M: float = 1.0
    rho_scale: float = 1.0
    U_scale: float = 1.0
    S_scale: float = 1.0
    R_max: float = 120.0
    N: int = 4000
    T_max: float = 100.0
    dt_obs: float = 0.05
    gradient_multiplier: float = solver.GRADIENT_MULTIPLIER
    cfl: float = solver.CFL
    n_max: int = 2
    snapshot_every: float = 10.0
    window_h: float = diagnostics.DEFAULT_H
    out: str = "out"

    def __post_init__(self):
        for name in ("P0", "rho_bar", "c_v", "gamma", "M", "R_max", "T_max", "dt_obs",
                     "gradient_multiplier", "cfl", "snapshot_every", "window_h"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be nonnegative")
        if self.N < mesh.MIN_CELLS:
            raise ConfigError(f"N must be at least {mesh.MIN_CELLS}")
        if not 0 <= self.n_max <= diagnostics.MAX_ORDER:
            raise ConfigError(f"n_max must lie in 0..{diagnostics.MAX_ORDER}")
        if self.R_max < self.M + self.T_max + MARGIN:
            raise ConfigError(f"R_max = {self.R_max:g} must be at least M + T_max + {MARGIN:g}"
                              f" = {self.M + self.T_max + MARGIN:g}")
        try:
            self.model()
        except eos.InvalidModel as exc:
            raise ConfigError(str(exc)) from exc

    def model(self) -> eos.GasModel:
        return eos.GasModel(self.kind, P0=self.P0, rho_bar=self.rho_bar, S_bar=self.S_bar,
                            c_v=self.c_v, gamma=self.gamma)

    def profiles(self) -> solver.InitialProfiles:
        return solver.InitialProfiles(self.epsilon, self.M, self.rho_scale, self.U_scale,
                                      self.S_scale)

    def grid(self) -> mesh.RadialGrid:
        return mesh.build_grid(self.R_max, self.N)


SECTIONS = {
    "model": ("kind", "P0", "rho_bar", "S_bar", "c_v", "gamma"),
    "data": ("epsilon", "M", "rho_scale", "U_scale", "S_scale"),
    "grid": ("R_max", "N"),
    "run": ("T_max", "dt_obs", "gradient_multiplier", "cfl", "n_max", "snapshot_every",
            "window_h", "out"),
}
_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(name, raw):
    kind = _TYPES[name]
    try:
        if kind in ("int", int):
            return int(raw)
        if kind in ("float", float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r}") from None
    return raw.strip()


def parse_config(text: str, source: str = "<string>", **overrides) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str        # keep N and R_max case
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    values = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in SECTIONS[section]:
                raise ConfigError(f"{source}: unknown key {key!r} in [{section}]")
            values[key] = _convert(key, raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


def load_config(path: Optional[str], **overrides) -> RunConfig:
    if path is None:
        return parse_config("", **overrides)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=str(path), **overrides)


# ---------------------------------------------------------------- single run

def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _fmt(x) -> str:
    return repr(float(x))


def _write_snapshot(dirpath: Path, flow: solver.FlowState, pot: potential.PotentialState) -> None:
    tag = f"{flow.t:09.3f}"
    _write_csv(dirpath / f"flow_t{tag}.csv", ("r", "rho", "U", "S"),
               ([_fmt(a) for a in row] for row in zip(flow.grid.r, flow.rho, flow.U, flow.S)))
    rho_a = potential.bernoulli_density(pot)
    _write_csv(dirpath / f"potential_t{tag}.csv", ("r", "phi", "v", "rho_a"),
               ([_fmt(a) for a in row] for row in zip(pot.grid.r, pot.phi, pot.v, rho_a)))


class _Tracker:
    """Observer that keeps the potential in step and records energy reports."""

    def __init__(self, cfg: RunConfig, flow0, pot0, outdir: Optional[Path]):
        self.cfg, self.pot = cfg, pot0
        self.z0 = transform.to_twz(flow0).z
        self.z_acc = diagnostics.ZIntegral()
        self.reports: List[diagnostics.EnergyReport] = []
        self.outdir = outdir
        self.next_snapshot = 0.0

    def _advance_potential(self, t):
        p = self.pot
        while p.t < t - 1e-12:
            p = potential.step(p, min(potential.cfl_dt(p, self.cfg.cfl), t - p.t))
        self.pot = p

    def __call__(self, flow):
        self._advance_potential(flow.t)
        win = diagnostics.build_window(flow, self.pot, self.z0, self.cfg.window_h)
        self.reports.append(diagnostics.compute_report(win, self.cfg.M, self.z_acc,
                                                       self.cfg.n_max))
        if self.outdir is not None and flow.t >= self.next_snapshot - 1e-9:
            _write_snapshot(self.outdir / "snapshots", flow, self.pot)
            self.next_snapshot += self.cfg.snapshot_every


@dataclass
class RunOutcome:
    status: str
    T_star: Optional[float]
    t_end: float
    reason: str
    max_grad_initial: float
    max_grad_end: float
    max_grad_peak: float
    wall: float
    reports: list = field(default_factory=list, repr=False)


def simulate(cfg: RunConfig, outdir: Optional[Path] = None) -> RunOutcome:
    """Integrate flow and potential side by side with reports every dt_obs."""
    grid, model, prof = cfg.grid(), cfg.model(), cfg.profiles()
    flow0 = solver.init_state(prof, grid, model)
    pot0 = potential.init_potential(prof, grid, model)
    if outdir is not None:
        (outdir / "snapshots").mkdir(parents=True, exist_ok=True)
    tracker = _Tracker(cfg, flow0, pot0, outdir)
    threshold = solver.default_threshold(flow0, cfg.gradient_multiplier)
    t0 = time.perf_counter()
    res = solver.run(flow0, cfg.T_max, observers=[tracker], obs_stride=cfg.dt_obs,
                     gradient_threshold=threshold, cfl=cfg.cfl, M=cfg.M)
    wall = time.perf_counter() - t0
    if outdir is not None and res.final_state.t > tracker.next_snapshot - cfg.snapshot_every + 1e-9:
        tracker._advance_potential(res.final_state.t)
        _write_snapshot(outdir / "snapshots", res.final_state, tracker.pot)
    return RunOutcome(res.status, res.T_star, res.t_end, res.reason, res.max_grad_initial,
                      res.max_grad_end, res.max_grad_peak, wall, tracker.reports)


def _report_json(cfg: RunConfig, out: RunOutcome) -> dict:
    final = out.reports[-1].to_dict() if out.reports else None
    return {
        "version": __version__,
        "config": asdict(cfg),
        "status": out.status,
        "T_star": out.T_star,
        "t_end": out.t_end,
        "reason": out.reason,
        "max_grad_initial": out.max_grad_initial,
        "max_grad_end": out.max_grad_end,
        "max_grad_peak": out.max_grad_peak,
        "wall_seconds": out.wall,
        "final_report": final,
    }


def cmd_run(cfg: RunConfig, outdir: Optional[str] = None) -> dict:
    out_path = Path(outdir or cfg.out)
    out_path.mkdir(parents=True, exist_ok=True)
    outcome = simulate(cfg, out_path)
    rows = [[_fmt(getattr(r, c)) for c in diagnostics.SERIES_COLUMNS] for r in outcome.reports]
    _write_csv(out_path / "series.csv", diagnostics.SERIES_COLUMNS, rows)
    probes = [[_fmt(getattr(r, c)) for c in diagnostics.PROBE_COLUMNS] for r in outcome.reports]
    _write_csv(out_path / "probes.csv", diagnostics.PROBE_COLUMNS, probes)
    report = _report_json(cfg, outcome)
    (out_path / "report.json").write_text(json.dumps(report, indent=2, default=float))
    return report


# ---------------------------------------------------------------- sweep

@dataclass
class SweepRow:
    kind: str
    epsilon: float
    status: str
    T_star: Optional[float]
    max_grad_end: float
    wall: float
    error: str = ""


def _sweep_point(args):
    cfg, outdir = args
    try:
        rep = cmd_run(cfg, outdir)
        return SweepRow(cfg.kind, cfg.epsilon, rep["status"], rep["T_star"],
                        rep["max_grad_end"], rep["wall_seconds"])
    except Exception as exc:  # noqa: BLE001  (one point failing must not sink the sweep)
        return SweepRow(cfg.kind, cfg.epsilon, "failed", None, math.nan, 0.0,
                        f"{type(exc).__name__}: {exc}")


def fit_lifespan(rows: Sequence[SweepRow]) -> dict:
    """Slope of log T* against log(1/eps) over polytropic blow-up points."""
    pts = [(r.epsilon, r.T_star) for r in rows
           if r.kind == eos.POLYTROPIC and r.status == "blowup" and r.T_star]
    if len(pts) < 2:
        return {"points": len(pts), "slope": None, "intercept": None}
    x = np.log([1.0 / e for e, _ in pts])
    y = np.log([T for _, T in pts])
    slope, intercept = np.polyfit(x, y, 1)
    return {"points": len(pts), "slope": float(slope), "intercept": float(intercept)}


def cmd_sweep(cfg: RunConfig, epsilons: Sequence[float], both_kinds: bool = True,
              outdir: Optional[str] = None, workers: int = 1) -> dict:
    if len(epsilons) < 2:
        raise InsufficientPoints("a sweep needs at least two epsilons")
    base = Path(outdir or cfg.out)
    base.mkdir(parents=True, exist_ok=True)
    kinds = (eos.POLYTROPIC, eos.CHAPLYGIN) if both_kinds else (cfg.kind,)
    jobs = [(replace(cfg, kind=k, epsilon=float(e)), str(base / f"{k}_eps{e:g}"))
            for k in kinds for e in epsilons]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    _write_csv(base / "lifespan.csv", ("eos", "epsilon", "status", "T_star", "max_grad_end",
                                       "wall_seconds", "error"),
               ([r.kind, r.epsilon, r.status, "" if r.T_star is None else r.T_star,
                 r.max_grad_end, r.wall, r.error] for r in rows))
    comparison = {
        "lifespan_fit": fit_lifespan(rows),
        "chaplygin_completed": {f"{r.epsilon:g}": r.status == "completed"
                                for r in rows if r.kind == eos.CHAPLYGIN},
        "rows": [asdict(r) for r in rows],
    }
    (base / "comparison.json").write_text(json.dumps(comparison, indent=2))
    return comparison


# ---------------------------------------------------------------- convergence

def _evolve(cfg: RunConfig, N: int):
    grid = mesh.build_grid(cfg.R_max, N)
    flow = solver.init_state(cfg.profiles(), grid, cfg.model())
    while flow.t < cfg.T_max - 1e-12:
        flow = solver.step(flow, min(solver.cfl_dt(flow, cfg.cfl), cfg.T_max - flow.t), cfg.cfl)
    return flow


def _sample_at(fine_r, fine_f, coarse_r):
    """Fourth-order Lagrange interpolation of a fine-grid field at coarse centers."""
    dr = fine_r[1] - fine_r[0]
    idx = np.clip(np.floor((coarse_r - fine_r[0]) / dr).astype(int) - 1, 0, len(fine_r) - 4)
    x = (coarse_r - fine_r[idx]) / dr
    f0, f1, f2, f3 = (fine_f[idx + k] for k in range(4))
    return (-f0 * (x - 1) * (x - 2) * (x - 3) / 6 + f1 * x * (x - 2) * (x - 3) / 2
            - f2 * x * (x - 1) * (x - 3) / 2 + f3 * x * (x - 1) * (x - 2) / 6)


def cmd_converge(cfg: RunConfig, resolutions: Sequence[int], outdir: Optional[str] = None) -> list:
    """Errors against the finest run and observed orders, one row per resolution."""
    res = sorted(int(n) for n in resolutions)
    if len(res) < 3:
        raise ResolutionMismatch("a convergence study needs at least three resolutions")
    for a, b in zip(res, res[1:]):
        if b % a:
            raise ResolutionMismatch(f"{a} does not divide {b}")
    flows = [_evolve(cfg, n) for n in res]
    ref = flows[-1]
    rows, prev = [], None
    for n, fl in zip(res[:-1], flows[:-1]):
        errs = {}
        for name in ("rho", "U", "S"):
            exact = _sample_at(ref.grid.r, getattr(ref, name), fl.grid.r)
            errs[name] = mesh.l2_radial(getattr(fl, name) - exact, fl.grid)
        row = {"N": n, "dr": fl.grid.dr, **{f"err_{k}": v for k, v in errs.items()}}
        for k, v in errs.items():
            order = None
            if prev is not None and v > 0 and prev[f"err_{k}"] > 0:
                order = math.log(prev[f"err_{k}"] / v) / math.log(prev["dr"] / row["dr"])
            row[f"order_{k}"] = order
        rows.append(row)
        prev = row
    if outdir is not None:
        base = Path(outdir)
        base.mkdir(parents=True, exist_ok=True)
        header = list(rows[0].keys())
        _write_csv(base / "orders.csv", header,
                   ([("" if r[h] is None else r[h]) for h in header] for r in rows))
    return rows


# ---------------------------------------------------------------- CLI

def cmd_nullcheck(kind: str, gamma: float = 1.4) -> dict:
    if kind not in eos.KINDS:
        raise ConfigError(f"unknown gas kind {kind!r}")
    return nullcheck.check(kind, gamma)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chapgas", description="Radial Chaplygin and polytropic gas experiments")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="INI config file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--eos", choices=eos.KINDS)
        sp.add_argument("--epsilon", type=float)
        sp.add_argument("--tmax", type=float)
        sp.add_argument("--grid", type=int, help="number of cells N")
        sp.add_argument("--rmax", type=float)

    common(sub.add_parser("run", help="single run"))
    sw = sub.add_parser("sweep", help="epsilon sweep over both gases")
    common(sw)
    sw.add_argument("--epsilons", type=float, nargs="+", default=[0.2, 0.1, 0.05])
    sw.add_argument("--single-kind", action="store_true", help="only the configured gas")
    sw.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    nc = sub.add_parser("nullcheck", help="null-condition residuals")
    nc.add_argument("--eos", choices=eos.KINDS, default=eos.CHAPLYGIN)
    nc.add_argument("--gamma", type=float, default=1.4)
    nc.add_argument("--out")
    cv = sub.add_parser("converge", help="self-convergence study")
    common(cv)
    cv.add_argument("--resolutions", type=int, nargs="+", required=True)
    return p


def _config_from_args(args) -> RunConfig:
    return load_config(args.config, kind=args.eos, epsilon=args.epsilon, T_max=args.tmax,
                       N=args.grid, R_max=args.rmax, out=args.out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "nullcheck":
            report = cmd_nullcheck(args.eos, args.gamma)
            text = json.dumps(report, indent=2)
            if args.out:
                Path(args.out).mkdir(parents=True, exist_ok=True)
                (Path(args.out) / "nullcheck.json").write_text(text)
            print(text)
            return EXIT_OK
        cfg = _config_from_args(args)
        if args.command == "run":
            report = cmd_run(cfg)
            print(json.dumps({k: report[k] for k in ("status", "T_star", "t_end", "reason")}))
            return EXIT_ABORTED if report["status"] == "aborted" else EXIT_OK
        if args.command == "sweep":
            comp = cmd_sweep(cfg, args.epsilons, not args.single_kind, workers=args.workers)
            print(json.dumps({k: comp[k] for k in ("lifespan_fit", "chaplygin_completed")}))
            failed = any(r["status"] in ("failed", "aborted") for r in comp["rows"])
            return EXIT_ABORTED if failed else EXIT_OK
        if args.command == "converge":
            rows = cmd_converge(cfg, args.resolutions, cfg.out)
            for r in rows:
                print(json.dumps(r))
            return EXIT_OK
    except (ConfigError, InsufficientPoints, ResolutionMismatch, TooCoarse) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ChapgasError as exc:
        print(f"aborted: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ABORTED
    return EXIT_OK
