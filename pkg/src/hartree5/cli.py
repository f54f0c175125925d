"""Batch front-end: ``hartree5 <command> [--config PATH] [--out DIR] ...``.

Every command writes its artifacts (JSON summaries, CSV tables, field files,
PNG figures) into the output directory and finishes by writing
``manifest.json`` with a SHA-256 checksum for every file. Exit codes: 0
success, 2 configuration error, 3 numerical failure, 4 a check ran but did
not pass.
"""

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict, replace

import numpy as np

from . import experiments as ex
from . import functionals as fn
from . import plotting
from .config import COMMANDS, ScenarioConfig, load_config
from .corpus import random_bumps
from .errors import ConfigError, HartreeError
from .evolution import MONITOR_HEADER, evolve, write_monitors_csv
from .ground_state import (
    SCATTERING_FACTOR,
    solve_ground_state,
    solve_soliton_profile,
    transfer,
)
from .spectral_radial import (
    RIESZ_CONSTANT,
    SIGMA4,
    RadialField,
    RadialGrid,
    gaussian,
    load_field,
    save_field,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_CHECK = 0, 2, 3, 4

CONSTANTS = {
    "sigma4": SIGMA4,
    "riesz_constant": RIESZ_CONSTANT,
    "scattering_factor": SCATTERING_FACTOR,
}

# acceptance levels for the *-check commands
VIRIAL_RTOL = 1e-3
VIRIAL_MIN_SAMPLES = 20
DISPERSIVE_TARGET = -2.5
DISPERSIVE_TOL = 0.05
DISPERSIVE_R2 = 0.999
BERNSTEIN_BAND = 10.0
BERNSTEIN_MIN_SCALES = 10
GRID_DOUBLING_RTOL = 1e-4
SHARPNESS_SLACK = 1e-4


def _clean(obj):
    """JSON-safe copy: tuples to lists, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class Artifacts:
    """Writes files under one directory and remembers them for the manifest."""

    def __init__(self, root):
        self.root = root
        os.makedirs(root, exist_ok=True)
        if not os.access(root, os.W_OK):
            raise ConfigError(f"output directory not writable: {root}", key="out")

    def discard(self, name):
        """Remove a leftover artifact from an earlier run, if present."""
        p = os.path.join(self.root, name)
        if os.path.isfile(p):
            os.remove(p)

    def path(self, name):
        p = os.path.join(self.root, name)
        os.makedirs(os.path.dirname(p), exist_ok=True)
        return p

    def json(self, name, data, cfg=None):
        data = dict(data)
        data["constants"] = CONSTANTS
        if cfg is not None:
            data["seed"] = cfg.seed
        with open(self.path(name), "w") as fh:
            json.dump(_clean(data), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def csv(self, name, header, rows):
        with open(self.path(name), "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(header)
            for row in rows:
                out.writerow([_cell(x) for x in row])

    def manifest(self):
        files = []
        for base, _, names in os.walk(self.root):
            for name in names:
                p = os.path.join(base, name)
                rel = os.path.relpath(p, self.root).replace(os.sep, "/")
                if rel == "manifest.json":
                    continue
                with open(p, "rb") as fh:
                    digest = hashlib.sha256(fh.read()).hexdigest()
                files.append({"path": rel, "sha256": digest, "bytes": os.path.getsize(p)})
        files.sort(key=lambda f: f["path"])
        with open(os.path.join(self.root, "manifest.json"), "w") as fh:
            json.dump({"files": files}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return files


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def _grid_dict(g):
    return {"n": g.n, "r_max": g.r_max}


def _config_dict(cfg: ScenarioConfig):
    return {
        "grid": _grid_dict(cfg.grid),
        "solver": asdict(cfg.solver),
        "initial": asdict(cfg.initial),
    }


def initial_data(cfg: ScenarioConfig, grid=None) -> RadialField:
    """Build the configured initial field on ``grid`` (the evolution grid by default)."""
    g = grid or cfg.grid
    spec = cfg.initial
    if spec.kind == "gaussian":
        return gaussian(g, width=spec.width, amplitude=spec.amplitude, chirp=spec.chirp)
    if spec.kind == "ground_state":
        q = solve_ground_state(cfg.gs_grid, cfg.gs_options).profile
        u = transfer(q, g)
        return RadialField(g, spec.scale * u.values.astype(complex))
    if spec.kind == "soliton":
        q = solve_soliton_profile(g, cfg.gs_options).profile
        return RadialField(g, spec.scale * q.physical_values().real.astype(complex))
    f = load_field(spec.path)
    if f.grid != g:
        f = transfer(f, g)
    return RadialField(g, spec.scale * f.physical_values())


def _sharpness(cfg, c5):
    fields = random_bumps(cfg.grid, cfg.corpus_size, cfg.seed)
    ratios = np.array([fn.hls_ratio(f) for f in fields])
    return {
        "corpus_size": cfg.corpus_size,
        "max_ratio_over_constant": float(ratios.max() / c5),
        "pass": bool(ratios.max() <= c5 * (1 + SHARPNESS_SLACK)),
    }


def cmd_ground_state(cfg, art):
    res = solve_ground_state(cfg.gs_grid, cfg.gs_options)
    summary = res.summary()
    ok = all(v["pass"] for v in summary["invariants"].values())
    if cfg.doubling_check:
        g = cfg.gs_grid
        changes = {}
        for name, grid in (
            ("refined", RadialGrid(2 * (g.n + 1) - 1, g.r_max)),
            ("extended", RadialGrid(2 * (g.n + 1) - 1, 2 * g.r_max)),
        ):
            other = solve_ground_state(grid, cfg.gs_options)
            changes[name] = abs(other.hhalf_norm / res.hhalf_norm - 1.0)
        summary["grid_doubling"] = {
            "relative_change": changes,
            "pass": max(changes.values()) < GRID_DOUBLING_RTOL,
        }
        ok = ok and summary["grid_doubling"]["pass"]
    if cfg.corpus_size > 0:
        summary["sharpness"] = _sharpness(cfg, res.sharp_constant)
        ok = ok and summary["sharpness"]["pass"]
    summary["pass"] = ok
    art.json("gs_summary.json", summary, cfg)
    save_field(res.profile.physical(), art.path("ground_state.field"))
    prof = res.profile.physical()
    plotting.plot_profile(prof.grid.r, prof.values.real, art.path("ground_state.png"), label="Q")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_soliton(cfg, art):
    res = solve_soliton_profile(cfg.soliton_grid, cfg.gs_options)
    summary = {"profile": res.summary()}
    run = ex.soliton_run(res.profile, dt=cfg.solver.dt, t_end=cfg.solver.t_end, stride=cfg.solver.monitor_stride)
    summary["run"] = run.summary()
    summary["run"]["verdict"] = run.result.verdict.value
    art.json("soliton_summary.json", summary, cfg)
    save_field(res.profile.physical(), art.path("soliton.field"))
    write_monitors_csv(run.result.monitors, art.path("monitors.csv"))
    art.csv(
        "soliton_deviation.csv",
        ["t", "sup_deviation", "phase"],
        zip(run.times, run.sup_deviation, run.phase),
    )
    prof = res.profile.physical()
    plotting.plot_profile(prof.grid.r, prof.values.real, art.path("soliton.png"), label=r"\bar Q")
    plotting.plot_monitors(run.result.monitors, art.path("monitors.png"))
    return EXIT_OK


def cmd_evolve(cfg, art):
    u0 = initial_data(cfg)
    res = evolve(u0, cfg.solver)
    summary = res.summary()
    summary["config"] = _config_dict(cfg)
    art.json("summary.json", summary, cfg)
    write_monitors_csv(res.monitors, art.path("monitors.csv"))
    save_field(res.final, art.path("final.field"))
    for i, (_, f) in enumerate(res.snapshots):
        save_field(f, art.path(f"snapshots/snapshot_{i:05d}.field"))
    plotting.plot_monitors(res.monitors, art.path("monitors.png"))
    return EXIT_OK


def cmd_threshold_scan(cfg, art):
    gs = solve_ground_state(cfg.gs_grid, cfg.gs_options)
    shape = initial_data(replace(cfg, initial=replace(cfg.initial, scale=1.0, amplitude=1.0)))
    solver = cfg.solver
    if solver.record_fields_every is None:
        solver = replace(solver, record_fields_every=solver.monitor_stride)
    rows, mon_rows = ex.threshold_scan(
        shape, cfg.scan.scales, solver, gs.threshold_scattering, threads=cfg.threads, window=cfg.scan.window
    )
    cols = ["c", "hhalf0_over_threshold", "verdict", "s_cumulative", "max_hhalf", "max_n_of_t"]
    art.csv("scan.csv", cols, ([r[k] for k in cols] for r in rows))
    for i, mr in enumerate(mon_rows):
        art.csv(f"runs/run_{i:03d}/monitors.csv", MONITOR_HEADER.split(","), mr)
    summary = {
        "threshold_scattering": gs.threshold_scattering,
        "threshold_global": gs.threshold_global,
        "verdicts_are_numerical_proxies": True,
        "rows": rows,
        "anomalies": ex.scan_anomalies(rows),
        "config": _config_dict(cfg),
    }
    art.json("scan.json", summary, cfg)
    plotting.plot_scan(rows, art.path("scan.png"))
    return EXIT_OK


def cmd_virial_check(cfg, art):
    u0 = initial_data(cfg)
    chk = ex.virial_check(u0, cfg.solver, cfg.virial.method, cfg.virial.angular_order)
    summary = chk.summary()
    summary["pass"] = bool(chk.times.size >= VIRIAL_MIN_SAMPLES and chk.max_error < VIRIAL_RTOL)
    summary["tolerance"] = VIRIAL_RTOL
    summary["config"] = _config_dict(cfg)
    art.json("virial_summary.json", summary, cfg)
    b = chk.breakdown[1:-1]
    art.csv(
        "virial.csv",
        ["t", "fd", "total", "main", "err_mass", "err_grad", "err_conv"],
        ([t, d, tot, x.main, x.err_mass, x.err_grad, x.err_conv] for t, d, tot, x in zip(chk.times, chk.fd, chk.total, b)),
    )
    plotting.plot_virial(chk.times, chk.fd, chk.total, art.path("virial.png"))
    return EXIT_OK if summary["pass"] else EXIT_CHECK


def cmd_dispersive_check(cfg, art):
    d = cfg.dispersive
    fit = ex.dispersive_check(RadialGrid(d.n, d.r_max), d.width, d.amplitude, d.t_lo, d.t_hi, d.samples)
    ok = abs(fit.exponent - DISPERSIVE_TARGET) <= DISPERSIVE_TOL and fit.r2 > DISPERSIVE_R2
    summary = {**fit.as_dict(), "pass": bool(ok), "options": asdict(d)}
    art.json("dispersive_summary.json", summary, cfg)
    art.csv("dispersive.csv", ["t", "sup_norm"], zip(fit.times, fit.sup_norms))
    plotting.plot_dispersive(fit.times, np.array(fit.sup_norms), fit.exponent, art.path("dispersive.png"))
    return EXIT_OK if ok else EXIT_CHECK


def bernstein_verdict(rows):
    """s-ratios inside ``[1/2, 11/10]^s`` and (p,q)-ratios within one factor-10 band."""
    out = {}
    ok = True
    for key in sorted({(r["p"], r["q"], r["s"], r["kind"]) for r in rows}, key=str):
        p, q, s, kind = key
        sel = [r for r in rows if (r["p"], r["q"], r["s"], r["kind"]) == key]
        pq = [r["pq_ratio"] for r in sel]
        spread = max(pq) / min(pq) if min(pq) > 0 else math.inf
        entry = {"scales": len(sel), "pq_spread": spread, "pq_finite": all(map(math.isfinite, pq))}
        if s:
            sr = [r["s_ratio"] for r in sel]
            lo, hi = 0.5**s, 1.1**s
            entry["s_ratio_range"] = [min(sr), max(sr)]
            entry["s_ratio_inside"] = all(lo * (1 - 1e-12) <= x <= hi * (1 + 1e-12) for x in sr)
            ok = ok and entry["s_ratio_inside"]
        if (p, q) == (2.0, 4.0):
            entry["uniform"] = spread < BERNSTEIN_BAND and len(sel) >= BERNSTEIN_MIN_SCALES
            ok = ok and entry["uniform"]
        ok = ok and entry["pq_finite"]
        out[f"p={p:g},q={q:g},s={s:g},{kind}"] = entry
    return out, ok


def cmd_bernstein_check(cfg, art):
    b = cfg.bernstein
    rows = ex.bernstein_check(RadialGrid(b.n, b.r_max), b.exps, kind=b.kind, field=b.field)
    verdict, ok = bernstein_verdict(rows)
    art.json("bernstein_summary.json", {"checks": verdict, "pass": ok, "options": asdict(b)}, cfg)
    cols = ["N", "p", "q", "s", "kind", "pq_ratio", "s_ratio"]
    art.csv("bernstein.csv", cols, ([r[k] for k in cols] for r in rows))
    plotting.plot_bernstein(rows, art.path("bernstein.png"))
    return EXIT_OK if ok else EXIT_CHECK


HELP = {
    "ground-state": "solve for Q, check its identities, emit thresholds",
    "soliton": "solve for the soliton profile and evolve it",
    "evolve": "evolve the configured initial data",
    "threshold-scan": "evolve scaled copies of the initial data",
    "virial-check": "compare d/dt M_a with the virial rate identity",
    "dispersive-check": "fit the free-flow sup-norm decay exponent",
    "bernstein-check": "tabulate Bernstein ratios over dyadic scales",
}

HANDLERS = {
    "ground-state": cmd_ground_state,
    "soliton": cmd_soliton,
    "evolve": cmd_evolve,
    "threshold-scan": cmd_threshold_scan,
    "virial-check": cmd_virial_check,
    "dispersive-check": cmd_dispersive_check,
    "bernstein-check": cmd_bernstein_check,
}


def run(config_path=None, command=None, out=None, threads=None, seed=None) -> int:
    """Run one command; returns the exit status. Artifacts go to ``out``."""
    art = None
    try:
        cfg = load_config(config_path) if config_path else ScenarioConfig()
        command = command or cfg.command
        if command not in COMMANDS:
            raise ConfigError(f"no command given; choose one of {', '.join(COMMANDS)}", key="command")
        over = {"command": command}
        if out is not None:
            over["out"] = out
        if threads is not None:
            if threads < 1:
                raise ConfigError("threads must be >= 1", key="threads")
            over["threads"] = threads
        if seed is not None:
            over["seed"] = seed
        cfg = replace(cfg, **over)
        art = Artifacts(cfg.out)
        art.discard("error.json")
        status = HANDLERS[command](cfg, art)
    except HartreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        status = exc.exit_code
        if art is None and out is not None:
            try:
                art = Artifacts(out)
            except (OSError, HartreeError):
                art = None
        if art is not None:
            art.json("error.json", exc.to_dict())
    if art is not None:
        art.manifest()
    return status


def _global_flags(parser, default=None):
    parser.add_argument("--config", metavar="PATH", default=default, help="scenario file (INI sections, key = value)")
    parser.add_argument("--out", metavar="DIR", default=default, help="output directory (default: [run] out, else ./out)")
    parser.add_argument("--threads", type=int, metavar="K", default=default, help="worker processes for scans")
    parser.add_argument("--seed", type=int, metavar="N", default=default, help="seed for randomized corpora")


def build_parser():
    parser = argparse.ArgumentParser(prog="hartree5", description=__doc__.splitlines()[0])
    _global_flags(parser)
    # flags may also follow the subcommand; SUPPRESS keeps earlier values
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name in COMMANDS:
        sp = sub.add_parser(name, help=HELP[name])
        _global_flags(sp, argparse.SUPPRESS)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run(args.config, args.command, args.out, args.threads, args.seed)


if __name__ == "__main__":
    sys.exit(main())
