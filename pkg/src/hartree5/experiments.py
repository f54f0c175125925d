"""Scenario routines shared by the command-line checks and the test suite.

Each routine runs a complete numerical experiment and returns plain data
(numbers, arrays, row dicts). Pass/fail decisions are left to the caller.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import functionals as fn
from .diagnostics import bernstein_suite, dispersive_fit, frequency_scale
from .evolution import SolverConfig, Verdict, evolve, scattering_diagnostic
from .spectral_radial import RadialField, RadialGrid, Side, gaussian


@dataclass
class SolitonRun:
    """Measured departures of a soliton run from ``exp(it) Qbar``."""

    times: np.ndarray
    sup_deviation: np.ndarray  # ||u| - Qbar|_inf / |Qbar|_inf
    phase: np.ndarray  # unwrapped arg <Qbar, u>
    phase_rate: float
    mass_drift: float
    energy_drift: float
    n_of_t: np.ndarray
    result: object

    @property
    def max_sup_deviation(self):
        return float(self.sup_deviation.max())

    @property
    def n_spread(self):
        """max |N(t)/N(0) - 1|."""
        return float(np.max(np.abs(self.n_of_t / self.n_of_t[0] - 1.0)))

    def summary(self):
        return {
            "max_sup_deviation": self.max_sup_deviation,
            "phase_rate": self.phase_rate,
            "mass_drift": self.mass_drift,
            "energy_drift": self.energy_drift,
            "n_of_t_spread": self.n_spread,
            "t_final": float(self.times[-1]),
        }


def soliton_run(profile: RadialField, dt=1e-3, t_end=5.0, stride=50, sink=None) -> SolitonRun:
    """Evolve the soliton profile and compare with the exact ``exp(it) Qbar``."""
    cfg = SolverConfig(dt=dt, t_end=t_end, monitor_stride=stride, record_fields_every=stride, monitor_virial=False)
    q = profile.physical_values().real
    res = evolve(RadialField(profile.grid, q.astype(complex)), cfg, sink=sink)
    qmax = np.abs(q).max()
    w = profile.grid.r_weights
    times, dev, ph = [], [], []
    for t, u in res.snapshots:
        v = u.values
        times.append(t)
        dev.append(np.abs(np.abs(v) - q).max() / qmax)
        ph.append(np.angle(np.sum(q * v * w)))
    times = np.array(times)
    phase = np.unwrap(ph)
    mass = np.array([m.mass for m in res.monitors])
    energy = np.array([m.energy for m in res.monitors])
    return SolitonRun(
        times=times,
        sup_deviation=np.array(dev),
        phase=phase,
        phase_rate=float(np.polyfit(times, phase, 1)[0]),
        mass_drift=float(np.max(np.abs(mass / mass[0] - 1.0))),
        energy_drift=float(np.max(np.abs(energy / energy[0] - 1.0))),
        n_of_t=np.array([m.n_of_t for m in res.monitors]),
        result=res,
    )


@dataclass
class VirialCheck:
    times: np.ndarray  # interior monitor times
    fd: np.ndarray  # centred difference of m_a
    total: np.ndarray  # rate identity at the same times
    breakdown: list  # VirialBreakdown at every monitor time

    @property
    def pointwise_error(self):
        return np.abs(self.fd - self.total) / np.abs(self.total)

    @property
    def max_error(self):
        return float(self.pointwise_error.max())

    @property
    def max_error_term_ratio(self):
        """Largest ``|err_*| / |main|`` over all monitor times."""
        worst = 0.0
        for b in self.breakdown:
            errs = max(abs(b.err_mass), abs(b.err_grad), abs(b.err_conv))
            worst = max(worst, errs / abs(b.main))
        return worst

    def summary(self):
        return {
            "samples": int(self.times.size),
            "max_relative_error": self.max_error,
            "max_error_term_over_main": self.max_error_term_ratio,
        }


def virial_check(u0: RadialField, cfg: SolverConfig, method="newton", angular_order=64) -> VirialCheck:
    """Compare ``d/dt m_a`` (centred differences of monitors) with the rate identity.

    Monitors must be equally spaced, so ``cfg.adapt`` must be off. The
    breakdown is evaluated with ``method`` on every monitor.
    """
    if cfg.adapt:
        raise ValueError("virial_check needs a fixed time step")
    cfg = replace(cfg, monitor_virial=method == "newton")
    res = evolve(u0, cfg)
    mons = res.monitors
    if method == "newton":
        parts = [m.virial for m in mons]
    else:
        parts = [
            fn.virial_rate(u, cfg.virial_R, method=method, angular_order=angular_order)
            for _, u in _monitor_fields(u0, cfg)
        ]
    t = np.array([m.t for m in mons])
    ma = np.array([m.m_a for m in mons])
    h = t[2:] - t[:-2]
    fd = (ma[2:] - ma[:-2]) / h
    total = np.array([p.total for p in parts[1:-1]])
    return VirialCheck(times=t[1:-1], fd=fd, total=total, breakdown=parts)


def _monitor_fields(u0, cfg):
    """Re-run storing a field at each monitor (quadrature path only)."""
    res = evolve(u0, replace(cfg, record_fields_every=cfg.monitor_stride, monitor_virial=False))
    return res.snapshots


def localized_mass_rates(snapshots, radii):
    """``max_t |d/dt M_R|`` for each R, by centred differences of snapshots."""
    t = np.array([s[0] for s in snapshots])
    out = []
    for R in radii:
        m = np.array([fn.localized_mass(u, R) for _, u in snapshots])
        out.append(float(np.max(np.abs(np.gradient(m, t)))))
    return out


def step_halving(u0: RadialField, dts, t_end=1.0, reference_dt=None):
    """Errors at ``t_end`` against a fine reference and successive error ratios.

    Errors are relative L^2 distances (spectral side, Plancherel-exact).
    """
    dts = sorted(dts, reverse=True)
    reference_dt = reference_dt or dts[-1] / 8.0
    g = u0.grid

    def run(dt):
        cfg = SolverConfig(dt=dt, t_end=t_end, monitor_stride=10**9, monitor_virial=False)
        return evolve(u0, cfg).final.spectral_values()

    ref = run(reference_dt)
    scale = math.sqrt(np.sum(np.abs(ref) ** 2 * g.rho_weights))
    errs = [math.sqrt(np.sum(np.abs(run(dt) - ref) ** 2 * g.rho_weights)) / scale for dt in dts]
    ratios = [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]
    return {"dt": list(dts), "errors": errs, "ratios": ratios, "reference_dt": reference_dt}


def dispersive_check(grid: RadialGrid, width=0.5, amplitude=1.0, t_lo=1.0, t_hi=30.0, samples=16):
    return dispersive_fit(gaussian(grid, width=width, amplitude=amplitude), t_lo, t_hi, samples)


def broadband_field(grid: RadialGrid) -> RadialField:
    """Field with spectral profile ``(1 + rho^2)^-2``: energy in every dyadic band."""
    return RadialField(grid, (1.0 + grid.rho**2) ** -2, Side.SPECTRAL)


def bernstein_check(grid: RadialGrid, exps, kind="band", field="broadband"):
    f = broadband_field(grid) if field == "broadband" else gaussian(grid)
    return bernstein_suite(f, exps, kind=kind)


def _decreasing(values):
    v = np.asarray(values, dtype=float)
    return bool(v.size >= 2 and np.all(np.diff(v) <= 0))


def scan_point(u_shape: RadialField, c, cfg: SolverConfig, threshold, window=6):
    """Evolve ``c * u_shape`` and summarise the run as one scan row.

    Besides the table columns the row carries the sub-threshold probes:
    monotone decrease of ``s_density`` over the second half of the run, and
    monotone decrease of :func:`scattering_diagnostic` over successive
    windows of ``window`` stored fields in the second half.
    """
    g = u_shape.grid
    u0 = RadialField(g, c * u_shape.physical_values())
    res = evolve(u0, cfg)
    mons = res.monitors
    hhalf0 = mons[0].hhalf
    t_end = mons[-1].t
    late = [m.s_density for m in mons if m.t >= 0.5 * t_end]
    snaps = [s for s in res.snapshots if s[0] >= 0.5 * t_end]
    windows = []
    if len(snaps) >= window >= 3:
        for i in range(0, len(snaps) - window + 1, window):
            windows.append(scattering_diagnostic(snaps[i : i + window]))
    return {
        "c": float(c),
        "hhalf0_over_threshold": hhalf0 / threshold,
        "verdict": res.verdict.value,
        "s_cumulative": mons[-1].s_cumulative,
        "max_hhalf": max(m.hhalf for m in mons),
        "max_n_of_t": max(m.n_of_t for m in mons),
        "t_final": t_end,
        "hhalf_bounded": bool(max(m.hhalf for m in mons) < cfg.blowup_factor * max(hhalf0, 1e-300)),
        "late_s_density_decreasing": _decreasing(late) if hhalf0 > 0 else True,
        "scattering_windows": windows,
        "scattering_windows_decreasing": _decreasing(windows) if hhalf0 > 0 else True,
        "n_of_t_monotone": _decreasing([-m.n_of_t for m in mons]),
        "trigger": res.trigger,
    }, res


def _scan_worker(args):
    n, r_max, values, c, cfg, threshold, window = args
    row, res = scan_point(RadialField(RadialGrid(n, r_max), values), c, cfg, threshold, window)
    return row, [m.row() for m in res.monitors]


def threshold_scan(u_shape: RadialField, scales, cfg: SolverConfig, threshold, threads=1, window=6):
    """Rows of :func:`scan_point` for every scale, sorted by ``c``.

    Returns ``(rows, monitor_rows)`` where ``monitor_rows[i]`` holds the CSV
    rows of run ``i``. Runs are independent and execute in a process pool
    when ``threads > 1``.
    """
    scales = sorted(float(c) for c in scales)
    g = u_shape.grid
    vals = np.asarray(u_shape.physical_values())
    jobs = [(g.n, g.r_max, vals, c, cfg, threshold, window) for c in scales]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(_scan_worker, jobs))
    else:
        out = [_scan_worker(j) for j in jobs]
    return [o[0] for o in out], [o[1] for o in out]


def scan_anomalies(rows):
    """Indices where a Completed verdict sits between two blowup verdicts."""
    blow = [r["verdict"] == Verdict.SUSPECTED_BLOWUP.value for r in rows]
    out = []
    for i in range(1, len(rows) - 1):
        if not blow[i] and any(blow[:i]) and any(blow[i + 1 :]):
            out.append(i)
    return out


def frequency_scale_series(snapshots):
    return np.array([frequency_scale(u) for _, u in snapshots])
