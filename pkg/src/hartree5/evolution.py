"""Strang-split time integration of the focusing Hartree flow.

``i u_t + Delta u = -(|x|^-3 * |u|^2) u`` is advanced as

    half free step -> exact phase exp(+i dt V), V = |x|^-3 * |u|^2 -> half free step.

The potential is constant along the nonlinear substep (it only depends on
``|u|``), so that substep is exact. Both substeps are unitary, so mass is
conserved up to transform round-off.

The state is carried on the spectral side between steps. The physical
samples produced inside a step sit at the half time ``t + dt/2`` in modulus,
and are used for a midpoint-rule integral of the Strichartz density.
"""

import csv
import enum
import math
from dataclasses import dataclass, field, fields

import numpy as np

from . import functionals as fn
from .diagnostics import frequency_scale
from .errors import ConfigError, InsufficientSamples, NonFinite
from .spectral_radial import (
    TAIL_TOLERANCE,
    RadialField,
    Side,
    hartree_potential_values,
)

MONITOR_HEADER = (
    "t,mass,energy,hhalf,h1,m_a,virial_main,virial_err_mass,virial_err_grad,"
    "virial_err_conv,m_r,s_density,s_cumulative,n_of_t,dt_used"
)


class Verdict(str, enum.Enum):
    """Numerical proxies for the solution's fate; not proofs."""

    COMPLETED = "Completed"
    SUSPECTED_BLOWUP = "SuspectedBlowup"
    ACCURACY_LOST = "AccuracyLost"


@dataclass(frozen=True)
class SolverConfig:
    """Time stepping and monitoring parameters.

    ``record_fields_every`` stores a physical snapshot every that many steps
    (``None`` stores none). ``mass_tolerance`` is the relative mass drift
    that ends a run as :attr:`Verdict.ACCURACY_LOST`.
    """

    dt: float = 1e-3
    t_end: float = 1.0
    adapt: bool = False
    dt_min: float = 1e-6
    dt_max: float = 1e-2
    monitor_stride: int = 10
    virial_R: float = 10.0
    mass_R: float = 5.0
    record_fields_every: int = None
    c_cfl: float = 0.1
    mass_tolerance: float = 1e-6
    blowup_factor: float = 1e3
    nyquist_fraction: float = 0.5
    monitor_virial: bool = True

    def __post_init__(self):
        def bad(key, why):
            raise ConfigError(f"{key} = {getattr(self, key)!r}: {why}", key=key)

        for key in ("dt", "dt_min", "dt_max", "t_end", "virial_R", "mass_R", "c_cfl"):
            v = getattr(self, key)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                bad(key, "must be a positive finite number")
        if self.adapt and not self.dt_min <= self.dt_max:
            bad("dt_min", "must not exceed dt_max")
        if self.adapt and not self.dt_min <= self.dt <= self.dt_max:
            bad("dt", "must lie in [dt_min, dt_max]")
        if int(self.monitor_stride) != self.monitor_stride or self.monitor_stride < 1:
            bad("monitor_stride", "must be an integer >= 1")
        r = self.record_fields_every
        if r is not None and (int(r) != r or r < 1):
            bad("record_fields_every", "must be an integer >= 1 or empty")

    @classmethod
    def keys(cls):
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class MonitorRecord:
    t: float
    mass: float
    energy: float
    hhalf: float
    h1: float
    m_a: float
    virial: fn.VirialBreakdown
    m_r: float
    s_density: float
    s_cumulative: float
    n_of_t: float
    dt_used: float

    def row(self):
        v = self.virial
        return [
            self.t, self.mass, self.energy, self.hhalf, self.h1, self.m_a,
            v.main, v.err_mass, v.err_grad, v.err_conv,
            self.m_r, self.s_density, self.s_cumulative, self.n_of_t, self.dt_used,
        ]  # fmt: skip


@dataclass
class EvolutionResult:
    final: RadialField
    monitors: list
    verdict: Verdict
    trigger: str = None
    steps: int = 0
    snapshots: list = field(default_factory=list)
    boundary_contact: bool = False

    def summary(self):
        last = self.monitors[-1]
        return {
            "verdict": self.verdict.value,
            "verdict_is_numerical_proxy": True,
            "trigger": self.trigger,
            "steps": self.steps,
            "t_final": last.t,
            "boundary_contact": self.boundary_contact,
            "max_hhalf": max(m.hhalf for m in self.monitors),
            "max_n_of_t": max(m.n_of_t for m in self.monitors),
            "s_cumulative": last.s_cumulative,
        }


def _potential(grid, dens):
    return hartree_potential_values(grid, dens).real


def strang_step(u: RadialField, dt: float) -> RadialField:
    """One second-order splitting step of length ``dt``; returns a physical field."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    g = u.grid
    half = np.exp(-0.5j * dt * g.rho**2)
    uh, _, _ = _advance(g, half * u.spectral_values(), dt, half)
    return RadialField(g, g.inverse(uh), Side.PHYSICAL)


def _advance(g, uh_half, dt, half):
    """Nonlinear phase then the closing half free step.

    ``uh_half`` has already had the opening half step applied. Returns the
    new spectral state, the mid-step physical samples and ``max |V|``.
    """
    u = g.inverse(uh_half)
    v = _potential(g, np.abs(u) ** 2)
    if not np.all(np.isfinite(v)):
        raise NonFinite("Hartree potential became non-finite")
    u = np.exp(1j * dt * v) * u
    return half * g.forward(u), u, float(np.abs(v).max(initial=0.0))


def adaptive_dt(u: RadialField, cfg: SolverConfig) -> float:
    """``clamp(c_cfl / max|V|, dt_min, dt_max)`` with ``V = |x|^-3 * |u|^2``."""
    v = _potential(u.grid, np.abs(u.physical_values()) ** 2)
    return _clamped_dt(float(np.abs(v).max(initial=0.0)), cfg)[0]


def _proposed_dt(vmax, cfg):
    return math.inf if vmax == 0.0 else cfg.c_cfl / vmax


def _clamped_dt(vmax, cfg):
    prop = _proposed_dt(vmax, cfg)
    return min(max(prop, cfg.dt_min), cfg.dt_max), prop < cfg.dt_min


def monitor_record(f: RadialField, t, cfg, s_density, s_cumulative, dt_used):
    """Compute one :class:`MonitorRecord` for field ``f`` at time ``t``."""
    parts = fn.weinstein_parts(f)
    mass = float(np.sum(np.abs(f.spectral_values()) ** 2 * f.grid.rho_weights))
    if cfg.monitor_virial:
        virial = fn.virial_rate(f, cfg.virial_R)
    else:
        virial = fn.VirialBreakdown(math.nan, math.nan, math.nan, math.nan)
    zero = parts.hhalf_sq == 0.0
    return MonitorRecord(
        t=float(t),
        mass=mass,
        energy=0.5 * parts.h1_sq - 0.25 * parts.potential,
        hhalf=math.sqrt(parts.hhalf_sq),
        h1=math.sqrt(parts.h1_sq),
        m_a=fn.virial_m_a(f, cfg.virial_R),
        virial=virial,
        m_r=fn.localized_mass(f, cfg.mass_R),
        s_density=float(s_density),
        s_cumulative=float(s_cumulative),
        n_of_t=0.0 if zero else frequency_scale(f),
        dt_used=float(dt_used),
    )


def evolve(u0: RadialField, cfg: SolverConfig, sink=None) -> EvolutionResult:
    """Advance ``u0`` to ``cfg.t_end`` or an early stop.

    Parameters
    ----------
    u0 : RadialField
    cfg : SolverConfig
    sink : callable, optional
        Called with each :class:`MonitorRecord` as it is produced.

    Notes
    -----
    Early stops set the verdict: ``SuspectedBlowup`` when ``hhalf`` grows
    past ``blowup_factor`` times its initial value, when the frequency scale
    passes ``nyquist_fraction * rho_max``, when the adaptive step would fall
    below ``dt_min``, or when the field becomes non-finite; ``AccuracyLost``
    when the relative mass drift exceeds ``mass_tolerance``. A field reaching
    the edge of the box only sets ``boundary_contact``.
    """
    if not np.all(np.isfinite(u0.values)):
        raise NonFinite("initial data contains NaN or Inf")
    g = u0.grid
    rho2 = g.rho**2
    uh = np.array(u0.spectral_values(), dtype=complex)
    u_phys = g.inverse(uh)

    t = 0.0
    s_cum = 0.0
    s_now = fn.strichartz_density(RadialField(g, u_phys))
    first = monitor_record(RadialField(g, uh, Side.SPECTRAL), t, cfg, s_now, 0.0, 0.0)
    monitors = [first]
    if sink:
        sink(first)
    res = EvolutionResult(final=None, monitors=monitors, verdict=Verdict.COMPLETED)
    if cfg.record_fields_every:
        res.snapshots.append((t, RadialField(g, u_phys)))
    mass0 = first.mass
    hhalf0 = first.hhalf
    vmax = float(np.abs(_potential(g, np.abs(u_phys) ** 2)).max(initial=0.0))

    step = 0
    dt = cfg.dt
    while t < cfg.t_end * (1 - 1e-14):
        if cfg.adapt:
            dt, clamped = _clamped_dt(vmax, cfg)
            if clamped:
                res.verdict = Verdict.SUSPECTED_BLOWUP
                res.trigger = f"adaptive step below dt_min at t={t:.6g}"
                break
        dt_step = min(dt, cfg.t_end - t)
        half = np.exp(-0.5j * dt_step * rho2)
        try:
            uh, u_mid, vmax = _advance(g, half * uh, dt_step, half)
        except NonFinite:
            res.verdict = Verdict.SUSPECTED_BLOWUP
            res.trigger = f"non-finite field at t={t:.6g}"
            break
        s_mid = float(np.sum(np.abs(u_mid) ** fn.STRICHARTZ_EXPONENT * g.r_weights))
        s_cum += dt_step * s_mid ** (3.0 / fn.STRICHARTZ_EXPONENT)
        t += dt_step
        step += 1

        want_snap = cfg.record_fields_every and step % cfg.record_fields_every == 0
        want_mon = step % cfg.monitor_stride == 0 or t >= cfg.t_end * (1 - 1e-14)
        if want_snap or want_mon:
            u_phys = g.inverse(uh)
            if not np.all(np.isfinite(u_phys)):
                res.verdict = Verdict.SUSPECTED_BLOWUP
                res.trigger = f"non-finite field at t={t:.6g}"
                break
            if g.tail_ratio(u_phys) > TAIL_TOLERANCE * 1e2:
                res.boundary_contact = True
        if want_snap:
            res.snapshots.append((t, RadialField(g, u_phys)))
        if want_mon:
            s_now = fn.strichartz_density(RadialField(g, u_phys))
            rec = monitor_record(RadialField(g, uh, Side.SPECTRAL), t, cfg, s_now, s_cum, dt_step)
            monitors.append(rec)
            if sink:
                sink(rec)
            if hhalf0 > 0 and rec.hhalf > cfg.blowup_factor * hhalf0:
                res.verdict = Verdict.SUSPECTED_BLOWUP
                res.trigger = f"hhalf exceeded {cfg.blowup_factor:g}x its initial value at t={t:.6g}"
                break
            if rec.n_of_t > cfg.nyquist_fraction * g.rho_max:
                res.verdict = Verdict.SUSPECTED_BLOWUP
                res.trigger = f"frequency scale passed {cfg.nyquist_fraction:g} rho_max at t={t:.6g}"
                break
            if mass0 > 0 and abs(rec.mass - mass0) > cfg.mass_tolerance * mass0:
                res.verdict = Verdict.ACCURACY_LOST
                res.trigger = f"relative mass drift {abs(rec.mass - mass0) / mass0:.2e} at t={t:.6g}"
                break

    res.steps = step
    res.final = RadialField(g, g.inverse(uh))
    return res


def scattering_diagnostic(trajectory) -> float:
    """``max_{i<j} || e^{-i t_i Delta} u(t_i) - e^{-i t_j Delta} u(t_j) ||_{H^1/2}``.

    ``trajectory`` is a sequence of ``(t, RadialField)`` pairs, at least 3.
    """
    traj = list(trajectory)
    if len(traj) < 3:
        raise InsufficientSamples(f"need at least 3 stored fields, got {len(traj)}")
    g = traj[0][1].grid
    pulled = np.array([np.exp(1j * t * g.rho**2) * f.spectral_values() for t, f in traj])
    w = g.rho * g.rho_weights
    best = 0.0
    for i in range(len(pulled) - 1):
        d = pulled[i + 1 :] - pulled[i]
        best = max(best, float(np.sqrt(np.max(np.sum(np.abs(d) ** 2 * w, axis=1)))))
    return best


def write_monitors_csv(monitors, path):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(MONITOR_HEADER.split(","))
        for m in monitors:
            out.writerow([repr(float(x)) for x in m.row()])


__all__ = [
    "MONITOR_HEADER",
    "EvolutionResult",
    "MonitorRecord",
    "SolverConfig",
    "Verdict",
    "adaptive_dt",
    "evolve",
    "monitor_record",
    "scattering_diagnostic",
    "strang_step",
    "write_monitors_csv",
]
