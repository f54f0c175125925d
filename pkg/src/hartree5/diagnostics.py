"""Compactness-side observables of radial fields.

The frequency scale ``N`` is taken to be the median of the H^1/2 spectral
density. Any other choice within a bounded factor would serve equally well;
the median is scaling covariant and insensitive to tails.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateDenominator, RangeError
from .functionals import lp_norm
from .spectral_radial import (
    LPKind,
    RadialField,
    apply_symbol,
    free_propagate,
    lp_project,
)

DIMENSION = 5


def _hhalf_spectral_density(f):
    g = f.grid
    return g.rho * np.abs(f.spectral_values()) ** 2 * g.rho_weights


def _crossing(x, cum, level):
    """Interpolated x at which the nondecreasing ``cum`` reaches ``level``."""
    return float(np.interp(level, cum, x))


def frequency_scale(f: RadialField) -> float:
    """Median ``rho*`` of the H^1/2 spectral density ``rho |f^|^2 rho^4``."""
    dens = _hhalf_spectral_density(f)
    total = dens.sum()
    if not total > 0:
        raise DegenerateDenominator("zero field has no frequency scale")
    # cumulative mass is attributed to the upper end of each cell
    edges = f.grid.rho - 0.5 * f.grid.drho
    cum = np.concatenate([[0.0], np.cumsum(dens)])
    x = np.concatenate([edges, [f.grid.rho[-1] + 0.5 * f.grid.drho]])
    return _crossing(x, cum, 0.5 * total)


@dataclass(frozen=True)
class CompactnessReport:
    eta: float
    c_outer: float
    c_freq: float
    c_inner: float
    n_scale: float

    def as_dict(self):
        return asdict(self)


def _outer_radius(nodes, step, dens, level):
    # smallest x with sum_{nodes >= x} dens <= level, as a continuous crossing
    tail = np.concatenate([np.cumsum(dens[::-1])[::-1], [0.0]])  # sum over i >= j
    x = np.concatenate([nodes - 0.5 * step, [nodes[-1] + 0.5 * step]])
    return _crossing(x, -tail, -level)


def _inner_radius(nodes, step, dens, level):
    # largest x with sum_{nodes <= x} dens <= level
    cum = np.concatenate([[0.0], np.cumsum(dens)])
    x = np.concatenate([nodes - 0.5 * step, [nodes[-1] + 0.5 * step]])
    return _crossing(x, cum, level)


def compactness_report(f: RadialField, eta: float) -> CompactnessReport:
    """Radii ``C(eta)``, frequency radius and inner radius ``c(eta)`` scaled by ``N``.

    ``c_outer``: smallest ``C`` with the H^1/2 mass of ``r >= C/N`` at most
    ``eta`` of the total (physical profile of ``|grad|^{1/2} f``).
    ``c_freq``: smallest ``C`` with the spectral H^1/2 mass of ``rho >= C N``
    at most ``eta``. ``c_inner``: largest ``c`` with the mass of both
    ``r <= c/N`` and ``rho <= c N`` at most ``eta``.
    """
    if not 0.0 < eta < 1.0:
        raise RangeError(f"eta must lie in (0, 1), got {eta}")
    g = f.grid
    n_scale = frequency_scale(f)
    spec = _hhalf_spectral_density(f)
    half = g.inverse(np.sqrt(g.rho) * f.spectral_values())
    phys = np.abs(half) ** 2 * g.r_weights
    ps, ss = phys.sum(), spec.sum()
    c_outer = _outer_radius(g.r, g.dr, phys, eta * ps) * n_scale
    c_freq = _outer_radius(g.rho, g.drho, spec, eta * ss) / n_scale
    c_in_r = _inner_radius(g.r, g.dr, phys, eta * ps) * n_scale
    c_in_rho = _inner_radius(g.rho, g.drho, spec, eta * ss) / n_scale
    return CompactnessReport(eta, c_outer, c_freq, min(c_in_r, c_in_rho), n_scale)


@dataclass(frozen=True)
class DispersiveFit:
    exponent: float
    r2: float
    times: tuple
    sup_norms: tuple

    def as_dict(self):
        return {"exponent": self.exponent, "r2": self.r2}


def dispersive_fit(f0: RadialField, t_lo=1.0, t_hi=30.0, samples=16) -> DispersiveFit:
    """Least-squares slope of ``log ||e^{it Delta} f0||_inf`` against ``log t``.

    Sample times are log-spaced in ``[t_lo, t_hi]``.
    """
    if not t_lo >= 1.0:
        raise RangeError(f"t_lo must be >= 1 for the asymptotic regime, got {t_lo}")
    if not t_hi > t_lo:
        raise RangeError("t_hi must exceed t_lo")
    if int(samples) != samples or samples < 8:
        raise RangeError(f"need at least 8 samples, got {samples}")
    times = np.geomspace(t_lo, t_hi, int(samples))
    sup = np.array([lp_norm(free_propagate(f0, t), np.inf) for t in times])
    if not np.all(sup > 0):
        raise DegenerateDenominator("field vanished; decay exponent undefined")
    x, y = np.log(times), np.log(sup)
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return DispersiveFit(float(slope), float(r2), tuple(times), tuple(sup))


def dyadic_range(grid, low=8.0, high=8.0):
    """Powers of two in ``[low * rho_1, rho_max / high]``."""
    k_lo = math.ceil(math.log2(low * grid.drho) - 1e-12)
    k_hi = math.floor(math.log2(grid.rho_max / high) + 1e-12)
    return [2.0**k for k in range(k_lo, k_hi + 1)]


def _norm(f, q):
    if q == 2:
        # Plancherel: exact on the multiplier's own lattice
        g = f.grid
        return float(np.sqrt(np.sum(np.abs(f.spectral_values()) ** 2 * g.rho_weights)))
    return lp_norm(f, q)


def bernstein_suite(f: RadialField, exps, kind=LPKind.BAND, scales=None):
    """Bernstein ratios at every dyadic ``N`` in the resolvable range.

    For each ``(p, q, s)`` in ``exps`` and each ``N`` the row carries

    - ``pq_ratio = ||P f||_q / (N^{5/p - 5/q} ||P f||_p)``
    - ``s_ratio = || |grad|^s P f ||_q / (N^s ||P f||_q)`` (1 when ``s = 0``)

    where ``P`` is ``P_N`` (``kind="band"``) or ``P_{<=N}`` (``kind="low"``).
    ``p`` and ``q`` may be ``inf``.
    """
    exps = [tuple(e) for e in exps]
    for p, q, _ in exps:
        if not 1 <= p <= q:
            raise RangeError(f"need 1 <= p <= q, got p={p}, q={q}")
    kind = LPKind(kind)
    scales = dyadic_range(f.grid) if scales is None else list(scales)
    rows = []
    for n_ in scales:
        pf = lp_project(f, n_, kind)
        norms = {}

        def norm(x, key, field_):
            if key not in norms:
                norms[key] = _norm(field_, x)
            return norms[key]

        for p, q, s in exps:
            nq = norm(q, ("q", q, 0.0), pf)
            np_ = norm(p, ("q", p, 0.0), pf)
            if s:
                ds = apply_symbol(pf, f.grid.rho**s)
                ns = norm(q, ("q", q, s), ds)
                s_ratio = ns / (n_**s * nq) if nq > 0 else math.nan
            else:
                s_ratio = 1.0
            inv_p = 0.0 if math.isinf(p) else 1.0 / p
            inv_q = 0.0 if math.isinf(q) else 1.0 / q
            pq = nq / (n_ ** (DIMENSION * (inv_p - inv_q)) * np_) if np_ > 0 else math.nan
            rows.append(
                {"N": n_, "p": p, "q": q, "s": s, "kind": kind.value, "pq_ratio": pq, "s_ratio": s_ratio}
            )
    return rows


def band_spread(values):
    """max/min of positive finite values (1 means perfectly uniform)."""
    v = np.asarray([x for x in values if math.isfinite(x) and x > 0])
    if v.size == 0:
        return math.nan
    return float(v.max() / v.min())


__all__ = [
    "CompactnessReport",
    "DispersiveFit",
    "band_spread",
    "bernstein_suite",
    "compactness_report",
    "dispersive_fit",
    "dyadic_range",
    "frequency_scale",
]
