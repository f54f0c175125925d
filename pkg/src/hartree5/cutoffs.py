"""Smooth plateau cutoffs built from the exp(-1/t) transition.

``plateau(x, inner, outer)`` equals 1 for ``x <= inner``, 0 for
``x >= outer`` and is C-infinity in between. Derivatives up to third order
are available in closed form because the virial rate needs them.
"""

import numpy as np
from scipy.special import expit


def _transition(t, order):
    # s(t) = 1 / (1 + exp(g)), g = (2t - 1) / (t (1 - t)) on 0 < t < 1
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = (t > 0.0) & (t < 1.0)
    if order == 0:
        out[t <= 0.0] = 1.0
    ti = t[inside]
    if ti.size == 0:
        return out
    u = 1.0 - ti
    g = (2.0 * ti - 1.0) / (ti * u)
    p = expit(-g)  # s itself
    q = expit(g)  # 1 - s, computed without cancellation
    if order == 0:
        out[inside] = p
        return out
    g1 = 1.0 / ti**2 + 1.0 / u**2
    d1 = -p * q  # dL/dg
    if order == 1:
        out[inside] = d1 * g1
        return out
    g2 = -2.0 / ti**3 + 2.0 / u**3
    d2 = (p - q) * d1
    if order == 2:
        out[inside] = d2 * g1**2 + d1 * g2
        return out
    g3 = 6.0 / ti**4 + 6.0 / u**4
    d3 = 2.0 * (p * q) ** 2 - (p - q) ** 2 * p * q
    if order == 3:
        out[inside] = d3 * g1**3 + 3.0 * d2 * g1 * g2 + d1 * g3
        return out
    raise ValueError("derivative order must be 0..3")


def plateau(x, inner=1.0, outer=2.0, order=0):
    """Smooth cutoff: 1 on ``[0, inner]``, 0 beyond ``outer``.

    ``order`` selects the derivative with respect to ``x``.
    """
    width = outer - inner
    t = (np.asarray(x, dtype=float) - inner) / width
    return _transition(t, order) / width**order


def lp_bump(x):
    """Littlewood-Paley bump: 1 for |x| <= 1, 0 for |x| >= 11/10."""
    return plateau(np.abs(x), 1.0, 1.1)


def lp_annulus(x):
    """psi(x) = phi(x) - phi(2x), supported in 1/2 <= |x| <= 11/10."""
    return lp_bump(x) - lp_bump(2.0 * np.asarray(x))
