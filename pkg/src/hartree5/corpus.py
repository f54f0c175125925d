"""Seeded corpora of smooth random radial fields."""

import numpy as np

from .spectral_radial import RadialField


def random_bumps(grid, count, rng, max_bumps=4, max_center=6.0, signed=True, complex_phase=False):
    """Superpositions of 1..max_bumps Gaussian shells.

    Each shell is ``a_k [g(r - c_k) + g(r + c_k)]`` with ``g(x) = exp(-x^2 / (2 w_k^2))``,
    centers in ``[0, max_center]`` and widths in ``[0.3, 2]``; the even
    extension keeps every field smooth at the origin of R^5. Amplitudes are drawn from
    ``[-1, 1]`` when ``signed`` else ``[0.2, 1]``; ``complex_phase`` adds a
    random chirp ``exp(i b r^2)``.
    """
    rng = np.random.default_rng(rng)
    r = grid.r
    out = []
    for _ in range(count):
        k = rng.integers(1, max_bumps + 1)
        f = np.zeros(grid.n, dtype=complex)
        for _ in range(k):
            a = rng.uniform(-1.0, 1.0) if signed else rng.uniform(0.2, 1.0)
            c = rng.uniform(0.0, max_center)
            w = rng.uniform(0.3, 2.0)
            f += a * (np.exp(-((r - c) ** 2) / (2.0 * w * w)) + np.exp(-((r + c) ** 2) / (2.0 * w * w)))
        if complex_phase:
            f = f * np.exp(1j * rng.uniform(-0.5, 0.5) * r * r)
        if not np.any(f):
            f[0] = 1.0
        out.append(RadialField(grid, f))
    return out
