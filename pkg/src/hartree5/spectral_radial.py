r"""Radial functions on R^5 and their Fourier-side operators.

A radial function is sampled on the lattice ``r_j = j*dr`` (j = 1..n) with
``dr = r_max/(n+1)``; its Fourier transform lives on ``rho_k = k*pi/r_max``.
Because ``r_j * rho_k = j*k*pi/(n+1)`` the two sides are symmetric and the
radial Fourier transform in five dimensions,

.. math::

    \hat f(\rho) = \sqrt{2/\pi}\,\rho^{-2}\Big[\rho^{-1}\int_0^\infty
        f(r)\,r\sin(r\rho)\,dr - \int_0^\infty f(r)\,r^2\cos(r\rho)\,dr\Big],

reduces to one type-I DST and one type-I DCT. The same formula maps back,
so ``hankel_transform`` is its own inverse up to quadrature error.

Every Fourier multiplier (``|nabla|^s``, the Riesz potential, the
Littlewood-Paley cutoffs, ``exp(it Delta)``) is diagonal on the
``rho`` lattice. Fields may be held on either side; multipliers act on the
side they are given and return a field on that same side.
"""

import enum
import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.fft import dct, dst
from scipy.interpolate import CubicSpline

from .cutoffs import lp_annulus, lp_bump
from .errors import ComplexDensity, GridMismatch, NonFinite, RangeError, TailWarning

SIGMA4 = 8.0 * math.pi**2 / 3.0  # |S^4|
SIGMA3 = 2.0 * math.pi**2  # |S^3|
RIESZ_CONSTANT = 8.0 * math.pi**2  # |x|^-3 * g  <->  8 pi^2 |xi|^-2 g^
TAIL_FRACTION = 0.05
TAIL_TOLERANCE = 1e-8

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_HEAD = 64  # leading output nodes summed directly to avoid cancellation


def _kernel(z, derivative=False):
    """(sin z - z cos z)/z^3, or its derivative, stable for small z."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < 1.0
    zs = z[small]
    k = np.arange(12)
    coef = (-1.0) ** k * (2 * k + 2) / np.array([math.factorial(2 * i + 3) for i in k])
    if derivative:
        # d/dz sum c_k z^(2k) = sum 2k c_k z^(2k-1)
        out[small] = zs * np.polynomial.polynomial.polyval(zs**2, 2 * k[1:] * coef[1:])
        zl = z[~small]
        out[~small] = np.sin(zl) / zl**2 - 3.0 * (np.sin(zl) - zl * np.cos(zl)) / zl**4
    else:
        out[small] = np.polynomial.polynomial.polyval(zs**2, coef)
        zl = z[~small]
        out[~small] = (np.sin(zl) - zl * np.cos(zl)) / zl**3
    return out


class Side(str, enum.Enum):
    PHYSICAL = "physical"
    SPECTRAL = "spectral"

    @property
    def other(self):
        return Side.SPECTRAL if self is Side.PHYSICAL else Side.PHYSICAL


class LPKind(str, enum.Enum):
    BAND = "band"
    LOW = "low"
    HIGH = "high"


def _sine_cosine_sums(a, b):
    """Return (sum_j a_j sin(jk pi/(n+1)), sum_j b_j cos(jk pi/(n+1))), k=1..n."""
    n = a.shape[-1]
    s = 0.5 * dst(a, type=1)
    padded = np.zeros(n + 2, dtype=b.dtype)
    padded[1:-1] = b
    c = 0.5 * dct(padded, type=1)[1:-1]
    return s, c


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial lattice with its paired frequency lattice.

    Parameters
    ----------
    n : int
        Number of interior nodes on each side.
    r_max : float
        Truncation radius; ``r_max * rho_max == n * pi``.
    """

    n: int
    r_max: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 4:
            raise RangeError(f"grid needs an integer n >= 4, got {self.n}")
        if not (math.isfinite(self.r_max) and self.r_max > 0):
            raise RangeError(f"r_max must be positive and finite, got {self.r_max}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "r_max", float(self.r_max))

    @cached_property
    def dr(self):
        return self.r_max / (self.n + 1)

    @cached_property
    def drho(self):
        return math.pi / self.r_max

    @cached_property
    def r(self):
        r = self.dr * np.arange(1, self.n + 1)
        r.flags.writeable = False
        return r

    @cached_property
    def rho(self):
        rho = self.drho * np.arange(1, self.n + 1)
        rho.flags.writeable = False
        return rho

    @property
    def rho_max(self):
        return self.n * self.drho

    @cached_property
    def r_weights(self):
        """Quadrature weights for integrals over R^5 on the physical side."""
        w = SIGMA4 * self.r**4 * self.dr
        w.flags.writeable = False
        return w

    @cached_property
    def rho_weights(self):
        w = SIGMA4 * self.rho**4 * self.drho
        w.flags.writeable = False
        return w

    @cached_property
    def _head_kernel(self):
        m = min(_HEAD, self.n)
        z = np.outer(np.arange(1, m + 1), np.arange(1, self.n + 1)) * (math.pi / (self.n + 1))
        return _SQRT_2_OVER_PI * _kernel(z)

    @cached_property
    def _head_derivative_kernel(self):
        m = min(_HEAD, self.n)
        z = np.outer(np.arange(1, m + 1), np.arange(1, self.n + 1)) * (math.pi / (self.n + 1))
        return _SQRT_2_OVER_PI * _kernel(z, derivative=True) * (self.rho**5 * self.drho)

    def _transform(self, values, x, y, dx):
        v = np.asarray(values)
        s, c = _sine_cosine_sums(v * (x * dx), v * (x * x * dx))
        out = _SQRT_2_OVER_PI * (s / y - c) / (y * y)
        head = self._head_kernel
        out[: head.shape[0]] = head @ (v * (x**4 * dx))
        return out

    def forward(self, values):
        """Physical samples -> spectral samples (raw arrays, no checks)."""
        return self._transform(values, self.r, self.rho, self.dr)

    def inverse(self, values):
        """Spectral samples -> physical samples (raw arrays, no checks)."""
        return self._transform(values, self.rho, self.r, self.drho)

    def radial_derivative(self, spectral_values):
        """d/dr of the band-limited interpolant, sampled at the r nodes.

        With S, C, T the sums of f^ rho sin, f^ rho^2 cos and f^ rho^3 sin,
        f = c (S/r^3 - C/r^2) and f' = c (-3 S/r^4 + 3 C/r^3 + T/r^2).
        """
        v = np.asarray(spectral_values)
        rho, r, dk = self.rho, self.r, self.drho
        s, c = _sine_cosine_sums(v * (rho * dk), v * (rho**2 * dk))
        t = 0.5 * dst(v * (rho**3 * dk), type=1)
        out = _SQRT_2_OVER_PI * (-3.0 * s / r**4 + 3.0 * c / r**3 + t / r**2)
        head = self._head_derivative_kernel
        out[: head.shape[0]] = head @ v
        return out

    def evaluate(self, spectral_values, radii, chunk=512):
        """Evaluate the band-limited interpolant at arbitrary radii (direct sum)."""
        v = np.asarray(spectral_values)
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        out = np.empty(radii.shape, dtype=np.result_type(v, float))
        a = v * self.rho * self.drho
        b = v * self.rho**2 * self.drho
        for i in range(0, radii.size, chunk):
            x = radii[i : i + chunk]
            phase = np.outer(x, self.rho)
            s = np.sin(phase) @ a
            c = np.cos(phase) @ b
            out[i : i + chunk] = _SQRT_2_OVER_PI * (s / x - c) / x**2
        return out

    def physical_dot(self, a, b):
        return np.sum(np.conj(a) * b * self.r_weights)

    def spectral_dot(self, a, b):
        return np.sum(np.conj(a) * b * self.rho_weights)

    def tail_ratio(self, values):
        """max |f| over the outer 5% of nodes relative to max |f|."""
        mag = np.abs(np.asarray(values))
        peak = mag.max(initial=0.0)
        if peak == 0.0:
            return 0.0
        start = max(int(math.floor((1.0 - TAIL_FRACTION) * self.n)), 0)
        return float(mag[start:].max() / peak)


@dataclass(frozen=True, eq=False)
class RadialField:
    """Complex radial profile on one side of a :class:`RadialGrid`."""

    grid: RadialGrid
    values: np.ndarray
    side: Side = Side.PHYSICAL

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (self.grid.n,):
            raise GridMismatch(
                f"field has shape {vals.shape}, grid expects ({self.grid.n},)"
            )
        if not np.all(np.isfinite(vals)):
            raise NonFinite("field contains NaN or Inf")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "side", Side(self.side))

    @classmethod
    def from_function(cls, grid, func, side=Side.PHYSICAL):
        x = grid.r if Side(side) is Side.PHYSICAL else grid.rho
        return cls(grid, func(x), side)

    @property
    def nodes(self):
        return self.grid.r if self.side is Side.PHYSICAL else self.grid.rho

    @property
    def is_physical(self):
        return self.side is Side.PHYSICAL

    def with_values(self, values, side=None):
        return RadialField(self.grid, values, self.side if side is None else side)

    def physical(self):
        """This field on the physical side (transforming if needed)."""
        return self if self.is_physical else hankel_transform(self)

    def spectral(self):
        return hankel_transform(self) if self.is_physical else self

    def physical_values(self):
        if self.is_physical:
            return self.values
        return self.grid.inverse(self.values)

    def spectral_values(self):
        if self.is_physical:
            return self.grid.forward(self.values)
        return self.values

    def _check_compatible(self, other):
        if other.grid != self.grid:
            raise GridMismatch(f"grids differ: {self.grid} vs {other.grid}")
        if other.side is not self.side:
            raise GridMismatch(f"sides differ: {self.side.value} vs {other.side.value}")

    def __add__(self, other):
        if isinstance(other, RadialField):
            self._check_compatible(other)
            return self.with_values(self.values + other.values)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, RadialField):
            self._check_compatible(other)
            return self.with_values(self.values - other.values)
        return NotImplemented

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return self.with_values(self.values * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)

    def __repr__(self):
        return (
            f"RadialField(n={self.grid.n}, r_max={self.grid.r_max:g}, "
            f"side={self.side.value}, max|f|={np.abs(self.values).max():.3e})"
        )


def _require_finite(f):
    if not np.all(np.isfinite(f.values)):
        raise NonFinite("field contains NaN or Inf")


def warn_if_tail(f, tolerance=TAIL_TOLERANCE):
    """Emit a :class:`TailWarning` when a physical field is not decayed."""
    ratio = f.grid.tail_ratio(f.values)
    if ratio > tolerance:
        warnings.warn(
            TailWarning(
                f"|f| on the outer {TAIL_FRACTION:.0%} of the grid reaches "
                f"{ratio:.2e} of its peak; truncation error dominates",
                ratio,
            ),
            stacklevel=3,
        )
    return ratio


def hankel_transform(f: RadialField) -> RadialField:
    """Radial Fourier transform in R^5; maps each side to the other."""
    _require_finite(f)
    if f.is_physical:
        warn_if_tail(f)
        return RadialField(f.grid, f.grid.forward(f.values), Side.SPECTRAL)
    return RadialField(f.grid, f.grid.inverse(f.values), Side.PHYSICAL)


def apply_symbol(f: RadialField, symbol) -> RadialField:
    """Multiply by ``symbol(rho)`` on the spectral side; keep f's side."""
    _require_finite(f)
    m = symbol(f.grid.rho) if callable(symbol) else np.asarray(symbol)
    if f.is_physical:
        return f.with_values(f.grid.inverse(m * f.grid.forward(f.values)))
    return f.with_values(m * f.values)


def fractional_derivative(f: RadialField, s: float) -> RadialField:
    """``|nabla|^s f`` for ``-2 <= s <= 2`` (rho = 0 is never a node)."""
    if not abs(s) <= 2.0:
        raise RangeError(f"fractional order {s} outside [-2, 2]")
    if s == 0:
        _require_finite(f)
        return f
    return apply_symbol(f, f.grid.rho**s)


def hartree_convolution(g: RadialField, imag_tolerance=1e-10) -> RadialField:
    """``|x|^-3 * g`` via the exact multiplier ``8 pi^2 rho^-2``.

    ``g`` should be a real density; an imaginary part above
    ``imag_tolerance`` (relative to max |g|) raises :class:`ComplexDensity`.
    The result is real and lives on the same side as ``g``.
    """
    _require_finite(g)
    peak = np.abs(g.values).max(initial=0.0)
    if peak > 0 and np.abs(g.values.imag).max() > imag_tolerance * peak:
        raise ComplexDensity("density for the Hartree potential must be real")
    grid = g.grid
    symbol = RIESZ_CONSTANT / grid.rho**2
    dens = g.values.real
    if g.is_physical:
        return g.with_values(grid.inverse(symbol * grid.forward(dens)))
    return g.with_values(symbol * dens)


def hartree_potential_values(grid: RadialGrid, density):
    """Raw-array form of :func:`hartree_convolution` for inner loops."""
    return grid.inverse(RIESZ_CONSTANT / grid.rho**2 * grid.forward(density))


def lp_symbol(rho, N, kind):
    kind = LPKind(kind)
    x = np.asarray(rho) / N
    if kind is LPKind.BAND:
        return lp_annulus(x)
    if kind is LPKind.LOW:
        return lp_bump(x)
    return 1.0 - lp_bump(x)


def lp_project(f: RadialField, N: float, kind=LPKind.BAND) -> RadialField:
    """Littlewood-Paley piece ``P_N f``, ``P_{<=N} f`` or ``P_{>N} f``."""
    if not (N > 0 and math.isfinite(N)):
        raise RangeError(f"frequency N must be positive, got {N}")
    return apply_symbol(f, lp_symbol(f.grid.rho, N, kind))


def free_propagate(f: RadialField, t: float) -> RadialField:
    """Free Schrodinger flow ``exp(i t Delta) f`` (multiplier exp(-i t rho^2))."""
    if t == 0:
        _require_finite(f)
        return f
    return apply_symbol(f, np.exp(-1j * t * f.grid.rho**2))


def radial_derivative(f: RadialField) -> RadialField:
    """``d f / d r`` on the physical side, spectrally accurate."""
    _require_finite(f)
    return RadialField(f.grid, f.grid.radial_derivative(f.spectral_values()), Side.PHYSICAL)


def ab_rescale(f: RadialField, a: float, b: float) -> RadialField:
    """The field ``a * f(b x)`` on the side ``f`` is given on.

    Physical side: values resampled at ``b r_j``. Spectral side: uses
    ``a b^-5 f^(rho/b)``. Both interpolate ``x * f(x)`` with a cubic spline,
    which keeps the ``1/rho`` behaviour of slowly decaying fields regular.
    Points beyond the last node are set to zero.
    """
    _require_finite(f)
    if not (b > 0 and math.isfinite(b)):
        raise RangeError(f"rescale factor b must be positive, got {b}")
    x = f.nodes
    if f.is_physical:
        where, factor = b * x, a
    else:
        where, factor = x / b, a * b**-5
    spline = CubicSpline(x, x * f.values)
    out = spline(where) / where
    out[where > x[-1]] = 0.0
    return f.with_values(factor * out)


def gaussian(grid: RadialGrid, width=1.0, amplitude=1.0, chirp=0.0) -> RadialField:
    """``amplitude * exp(-r^2/(2 width^2) + i chirp r^2)`` on the physical side."""
    r = grid.r
    return RadialField(grid, amplitude * np.exp(-(r**2) / (2 * width**2) + 1j * chirp * r**2))


def save_field(f: RadialField, path):
    """Two-column text file: node, Re f, Im f; header carries n, r_max, side."""
    header = f"n={f.grid.n} r_max={f.grid.r_max!r} side={f.side.value}"
    data = np.column_stack([f.nodes, f.values.real, f.values.imag])
    np.savetxt(path, data, fmt="%.17e", header=header)


def load_field(path) -> RadialField:
    with open(path) as fh:
        header = fh.readline().lstrip("#").split()
    meta = dict(item.split("=", 1) for item in header)
    grid = RadialGrid(int(meta["n"]), float(meta["r_max"]))
    data = np.loadtxt(path, ndmin=2)
    if data.shape != (grid.n, 3):
        raise GridMismatch(f"{path}: expected {grid.n} rows of 3 columns")
    return RadialField(grid, data[:, 1] + 1j * data[:, 2], Side(meta["side"]))
