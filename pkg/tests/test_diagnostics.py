import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hartree5.diagnostics import (
    band_spread,
    bernstein_suite,
    compactness_report,
    dispersive_fit,
    dyadic_range,
    frequency_scale,
)
from hartree5.errors import DegenerateDenominator, RangeError
from hartree5.experiments import broadband_field
from hartree5.spectral_radial import LPKind, RadialField, RadialGrid, gaussian, lp_project


def compact_bump(grid, a, radius):
    """``exp(-a / (1 - (r/radius)^2))`` inside ``r < radius``, zero outside."""
    x = (grid.r / radius) ** 2
    return RadialField(grid, np.where(x < 1, np.exp(-a / np.maximum(1 - x, 1e-300)), 0.0))


@pytest.fixture(scope="module")
def dispersive_grid():
    return RadialGrid(8191, 600.0)


# frequency scale


def test_frequency_scale_covariance(grid):
    n1 = frequency_scale(gaussian(grid))
    n2 = frequency_scale(gaussian(grid, width=2.0))
    assert n1 / n2 == pytest.approx(2.0, rel=0.02)


def test_frequency_scale_inside_lattice(grid):
    n = frequency_scale(gaussian(grid))
    assert grid.rho[0] < n < grid.rho[-1]


def test_frequency_scale_zero_field(grid):
    with pytest.raises(DegenerateDenominator):
        frequency_scale(RadialField(grid, np.zeros(grid.n)))


@pytest.mark.parametrize("N", [0.5, 1.0, 2.0, 4.0, 8.0])
def test_frequency_scale_of_band_piece(grid, N):
    f = lp_project(broadband_field(grid), N)
    assert N / 2 <= frequency_scale(f) <= 2.2 * N


@settings(max_examples=20, deadline=None)
@given(theta=st.floats(0.0, 2 * math.pi))
def test_diagnostics_phase_invariant(small_grid, theta):
    f = gaussian(small_grid, chirp=0.2)
    g = RadialField(small_grid, np.exp(1j * theta) * f.physical_values())
    assert frequency_scale(g) == pytest.approx(frequency_scale(f), rel=1e-12)
    a, b = compactness_report(f, 0.2), compactness_report(g, 0.2)
    for key in ("c_outer", "c_freq", "c_inner"):
        assert getattr(b, key) == pytest.approx(getattr(a, key), rel=1e-9)


# compactness report


def test_compactness_finite(grid):
    f = gaussian(grid)
    rep = compactness_report(f, 0.5)
    assert 0 < rep.c_outer < grid.r_max * rep.n_scale
    assert rep.c_freq > 0 and rep.c_inner > 0
    assert rep.as_dict()["eta"] == 0.5


def test_compactness_scale_invariant(grid):
    a = compactness_report(gaussian(grid), 0.2)
    b = compactness_report(gaussian(grid, width=2.0), 0.2)
    for key in ("c_outer", "c_freq", "c_inner"):
        assert getattr(b, key) == pytest.approx(getattr(a, key), rel=0.02)


def test_compactness_width_times_scale(grid):
    # N * (c_outer / N) is a fixed number along a pure rescaling family
    vals = []
    for w in (0.5, 1.0, 2.0):
        rep = compactness_report(gaussian(grid, width=w), 0.3)
        vals.append(rep.n_scale * (rep.c_outer / rep.n_scale))
    assert max(vals) / min(vals) < 1.02


def test_compactness_outer_monotone(grid):
    f = gaussian(grid, chirp=0.3)
    assert compactness_report(f, 0.1).c_outer >= compactness_report(f, 0.3).c_outer


def test_compactness_series_ordering(grid):
    f = gaussian(grid, chirp=0.3)
    reps = [compactness_report(f, eta) for eta in (0.05, 0.1, 0.2, 0.3, 0.45)]
    outer = [r.c_outer for r in reps]
    freq = [r.c_freq for r in reps]
    inner = [r.c_inner for r in reps]
    assert np.all(np.diff(outer) <= 0) and np.all(np.diff(freq) <= 0)
    # admitting more mass below the inner radius can only enlarge it
    assert np.all(np.diff(inner) >= 0)


@pytest.mark.xfail(
    strict=True,
    reason="c_inner is the largest radius holding at most eta of the mass, so it "
    "grows with eta; it cannot also be nonincreasing",
)
def test_compactness_inner_nonincreasing(grid):
    f = gaussian(grid)
    inner = [compactness_report(f, eta).c_inner for eta in (0.1, 0.2, 0.3)]
    assert np.all(np.diff(inner) <= 0)


@pytest.mark.parametrize("eta", [0.0, 1.0, -0.1, 1.5, math.nan])
def test_compactness_eta_range(grid, eta):
    with pytest.raises(RangeError):
        compactness_report(gaussian(grid), eta)


# dispersive decay


def test_dispersive_gaussian(dispersive_grid):
    fit = dispersive_fit(gaussian(dispersive_grid, width=0.5), 1.0, 30.0, 16)
    assert fit.exponent == pytest.approx(-2.5, abs=0.05)
    assert fit.r2 > 0.999
    assert len(fit.times) == 16


@pytest.mark.xfail(
    strict=True,
    reason="the unit Gaussian is still in its pre-asymptotic regime at t = 1 "
    "(measured slope about -2.44); width 0.5 reaches -2.50",
)
def test_dispersive_unit_gaussian(dispersive_grid):
    fit = dispersive_fit(gaussian(dispersive_grid), 1.0, 30.0, 16)
    assert fit.exponent == pytest.approx(-2.5, abs=0.05)
    assert fit.r2 > 0.999


def test_dispersive_compact_bump(dispersive_grid):
    ref = dispersive_fit(gaussian(dispersive_grid, width=0.5)).exponent
    fit = dispersive_fit(compact_bump(dispersive_grid, 8.0, 4.0))
    assert fit.exponent == pytest.approx(ref, abs=0.1)
    assert fit.r2 > 0.999


@pytest.mark.xfail(
    strict=True,
    reason="a narrow bump carries slowly decaying high frequencies that reach the "
    "Dirichlet wall and refocus at the origin before t = 30",
)
def test_dispersive_narrow_bump(dispersive_grid):
    ref = dispersive_fit(gaussian(dispersive_grid, width=0.5)).exponent
    fit = dispersive_fit(compact_bump(dispersive_grid, 1.0, 1.0))
    assert fit.exponent == pytest.approx(ref, abs=0.1)


def test_dispersive_amplitude_invariant(grid):
    f = gaussian(grid, width=0.5)
    a = dispersive_fit(f, 1.0, 3.0, 8)
    b = dispersive_fit(RadialField(grid, 10 * f.physical_values()), 1.0, 3.0, 8)
    assert a.exponent < -2
    assert b.exponent == pytest.approx(a.exponent, abs=1e-9)
    assert b.r2 == pytest.approx(a.r2, abs=1e-9)


@pytest.mark.parametrize(
    "t_lo,t_hi,samples",
    [(0.5, 30.0, 16), (2.0, 2.0, 16), (5.0, 1.0, 16), (1.0, 30.0, 7), (1.0, 30.0, 8.5)],
)
def test_dispersive_ranges(small_grid, t_lo, t_hi, samples):
    with pytest.raises(RangeError):
        dispersive_fit(gaussian(small_grid), t_lo, t_hi, samples)


def test_dispersive_zero_field(small_grid):
    with pytest.raises(DegenerateDenominator):
        dispersive_fit(RadialField(small_grid, np.zeros(small_grid.n)), 1.0, 2.0, 8)


# Bernstein


def test_dyadic_range_limits(grid):
    scales = dyadic_range(grid)
    assert scales[0] >= 8 * grid.drho and scales[-1] <= grid.rho_max / 8
    assert all(b == 2 * a for a, b in zip(scales, scales[1:]))


def test_bernstein_order_error(grid):
    with pytest.raises(RangeError):
        bernstein_suite(gaussian(grid), [(4, 2, 0.0)])
    with pytest.raises(RangeError):
        bernstein_suite(gaussian(grid), [(0.5, 2, 0.0)])


@pytest.mark.parametrize("s", [0.5, 1.0, -0.5])
def test_bernstein_s_ratio_support(grid, s):
    rows = bernstein_suite(broadband_field(grid), [(2, 2, s)])
    lo, hi = sorted((0.5**s, 1.1**s))
    for row in rows:
        assert lo <= row["s_ratio"] <= hi
        assert row["pq_ratio"] == pytest.approx(1.0, rel=1e-12)


def test_bernstein_low_one_inf_finite(grid):
    rows = bernstein_suite(gaussian(grid), [(1, math.inf, 0.0)], kind=LPKind.LOW)
    assert rows and all(math.isfinite(r["pq_ratio"]) and r["pq_ratio"] > 0 for r in rows)


def test_bernstein_explicit_scales(grid):
    rows = bernstein_suite(gaussian(grid), [(2, 4, 0.0), (2, 2, 0.5)], scales=[1.0, 2.0])
    assert [r["N"] for r in rows] == [1.0, 1.0, 2.0, 2.0]
    assert {r["kind"] for r in rows} == {"band"}


def test_band_spread():
    assert band_spread([1.0, 2.0, 4.0]) == 4.0
    assert band_spread([2.0, math.nan, 0.0, 3.0]) == 1.5
    assert math.isnan(band_spread([math.nan]))
