import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from hartree5 import functionals as fn
from hartree5.corpus import random_bumps
from hartree5.errors import DegenerateDenominator, RangeError
from hartree5.spectral_radial import RadialField, RadialGrid, gaussian

SETTINGS = settings(max_examples=25, deadline=None)


@pytest.fixture(scope="module")
def zero(grid):
    return RadialField(grid, np.zeros(grid.n))


def test_lp_norm_gaussian(grid, zero):
    assert fn.lp_norm(zero, 2) == 0
    assert abs(fn.lp_norm(gaussian(grid), 2) / math.pi**1.25 - 1) < 1e-12
    with pytest.raises(RangeError):
        fn.lp_norm(gaussian(grid), 0.5)


def test_lp_norm_scaling(grid):
    a = fn.lp_norm(gaussian(grid), 2.5)
    b = fn.lp_norm(gaussian(grid, width=2.0), 2.5)
    assert abs(b / (2.0 ** (5 / 2.5) * a) - 1) < 1e-10


@pytest.mark.parametrize("s, tol", [(0.0, 1e-12), (1.0, 1e-12), (2.0, 1e-12), (-1.0, 1e-12), (0.5, 1e-8)])
def test_sobolev_gaussian(grid, s, tol):
    # odd powers of rho in the integrand (s = 1/2) make the lattice sum O(drho^6)
    assert abs(fn.sobolev_norm(gaussian(grid), s) / oracles.gaussian_hs(s) - 1) < tol


def test_sobolev_h1_closed_form(grid):
    assert abs(fn.sobolev_norm(gaussian(grid), 1) / (math.sqrt(2.5) * math.pi**1.25) - 1) < 1e-12
    assert abs(fn.sobolev_norm(gaussian(grid), 0) / fn.lp_norm(gaussian(grid), 2) - 1) < 1e-10
    with pytest.raises(RangeError):
        fn.sobolev_norm(gaussian(grid), 3)


@SETTINGS
@given(seed=st.integers(0, 2**32 - 1))
def test_interpolation_inequality(small_grid, seed):
    (f,) = random_bumps(small_grid, 1, seed, complex_phase=True)
    h = fn.sobolev_norm(f, 0.5) ** 2
    assert h <= fn.sobolev_norm(f, 0) * fn.sobolev_norm(f, 1) * (1 + 1e-12)


def test_hartree_energy_gaussian(grid, zero):
    assert fn.hartree_energy(zero) == 0
    p = fn.hartree_energy(gaussian(grid))
    assert abs(p / oracles.hartree_energy_gaussian() - 1) < 1e-6
    assert abs(p / ((math.pi / 2) ** 2.5 * oracles.SIGMA4) - 1) < 1e-10
    assert abs(fn.hartree_energy(gaussian(grid, amplitude=2.0)) / (16 * p) - 1) < 1e-12


def test_energy_small_data(grid, zero):
    assert fn.energy(zero) == 0
    f = gaussian(grid, amplitude=1e-3)
    assert abs(fn.energy(f) / (0.5 * fn.sobolev_norm(f, 1) ** 2) - 1) < 1e-5


@SETTINGS
@given(seed=st.integers(0, 2**32 - 1))
def test_energy_decomposition(small_grid, seed):
    (f,) = random_bumps(small_grid, 1, seed, complex_phase=True)
    lhs = fn.energy(f) + 0.25 * fn.hartree_energy(f)
    rhs = 0.5 * fn.sobolev_norm(f, 1) ** 2
    assert abs(lhs - rhs) <= 4 * np.finfo(float).eps * max(abs(rhs), 0.25 * fn.hartree_energy(f))


@SETTINGS
@given(seed=st.integers(0, 2**32 - 1))
def test_hls_weinstein_reciprocal(small_grid, seed):
    (f,) = random_bumps(small_grid, 1, seed, complex_phase=True)
    assert abs(fn.hls_ratio(f) * fn.weinstein(f) - 1) < 1e-12


@SETTINGS
@given(seed=st.integers(0, 2**32 - 1))
def test_weinstein_scaling_invariance(seed):
    # a f(b x) with (a, b) = (3, 1/2): sampled on a box twice as large the
    # lattice is the same up to the factor 2, so the invariance is exact
    a, b = RadialGrid(2047, 20.0), RadialGrid(2047, 40.0)
    (f,) = random_bumps(a, 1, seed, complex_phase=True)
    g = RadialField(b, 3.0 * f.values)
    assert abs(fn.weinstein(g) / fn.weinstein(f) - 1) < 1e-10
    assert abs(fn.hls_ratio(g) / fn.hls_ratio(f) - 1) < 1e-10


def test_weinstein_resampled_gaussian(grid):
    # same statement with both fields on one lattice: limited by the H^1/2 quadrature
    j0 = fn.weinstein(gaussian(grid))
    j1 = fn.weinstein(gaussian(grid, width=2.0, amplitude=3.0))
    assert abs(j1 / j0 - 1) < 1e-6


def test_degenerate(grid, zero):
    with pytest.raises(DegenerateDenominator):
        fn.weinstein(zero)
    with pytest.raises(DegenerateDenominator):
        fn.hls_ratio(zero)
    with pytest.raises(DegenerateDenominator):
        fn.radial_decay_ratio(zero)


def test_localized_mass(grid, zero):
    f = gaussian(grid)
    assert fn.localized_mass(zero, 3.0) == 0
    mass = fn.lp_norm(f, 2) ** 2
    assert abs(fn.localized_mass(f, 10.0) / mass - 1) < 1e-12
    with pytest.raises(RangeError):
        fn.localized_mass(f, 0.0)
    ms = [fn.localized_mass(f, R) for R in (0.5, 1, 2, 4, 8)]
    assert all(a <= b for a, b in zip(ms, ms[1:]))


@SETTINGS
@given(seed=st.integers(0, 2**32 - 1), R=st.floats(0.2, 10.0))
def test_localized_mass_monotone(small_grid, seed, R):
    (f,) = random_bumps(small_grid, 1, seed, complex_phase=True)
    assert fn.localized_mass(f, R) <= fn.localized_mass(f, 2 * R) * (1 + 1e-14)


def test_radial_decay_ratio(grid):
    a = fn.radial_decay_ratio(gaussian(RadialGrid(2047, 40.0)))
    b = fn.radial_decay_ratio(gaussian(grid))
    assert abs(a / b - 1) < 1e-3
    # f(./2) on a box twice as large: the lattice maximum is taken at matching nodes
    c = fn.radial_decay_ratio(gaussian(RadialGrid(4096, 80.0), width=2.0))
    assert abs(c / b - 1) < 1e-8


def test_radial_decay_ratio_corpus(grid):
    ratios = [fn.radial_decay_ratio(f) for f in random_bumps(grid, 20, 7)]
    assert max(ratios) < 10 and min(ratios) > 0.1


def test_strichartz_density(grid, zero):
    assert fn.strichartz_density(zero) == 0
    f = gaussian(grid)
    assert abs(fn.strichartz_density(2 * f) / (8 * fn.strichartz_density(f)) - 1) < 1e-12
    assert fn.x_density(f) > 0


def test_strichartz_free_integrability():
    from hartree5.spectral_radial import free_propagate

    g = RadialGrid(8191, 400.0)
    f = gaussian(g)
    t = np.linspace(0.0, 50.0, 2001)
    dens = np.array([fn.strichartz_density(free_propagate(f, s)) for s in t])
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(t))])
    last = cum[-1] - cum[-41]  # over the final unit of time
    assert last < 1e-6 * cum[-1] * 40


def test_m_a_real_field_vanishes(grid, ground_state):
    assert abs(fn.virial_m_a(gaussian(grid), 5.0)) < 1e-12
    q = ground_state.profile.physical()
    assert abs(fn.virial_m_a(q, 5.0)) < 1e-12


def test_m_a_chirped_gaussian(grid):
    f = gaussian(grid, chirp=0.25)
    assert abs(fn.virial_m_a(f, 20.0) / oracles.chirped_gaussian_m_a(1.0, 0.25) - 1) < 1e-10


@SETTINGS
@given(seed=st.integers(0, 2**32 - 1), R=st.floats(0.5, 8.0))
def test_m_a_cauchy_schwarz(small_grid, seed, R):
    (f,) = random_bumps(small_grid, 1, seed, complex_phase=True)
    bound = 2 * R * fn.lp_norm(f, 2) * fn.sobolev_norm(f, 1)
    # |2 Im int conj(u) psi r u_r| <= 2 sup(psi r) ||u|| ||u_r|| and sup(psi r) <= 2R
    assert abs(fn.virial_m_a(f, R)) <= 2 * bound * (1 + 1e-6)


def test_virial_support_inside_plateau(grid):
    f = gaussian(grid, amplitude=0.6, chirp=0.25)
    b = fn.virial_rate(f, 28.0)
    assert b.total == b.main + b.err_mass + b.err_grad + b.err_conv
    for e in (b.err_mass, b.err_grad, b.err_conv):
        assert abs(e) < 1e-10 * abs(b.main)


def test_virial_tiny_amplitude(grid):
    f = gaussian(grid, amplitude=1e-4, chirp=0.1)
    b = fn.virial_rate(f, 30.0)
    assert abs(b.total / (4 * fn.sobolev_norm(f, 1) ** 2) - 1) < 1e-4


def test_virial_main_identity(grid):
    # 12 E - 2 ||grad u||^2 = 4 ||grad u||^2 - 3 P
    f = gaussian(grid, amplitude=0.8)
    b = fn.virial_rate(f, 30.0)
    h1 = fn.sobolev_norm(f, 1) ** 2
    assert abs(b.main - (4 * h1 - 3 * fn.hartree_energy(f))) < 1e-10 * abs(b.main)


def test_virial_quadrature_matches_newton(grid):
    f = gaussian(grid, amplitude=0.8, chirp=0.2)
    a = fn.virial_rate(f, 1.2)
    b = fn.virial_rate(f, 1.2, method="quadrature")
    assert abs(a.err_conv) > 1e-3 * abs(a.main)
    assert abs(b.err_conv / a.err_conv - 1) < 1e-4
    assert (a.main, a.err_mass, a.err_grad) == (b.main, b.err_mass, b.err_grad)


def test_virial_errors(grid):
    f = gaussian(grid)
    with pytest.raises(RangeError):
        fn.virial_rate(f, -1.0)
    with pytest.raises(ValueError):
        fn.virial_rate(f, 1.0, method="spline")
