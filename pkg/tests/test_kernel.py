from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from fhn_ap.diagnostics import fitted_slope
from fhn_ap.grid import Grid
from fhn_ap.kernel import (
    CompactIndicatorKernel,
    CustomKernel,
    GaussianKernel,
    KernelIntegrationError,
    QuadratureError,
    angular_weight,
    bessel_j0,
    cache_path,
    compute_modes,
    load_modes,
    mode_values,
    moments,
    sinc,
)


def j0_series_oracle(x: float, terms: int = 80) -> float:
    # partial sum of the power series in exact rational arithmetic, rounded once
    q = Fraction(x) ** 2 / 4
    total, term = Fraction(0), Fraction(1)
    for l in range(terms):
        total += term
        term *= -q / ((l + 1) ** 2)
    return float(total)


def first_root_by_bisection() -> float:
    lo, hi = 2.0, 3.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if j0_series_oracle(lo) * j0_series_oracle(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Bessel J0 and angular weights


def test_j0_at_zero():
    assert bessel_j0(0.0) == 1.0


def test_j0_at_one_matches_series():
    oracle = j0_series_oracle(1.0)
    assert oracle == pytest.approx(0.765197686557967, abs=1e-15)
    assert bessel_j0(1.0) == pytest.approx(oracle, rel=1e-13)


def test_j0_first_root():
    root = first_root_by_bisection()
    assert root == pytest.approx(2.404825557695773, abs=1e-14)
    assert abs(bessel_j0(2.404825557695773)) < 1e-10


@pytest.mark.parametrize("x", [0.3, 2.0, 5.5, 7.9, 8.1, 12.0, 24.9, 25.1, 60.0, 400.0])
def test_j0_branches_against_scipy(x):
    ref = special.j0(x)
    assert abs(bessel_j0(x) - ref) <= 1e-12 * max(1.0, abs(ref)) + 1e-14


@given(st.floats(0.0, 20.0))
@settings(deadline=None, max_examples=60)
def test_j0_matches_series_oracle(x):
    assert abs(bessel_j0(x) - j0_series_oracle(x, 120)) < 1e-11


@given(st.floats(0.0, 500.0))
@settings(max_examples=200, deadline=None)
def test_j0_bounded_and_vectorized(x):
    vals = bessel_j0(np.array([x, x]))
    assert vals.shape == (2,)
    assert abs(vals[0]) <= 1.0
    assert vals[0] == bessel_j0(x)


def test_angular_weight_values():
    assert angular_weight(3, 0.0) == pytest.approx(4 * np.pi)
    assert angular_weight(1, np.pi) == pytest.approx(-2.0)
    assert angular_weight(2, 1.0) == pytest.approx(2 * np.pi * 0.765197686557967, rel=1e-13)
    with pytest.raises(ValueError):
        angular_weight(4, 1.0)


def test_sinc_taylor_branch_is_continuous():
    z = np.array([0.0, 1e-8, 9.9e-5, 1.01e-4, 0.5])
    np.testing.assert_allclose(sinc(z), np.sinc(z / np.pi), rtol=1e-15, atol=0)


# ---------------------------------------------------------------------------
# moments


def test_gaussian_moments():
    m1 = moments(GaussianKernel(0.005, 1))
    assert (m1.psi_bar, m1.sigma_bar) == (1.0, 0.0025)
    m2 = moments(GaussianKernel(0.005, 2))
    assert m2.psi_bar == 1.0
    assert m2.half_second_moment == pytest.approx(0.005)
    # the diffusion coefficient is the per-direction variance over two in any dimension
    assert m2.sigma_bar == pytest.approx(0.0025)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_indicator_moments(d):
    k = CompactIndicatorKernel(0.3, d)
    m = moments(k)
    assert m.psi_bar == 1.0
    custom = CustomKernel(k.profile, d, support=0.3, fourth_moment_finite=True)
    mc = moments(custom)
    assert mc.psi_bar == pytest.approx(1.0, rel=1e-9)
    assert mc.sigma_bar == pytest.approx(m.sigma_bar, rel=1e-9)
    assert mc.half_second_moment == pytest.approx(m.half_second_moment, rel=1e-9)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_custom_gaussian_moments_by_quadrature(d):
    g = GaussianKernel(0.01, d)
    custom = CustomKernel(g.profile, d, fourth_moment_finite=True)
    m, mg = moments(custom), moments(g)
    assert m.psi_bar == pytest.approx(mg.psi_bar, rel=1e-9)
    assert m.sigma_bar == pytest.approx(mg.sigma_bar, rel=1e-9)


def test_custom_kernel_requires_attestation_and_sign():
    with pytest.raises(ValueError, match="fourth"):
        CustomKernel(lambda s: np.exp(-s), 1)
    with pytest.raises(ValueError, match="nonnegative"):
        CustomKernel(lambda s: np.cos(s), 1, fourth_moment_finite=True)


def test_non_integrable_custom_kernel():
    k = CustomKernel(lambda s: 1.0 / (1.0 + s), 1, fourth_moment_finite=True)
    with pytest.raises(KernelIntegrationError):
        moments(k)


@pytest.mark.parametrize("kwargs", [{"sigma0": 0.0}, {"d": 4}])
def test_gaussian_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        GaussianKernel(**kwargs)


# ---------------------------------------------------------------------------
# modes


def test_zero_mode_is_mass():
    k = GaussianKernel(0.005, 1)
    for eps in (0.5, 0.1, 0.01):
        assert 2 * np.pi * mode_values(k, [0.0], eps)[0] == pytest.approx(1.0, abs=1e-13)


def test_mode_against_brute_force_trapezoid():
    k = GaussianKernel(0.005, 1)
    eps, kk = 0.1, 1.0
    s = np.linspace(0.0, np.pi / eps, 1_000_001)
    f = k.profile(s) * 2 * np.cos(eps * kk * s)
    ds = s[1] - s[0]
    brute = ds * (f.sum() - 0.5 * (f[0] + f[-1])) / (2 * np.pi)
    assert abs(mode_values(k, [kk], eps)[0] - brute) < 1e-10


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("knorm", [1.0, 4.0])
def test_mode_expansion_has_fourth_order_residual(d, knorm):
    k = GaussianKernel(0.005, d)
    m = moments(k)
    eps = np.array([0.2, 0.1, 0.05, 0.025])
    res = [abs((2 * np.pi) ** d * mode_values(k, [knorm], e)[0] - m.psi_bar + m.sigma_bar * e**2 * knorm**2)
           for e in eps]
    assert fitted_slope(eps, res) == pytest.approx(4.0, abs=0.3)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_indicator_mode_closed_form(d):
    # Fourier transform of the unit-mass indicator of radius R at |k|:
    # d=1 sin(kR)/(kR), d=3 3(sin x - x cos x)/x^3, d=2 2 J1(x)/x
    R, eps, knorm = 0.4, 0.2, 3.0
    x = knorm * eps * R
    exact = {1: np.sin(x) / x, 2: 2 * special.j1(x) / x, 3: 3 * (np.sin(x) - x * np.cos(x)) / x**3}[d]
    got = (2 * np.pi) ** d * mode_values(CompactIndicatorKernel(R, d), [knorm], eps)[0]
    assert got == pytest.approx(exact, abs=1e-12)


def test_modes_are_radial_and_real():
    grid = Grid(2, 16)
    modes = compute_modes(GaussianKernel(0.005, 2), grid, 0.3)
    assert modes.values.dtype == np.float64
    kx, ky = grid.k_index
    for a, b in [((1, 2), (2, 1)), ((3, 4), (0, 5)), ((-3, 0), (0, 3)), ((5, 5), (-5, 5))]:
        ia = tuple(np.argwhere((kx == a[0]) & (ky == a[1]))[0])
        ib = tuple(np.argwhere((kx == b[0]) & (ky == b[1]))[0])
        assert modes.values[ia] == modes.values[ib]


def test_modes_refinement_stability():
    k = GaussianKernel(0.005, 1)
    ks = np.arange(0, 65, dtype=float)
    a = mode_values(k, ks, 0.05)
    b = mode_values(k, ks, 0.05, tol=1e-14)
    assert np.max(np.abs(a - b)) < 1e-12


def test_quadrature_failure_reports_worst_mode():
    rough = CustomKernel(lambda s: np.abs(np.sin(400 * s)), 1, support=1.0, fourth_moment_finite=True)
    with pytest.raises(QuadratureError) as info:
        mode_values(rough, [0.0, 1.0, 2.0], 1.0, tol=1e-15)
    assert info.value.worst_k in (0.0, 1.0, 2.0)
    assert info.value.residual > 1e-15


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        compute_modes(GaussianKernel(0.005, 1), Grid(2, 8), 0.1)


def test_mode_cache_roundtrip(tmp_path):
    grid = Grid(1, 32, -15.0, 15.0)
    kern = GaussianKernel(0.005, 1)
    fresh = compute_modes(kern, grid, 0.25, cache_dir=tmp_path)
    path = cache_path(tmp_path, kern, grid, 0.25)
    assert path.exists()
    raw = path.read_bytes()
    assert raw[:8] == b"FHNMODES" and len(raw) == 8 + 4 * 3 + 8 + 32 * 8
    again = compute_modes(kern, grid, 0.25, cache_dir=tmp_path)
    np.testing.assert_array_equal(fresh.values, again.values)
    with pytest.raises(ValueError):
        load_modes(path, Grid(1, 64))


def test_physical_domain_rescales_eps():
    # the same physical kernel on a box of length 2 pi and on a box of length 30
    a = compute_modes(GaussianKernel(0.005, 1), Grid(1, 16), 0.5)
    b = compute_modes(GaussianKernel(0.005, 1), Grid(1, 16, -15.0, 15.0), 0.5)
    scale = 2 * np.pi / 30.0
    expected = mode_values(GaussianKernel(0.005, 1), np.abs(Grid(1, 16).k_index[0]), 0.5 * scale)
    np.testing.assert_allclose(b.values, expected, atol=1e-15)
    assert not np.allclose(a.values, b.values)
