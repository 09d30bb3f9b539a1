"""Grid, sampling, quadrature and analytic-datum oracle tests."""

import math

import numpy as np
import pytest

from decaylab.fields import (
    BumpLambda,
    CubeIndicator,
    Gaussian,
    GridSpec,
    OracleUnavailable,
    SampledField,
    SupportOverflowError,
    integrate,
    l2_norm,
    product_gaussian_phase,
    sample,
    spectral_derivative,
)


class TestGridSpec:
    def test_spacing_positive(self):
        g = GridSpec(1, -20.0, 40.0, 256)
        assert g.spacing == (40.0 / 256,)
        assert g.cell_volume > 0

    def test_rejects_tiny_grids(self):
        with pytest.raises(ValueError):
            GridSpec(1, 0.0, 1.0, 4)

    def test_rejects_nonpositive_extent(self):
        with pytest.raises(ValueError):
            GridSpec(1, 0.0, -1.0, 64)

    def test_axes_and_nodes(self):
        g = GridSpec.centered(2.0, 16, dim=2)
        assert g.nodes().shape == (16, 16, 2)
        assert g.axis(0)[0] == -2.0


class TestSample:
    def test_gaussian_values_at_nodes(self):
        g = GridSpec.centered(20.0, 256, dim=1)
        f = sample(Gaussian(0.0, 1.0), g)
        x = g.axis(0)
        np.testing.assert_allclose(f.values, np.exp(-x**2 / 2), rtol=0, atol=0)

    def test_support_overflow_raises(self):
        g = GridSpec(1, 1.0, 2.0, 64)  # box [1, 3] misses [-1/2, 1/2]
        with pytest.raises(SupportOverflowError):
            sample(CubeIndicator(0.0, 1.0), g)
        sample(CubeIndicator(0.0, 1.0), g, allow_overflow=True)

    def test_bump_max_is_lam_at_origin(self):
        g = GridSpec.centered(2.0, 128, dim=2)
        f = sample(BumpLambda(4.0), g)
        assert f.values.max() == pytest.approx(4.0, abs=0)


class TestIntegrate:
    def test_zero_field(self):
        g = GridSpec.centered(5.0, 64, dim=1)
        f = SampledField(g, np.zeros(64), "real")
        assert integrate(f) == 0.0

    def test_gaussian_mass(self):
        g = GridSpec.centered(20.0, 1024, dim=1)
        f = sample(Gaussian(0.0, 1.0), g)
        assert integrate(f) == pytest.approx(math.sqrt(2 * math.pi), abs=1e-10)

    def test_constant_is_exact(self):
        g = GridSpec(1, 0.0, 7.0, 128)
        f = SampledField(g, np.ones(128), "real")
        assert integrate(f) == pytest.approx(7.0, rel=1e-15)


class TestSpectralDerivative:
    def test_fourier_eigenfunction(self):
        g = GridSpec.centered(math.pi, 64, dim=1)
        k0 = g.wavenumbers(0)[3]
        x = g.axis(0)
        f = SampledField(g, np.exp(1j * k0 * x), "complex")
        df = spectral_derivative(f, 1)
        np.testing.assert_allclose(df.values, 1j * k0 * f.values, rtol=1e-12, atol=1e-12)

    def test_order_zero_is_identity(self):
        g = GridSpec.centered(8.0, 64, dim=1)
        f = sample(Gaussian(0.0, 1.0), g)
        assert spectral_derivative(f, 0) is f

    def test_gaussian_second_derivative(self):
        g = GridSpec.centered(20.0, 512, dim=1)
        f = sample(Gaussian(0.0, 1.0), g)
        d2 = spectral_derivative(f, 2)
        x = g.axis(0)
        mask = np.abs(x) <= 10.0
        exact = (x**2 - 1.0) * np.exp(-x**2 / 2)
        err = np.max(np.abs(d2.values[mask] - exact[mask])) / np.max(np.abs(exact))
        assert err < 1e-8

    def test_order_guard(self):
        g = GridSpec.centered(8.0, 64, dim=1)
        f = sample(Gaussian(0.0, 1.0), g)
        with pytest.raises(ValueError):
            spectral_derivative(f, 7)

    def test_composition(self):
        g = GridSpec.centered(15.0, 256, dim=1)
        f = sample(Gaussian(0.0, 1.5), g)
        once_twice = spectral_derivative(spectral_derivative(f, 1), 1)
        direct = spectral_derivative(f, 2)
        np.testing.assert_allclose(once_twice.values, direct.values, atol=1e-12)


def test_parseval():
    g = GridSpec.centered(15.0, 256, dim=1)
    f = sample(Gaussian(0.3, 1.2), g)
    phys = l2_norm(f)
    fhat = np.fft.fft(f.values)
    spec = math.sqrt(float(np.sum(np.abs(fhat) ** 2)) * g.cell_volume / 256)
    assert abs(phys - spec) <= 1e-12 * phys


def test_sample_then_integrate_matches_mass_oracle():
    datum = Gaussian(0.5, 1.3)
    g = GridSpec.centered(25.0, 512, dim=1)
    f = sample(datum, g)
    assert integrate(f) == pytest.approx(datum.mass(), rel=1e-9)


@pytest.mark.parametrize(
    "datum",
    [
        Gaussian(0.2, 0.8),
        Gaussian((0.1, -0.3), (1.0, 0.7)),
        Gaussian(0.0, 1.0, wavevector=(1.5,)),
        BumpLambda(2.0),
        product_gaussian_phase(0.9, 1.1, d=1),
    ],
)
def test_gradient_matches_finite_differences(datum):
    rng = np.random.default_rng(11)
    lo, hi = datum.support_bounds(1e-6)
    lo, hi = np.atleast_1d(lo), np.atleast_1d(hi)
    pts = rng.uniform(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo), size=(64, datum.ndim))
    try:
        scale = datum.feature_scale()
    except OracleUnavailable:
        scale = 1.0
    step = 1e-5 * scale
    grad = datum.gradient(pts)
    ref_scale = np.max(np.abs(grad))
    for ax in range(datum.ndim):
        shift = np.zeros(datum.ndim)
        shift[ax] = step
        fd = (datum.value(pts + shift) - datum.value(pts - shift)) / (2 * step)
        np.testing.assert_allclose(grad[..., ax], fd, atol=1e-6 * max(ref_scale, 1.0))


def test_bump_is_scaled_profile():
    lam = 3.0
    bump = BumpLambda(lam)
    unit = BumpLambda(1.0)
    rng = np.random.default_rng(5)
    pts = rng.uniform(-2.5 / lam, 2.5 / lam, size=(128, 2))
    np.testing.assert_allclose(bump.value(pts), lam * unit.value(lam * pts), atol=1e-14)


def test_bump_plateau_and_support():
    bump = BumpLambda(2.0)
    assert bump.value(np.array([[0.2, 0.3]]))[0] == 2.0  # inside radius 1/lam
    assert bump.value(np.array([[1.1, 0.0]]))[0] == 0.0  # outside radius 2/lam


def test_cube_has_no_gradient_oracle():
    with pytest.raises(OracleUnavailable):
        CubeIndicator(0.0, 1.0).gradient(np.zeros((1, 1)))


def test_product_gaussian_phase_factors():
    datum = product_gaussian_phase(0.5, 1.5, d=2)
    assert datum.ndim == 4
    pairs = datum.phase_pair_factors(2)
    assert len(pairs) == 2 and all(p.ndim == 2 for p in pairs)
    pt = np.array([0.3, -0.2, 0.7, 0.1])
    split = pairs[0].value(pt[[0, 2]]) * pairs[1].value(pt[[1, 3]])
    assert split == pytest.approx(float(datum.value(pt)), rel=1e-14)


def test_real_kind_rejects_complex_values():
    g = GridSpec.centered(5.0, 64, dim=1)
    with pytest.raises(ValueError):
        SampledField(g, np.full(64, 1.0 + 1.0j), "real")


def test_field_values_immutable():
    g = GridSpec.centered(8.0, 64, dim=1)
    f = sample(Gaussian(0.0, 1.0), g)
    with pytest.raises(ValueError):
        f.values[0] = 3.0
