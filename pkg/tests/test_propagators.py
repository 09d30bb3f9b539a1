"""Fourier-multiplier propagators: oracles, unitarity, wrap-around guard."""

import math

import numpy as np
import pytest

from decaylab.fields import Gaussian, GridSpec, SampledField, l2_norm, sample
from decaylab.norms import hs_norm
from decaylab import propagators as pr


def complex_sample(datum, grid):
    f = sample(datum, grid)
    return f.with_values(f.values.astype(np.complex128), "complex")


@pytest.fixture(scope="module")
def schrodinger_gaussian():
    grid = GridSpec.centered(400.0, 4096, dim=1)
    return complex_sample(Gaussian(0.0, 1.0), grid)


class TestPropagate:
    def test_time_zero_is_identity(self, schrodinger_gaussian):
        out = pr.propagate(schrodinger_gaussian, pr.schrodinger(), 0.0)
        np.testing.assert_allclose(out.values, schrodinger_gaussian.values, atol=1e-14)

    @pytest.mark.parametrize("t", [1.0, 5.0, 25.0])
    def test_gaussian_amplitude_oracle(self, schrodinger_gaussian, t):
        # |u(t,x)| = (1+4t^2)^(-1/4) exp(-x^2/(2(1+4t^2))) for exp(-x^2/2) data
        ut = pr.propagate(schrodinger_gaussian, pr.schrodinger(), t)
        x = schrodinger_gaussian.grid.axis(0)
        i0 = int(np.argmin(np.abs(x)))
        assert abs(ut.values[i0]) == pytest.approx((1 + 4 * t * t) ** -0.25, rel=1e-8)
        probe = np.abs(x) < 20.0
        oracle = (1 + 4 * t * t) ** -0.25 * np.exp(-(x[probe] ** 2) / (2 * (1 + 4 * t * t)))
        np.testing.assert_allclose(np.abs(ut.values[probe]), oracle, rtol=1e-8, atol=1e-13)

    def test_airy_matches_quadrature_oracle(self):
        # independent oracle: direct trapezoid of the inverse-Fourier integral
        # with a 10x oversampled, wide frequency band
        datum = Gaussian(0.0, 1.0)
        grid = pr.plan_grid(datum, pr.airy(), 1.0)
        u0 = sample(datum, grid)
        ut = pr.propagate(u0, pr.airy(), 1.0)
        xi = np.linspace(-40.0, 40.0, 80001)
        dxi = xi[1] - xi[0]
        hat = math.sqrt(2 * math.pi) * np.exp(-(xi**2) / 2.0)
        x = grid.axis(0)
        idx = np.nonzero(np.abs(x) <= 25.0)[0][::32]
        oracle = np.array(
            [np.sum(hat * np.exp(1j * (x[i] * xi - xi**3))) * dxi / (2 * math.pi) for i in idx]
        )
        scale = np.max(np.abs(oracle))
        assert np.max(np.abs(ut.values[idx] - oracle.real)) <= 1e-7 * scale

    def test_airy_keeps_real_data_real(self):
        grid = GridSpec.centered(300.0, 4096, dim=1)
        u0 = sample(Gaussian(0.0, 1.0), grid)
        ut = pr.propagate(u0, pr.airy(), 2.0)
        assert ut.kind == "real"

    def test_airy_needs_one_dimension(self):
        grid = GridSpec.centered(30.0, 64, dim=2)
        u0 = complex_sample(Gaussian((0.0, 0.0), (1.0, 1.0)), grid)
        with pytest.raises(ValueError):
            pr.propagate(u0, pr.airy(), 1.0)


class TestGroupProperty:
    def test_zero_times(self, schrodinger_gaussian):
        res = pr.group_property_check(schrodinger_gaussian, pr.schrodinger(), 0.0, 0.0)
        assert res <= 1e-14  # two FFT round trips of round-off

    def test_composition(self, schrodinger_gaussian):
        res = pr.group_property_check(schrodinger_gaussian, pr.schrodinger(), 0.3, 0.7)
        assert res <= 1e-12

    def test_time_reversibility(self, schrodinger_gaussian):
        res = pr.group_property_check(schrodinger_gaussian, pr.schrodinger(), 1.0, -1.0)
        assert res <= 1e-12


class TestConservation:
    @pytest.mark.parametrize("t", [0.5, 3.0, 17.0])
    def test_unitarity(self, schrodinger_gaussian, t):
        ut = pr.propagate(schrodinger_gaussian, pr.schrodinger(), t)
        assert l2_norm(ut) == pytest.approx(l2_norm(schrodinger_gaussian), rel=1e-12)

    @pytest.mark.parametrize("s", [0.25, 0.5, 1.0])
    def test_sobolev_norms_constant(self, schrodinger_gaussian, s):
        ref = hs_norm(schrodinger_gaussian, s).value
        for t in (1.0, 5.0, 20.0):
            ut = pr.propagate(schrodinger_gaussian, pr.schrodinger(), t)
            assert hs_norm(ut, s).value == pytest.approx(ref, rel=1e-12)


class TestWrapGuard:
    def test_clean_field_has_tiny_edge_mass(self, schrodinger_gaussian):
        assert pr.edge_mass_fraction(schrodinger_gaussian) < 1e-12

    def test_wrapped_field_is_flagged(self):
        grid = GridSpec.centered(20.0, 512, dim=1)
        u0 = complex_sample(Gaussian(0.0, 1.0), grid)
        ut = pr.propagate(u0, pr.schrodinger(), 10.0)  # travel >> box
        assert pr.edge_mass_fraction(ut) > 1e-6


class TestPlanGrid:
    def test_grid_confines_propagation(self):
        datum = Gaussian(0.0, 1.0)
        t_max = 4.0
        grid = pr.plan_grid(datum, pr.schrodinger(), t_max)
        u0 = complex_sample(datum, grid)
        ut = pr.propagate(u0, pr.schrodinger(), t_max)
        assert pr.edge_mass_fraction(ut) < 1e-10

    def test_points_power_of_two(self):
        grid = pr.plan_grid(Gaussian(0.0, 1.0), pr.airy(), 2.0)
        n = grid.points[0]
        assert n & (n - 1) == 0


def test_even_order_symbol_signs():
    # degree 2k symbol is i(-1)^k xi^(2k)
    assert pr.even_order(1).monomial_coefficient == -1j
    assert pr.even_order(2).monomial_coefficient == 1j
    with pytest.raises(ValueError):
        pr.DispersionPolynomial("even_order", 3)


def test_normalization_guards():
    with pytest.raises(ValueError):
        pr.DispersionPolynomial("schrodinger", 3)
    with pytest.raises(ValueError):
        pr.DispersionPolynomial("airy", 2)
