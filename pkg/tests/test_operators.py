"""Commuting-operator derivation, application, and conserved norms."""

import math
from dataclasses import dataclass

import numpy as np
import pytest

from decaylab.fields import Gaussian, GridSpec, SampledField, l2_norm, sample
from decaylab import operators as ops
from decaylab import propagators as pr


def complex_sample(datum, grid):
    f = sample(datum, grid)
    return f.with_values(f.values.astype(np.complex128), "complex")


@pytest.fixture(scope="module")
def packet_grid():
    return GridSpec.centered(1200.0, 4096, dim=1)


@pytest.fixture(scope="module")
def fine_grid():
    # resolves width-1 Gaussian data (band ~7.4) with room for t = 100 travel
    return GridSpec.centered(2500.0, 32768, dim=1)


class TestDerivation:
    def test_schrodinger_boost_coefficients(self):
        # 2t d_x + i x, up to overall scale
        op = ops.derive_commuting_operator(pr.schrodinger())
        assert op.degree == 2
        assert op.b / op.a == pytest.approx(1j / 2.0)

    def test_airy_operator(self):
        # 3t d_xx + x
        op = ops.derive_commuting_operator(pr.airy())
        assert (op.a, op.b) == (3.0 + 0.0j, 1.0 + 0.0j)

    @pytest.mark.parametrize("k,expected_b", [(1, -1j), (2, -1j)])
    def test_even_order_sign_is_derived(self, k, expected_b):
        op = ops.derive_commuting_operator(pr.even_order(k))
        assert op.a == 2.0 * k
        assert op.b == pytest.approx(expected_b)

    def test_inconsistent_symbol_raises(self):
        @dataclass
        class Broken:
            degree: int = 3
            monomial_coefficient: complex = 0.0

        with pytest.raises(ops.NoCommutingOperatorError):
            ops.derive_commuting_operator(Broken())


class TestApplyOperator:
    def test_airy_boost_at_time_zero_multiplies_by_x(self):
        grid = GridSpec.centered(30.0, 256, dim=1)
        u = complex_sample(Gaussian(0.0, 1.0), grid)
        w = ops.derive_commuting_operator(pr.airy())
        out = ops.apply_operator(w, u, 0.0)
        np.testing.assert_allclose(out.values, grid.axis(0) * u.values, atol=1e-14)

    def test_schrodinger_boost_at_time_zero(self):
        grid = GridSpec.centered(30.0, 256, dim=1)
        u = complex_sample(Gaussian(0.0, 1.0), grid)
        out = ops.apply_operator(ops.schrodinger_boost(0), u, 0.0)
        x = grid.axis(0)
        np.testing.assert_allclose(out.values, 0.5j * x * np.exp(-(x**2) / 2), atol=1e-14)

    def test_boosts_commute_pairwise_in_2d(self):
        grid = GridSpec.centered(60.0, 128, dim=2)
        rng = np.random.default_rng(2)
        u = ops.random_wave_packets(grid, rng)
        comm = ops.commutator_norm(ops.schrodinger_boost(0), ops.schrodinger_boost(1), u, 1.3)
        assert comm <= 1e-12 * l2_norm(u)


class TestCommutationResidual:
    def test_time_zero_is_exact(self, packet_grid):
        rng = np.random.default_rng(4)
        u0 = ops.random_wave_packets(packet_grid, rng)
        op = ops.derive_commuting_operator(pr.schrodinger())
        res, rel = ops.commutation_residual(op, pr.schrodinger(), u0, 0.0)
        assert rel and res <= 1e-12

    def test_gaussian_residual_small(self, fine_grid):
        u0 = complex_sample(Gaussian(0.0, 1.0), fine_grid)
        op = ops.derive_commuting_operator(pr.schrodinger())
        res, rel = ops.commutation_residual(op, pr.schrodinger(), u0, 1.0)
        assert rel and res <= 1e-10

    def test_wrong_operator_detected(self, fine_grid):
        # 2t d_x + 2i x does not commute: the residual must be visible
        u0 = complex_sample(Gaussian(0.0, 1.0), fine_grid)
        bad = ops.monomial_boost(2, 2.0, 2.0j)
        res, rel = ops.commutation_residual(bad, pr.schrodinger(), u0, 1.0)
        assert rel and res >= 0.1

    def test_zero_denominator_flagged(self, packet_grid):
        zero = SampledField(packet_grid, np.zeros(packet_grid.points[0], dtype=complex), "complex")
        op = ops.derive_commuting_operator(pr.airy())
        res, rel = ops.commutation_residual(op, pr.airy(), zero, 1.0)
        assert not rel and res == 0.0

    @pytest.mark.parametrize("disp", [pr.schrodinger(), pr.airy(), pr.even_order(2)])
    def test_random_suite_small(self, packet_grid, disp):
        rng = np.random.default_rng(17)
        op = ops.derive_commuting_operator(disp)
        for _ in range(3):
            u0 = ops.random_wave_packets(packet_grid, rng)
            for t in (0.1, 1.0, 10.0):
                res, rel = ops.commutation_residual(op, disp, u0, t)
                assert rel and res <= 1e-9


class TestConservedOperatorNorm:
    def test_order_zero_is_mass(self, fine_grid):
        u0 = complex_sample(Gaussian(0.0, 1.0), fine_grid)
        series = ops.conserved_operator_norm(u0, [], pr.schrodinger(), [0.0, 1.0, 5.0])
        np.testing.assert_allclose(series, l2_norm(u0), rtol=1e-12)

    def test_boost_norm_value_and_constancy(self, fine_grid):
        # || (i/2) x exp(-x^2/2) || = (1/2) (sqrt(pi)/2)^(1/2)
        u0 = complex_sample(Gaussian(0.0, 1.0), fine_grid)
        series = ops.conserved_operator_norm(
            u0, [(ops.schrodinger_boost(0), 1)], pr.schrodinger(), [0.0, 1.0, 5.0, 20.0]
        )
        expected = 0.5 * (math.sqrt(math.pi) / 2.0) ** 0.5
        assert series[0] == pytest.approx(expected, rel=1e-10)
        assert (series.max() - series.min()) / series[0] <= 1e-9

    def test_airy_boost_norm_equals_weighted_data_norm(self, fine_grid):
        # Airy group speeds reach 3 * band^2, so stop before the box edge
        u0 = complex_sample(Gaussian(0.0, 1.0), fine_grid)
        w = ops.derive_commuting_operator(pr.airy())
        series = ops.conserved_operator_norm(u0, [(w, 1)], pr.airy(), [0.0, 1.0, 5.0, 10.0])
        x = fine_grid.axis(0)
        xu0 = SampledField(fine_grid, x * u0.values, "complex")
        assert series[0] == pytest.approx(l2_norm(xu0), rel=1e-12)
        assert (series.max() - series.min()) / series[0] <= 1e-9

    def test_second_order_powers_constant(self, fine_grid):
        u0 = complex_sample(Gaussian(0.0, 1.0), fine_grid)
        series = ops.conserved_operator_norm(
            u0, [(ops.schrodinger_boost(0), 2)], pr.schrodinger(), [1.0, 10.0, 100.0]
        )
        assert (series.max() - series.min()) / series[0] <= 1e-9


def test_monomial_boost_needs_1d():
    grid = GridSpec.centered(30.0, 64, dim=2)
    u = complex_sample(Gaussian((0.0, 0.0), (1.0, 1.0)), grid)
    with pytest.raises(ValueError):
        ops.apply_operator(ops.monomial_boost(3, 3.0, 1.0), u, 0.5)
