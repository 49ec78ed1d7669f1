"""Loss functions, inverses, and PLD densities for the three subsampling schemes.

Expected values come from the closed forms evaluated independently inline, or
from quadrature checks on explicit grids.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpconv import (
    Direction,
    DomainError,
    MechanismSpec,
    Scheme,
    loss_inverse_poisson,
    loss_inverse_with_replacement,
    loss_inverse_without_replacement,
    loss_poisson,
    loss_with_replacement,
    loss_without_replacement,
    pld_density,
    pld_density_poisson,
    pld_density_with_replacement,
    pld_density_without_replacement,
)
from dpconv.discretization import Grid, discretize

POISSON = MechanismSpec(sigma=1.5, q=0.01)
WOR = MechanismSpec(sigma=2.0, scheme=Scheme.WITHOUT_REPLACEMENT, q=0.1)
WR = MechanismSpec(sigma=2.0, scheme=Scheme.WITH_REPLACEMENT, batch_size=5, dataset_size=100)


def quadrature_mass(spec, half_width, size):
    grid = Grid(half_width=half_width, size=size)
    return grid.dx * discretize(spec, grid).samples.sum()


class TestSpecValidation:
    def test_rejects_nonpositive_sigma(self):
        with pytest.raises(DomainError):
            MechanismSpec(sigma=0.0, q=0.01)

    def test_rejects_q_out_of_range(self):
        with pytest.raises(DomainError):
            MechanismSpec(sigma=1.0, q=0.0)
        with pytest.raises(DomainError):
            MechanismSpec(sigma=1.0, q=1.5)

    def test_accepts_q_one(self):
        # q=1 is the degenerate non-subsampled Gaussian, kept for cross-checks.
        MechanismSpec(sigma=1.0, q=1.0)

    def test_with_replacement_needs_batch_and_dataset(self):
        with pytest.raises(DomainError):
            MechanismSpec(sigma=1.0, scheme=Scheme.WITH_REPLACEMENT, q=0.1)
        with pytest.raises(DomainError):
            MechanismSpec(sigma=1.0, scheme=Scheme.WITH_REPLACEMENT, batch_size=5)
        with pytest.raises(DomainError):
            MechanismSpec(
                sigma=1.0, scheme=Scheme.WITH_REPLACEMENT, batch_size=11, dataset_size=10
            )

    def test_draw_probability(self):
        assert WR.draw_probability == 0.01


class TestPoissonLossInverse:
    def test_unit_log_ratio_point(self):
        # e^0 - (1-q) = q, so the log vanishes and only the +1/2 remains.
        spec = MechanismSpec(sigma=2.0, q=0.3)
        assert loss_inverse_poisson(spec, 0.0) == pytest.approx(0.5, abs=1e-15)

    def test_degenerate_q_one_is_affine(self):
        spec = MechanismSpec(sigma=1.5, q=1.0)
        assert loss_inverse_poisson(spec, 2.0) == pytest.approx(5.0, abs=1e-12)

    def test_forward_evaluation_round_trip(self):
        t = loss_inverse_poisson(POISSON, 1.0)
        s = math.log(
            0.01 * math.exp((2.0 * t - 1.0) / (2.0 * 1.5 ** 2)) + 0.99
        )
        assert abs(s - 1.0) <= 1e-12

    def test_domain_error_at_and_below_edge(self):
        edge = math.log(1.0 - 0.01)
        with pytest.raises(DomainError):
            loss_inverse_poisson(POISSON, edge)
        with pytest.raises(DomainError):
            loss_inverse_poisson(POISSON, edge - 0.5)

    @given(st.floats(min_value=-4.0, max_value=8.0))
    @settings(max_examples=200, deadline=None)
    def test_round_trip_property(self, s):
        if s <= math.log(1.0 - 0.01):
            return
        t = loss_inverse_poisson(POISSON, s)
        assert abs(loss_poisson(POISSON, t) - s) <= 1e-10

    def test_strictly_increasing(self):
        s = np.linspace(math.log(0.99) + 1e-6, 10.0, 500)
        t = loss_inverse_poisson(POISSON, s)
        assert np.all(np.diff(t) > 0)


class TestPoissonDensity:
    def test_zero_below_support(self):
        s = math.log(1.0 - 0.01) - 0.1
        assert pld_density_poisson(POISSON, s) == 0.0

    def test_zero_at_support_edge(self):
        assert pld_density_poisson(POISSON, math.log(1.0 - 0.01)) == 0.0

    def test_dual_relation_pointwise(self):
        assert pld_density_poisson(POISSON, 0.2) == pytest.approx(
            math.exp(0.2) * pld_density_poisson(POISSON.with_direction(Direction.Y_OVER_X), -0.2),
            rel=1e-12,
        )

    def test_dual_relation_sampled(self):
        rng = np.random.default_rng(11)
        s = rng.uniform(math.log(0.99) + 1e-3, 8.0, size=1000)
        fwd = pld_density_poisson(POISSON, s)
        mirrored = pld_density_poisson(POISSON.with_direction(Direction.Y_OVER_X), -s)
        np.testing.assert_allclose(fwd, np.exp(s) * mirrored, rtol=1e-12)

    def test_normalisation(self):
        assert quadrature_mass(POISSON, 12.0, 10 ** 6) == pytest.approx(1.0, abs=1e-8)

    def test_normalisation_reverse_direction(self):
        spec = POISSON.with_direction(Direction.Y_OVER_X)
        assert quadrature_mass(spec, 12.0, 10 ** 6) == pytest.approx(1.0, abs=1e-8)


class TestWithoutReplacement:
    def test_inverse_at_zero(self):
        assert loss_inverse_without_replacement(WOR, 0.0) == pytest.approx(0.0, abs=1e-14)

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        s = rng.uniform(-6.0, 6.0, size=1000)
        t = loss_inverse_without_replacement(WOR, s)
        np.testing.assert_allclose(loss_without_replacement(WOR, t), s, atol=1e-10)

    def test_strictly_increasing(self):
        s = np.linspace(-8.0, 8.0, 2000)
        assert np.all(np.diff(loss_inverse_without_replacement(WOR, s)) > 0)

    def test_self_dual(self):
        s = 0.3
        assert pld_density_without_replacement(WOR, s) == pytest.approx(
            math.exp(s) * pld_density_without_replacement(WOR, -s), rel=1e-12
        )

    def test_normalisation(self):
        assert quadrature_mass(WOR, 15.0, 10 ** 6) == pytest.approx(1.0, abs=1e-8)


class TestWithReplacement:
    def test_root_at_zero(self):
        assert loss_inverse_with_replacement(WR, 0.0) == pytest.approx(0.0, abs=1e-12)

    def test_round_trip(self):
        rng = np.random.default_rng(5)
        s = rng.uniform(-5.0, 5.0, size=500)
        t = loss_inverse_with_replacement(WR, s)
        np.testing.assert_allclose(loss_with_replacement(WR, t), s, atol=1e-10)

    def test_strictly_increasing(self):
        s = np.linspace(-6.0, 6.0, 800)
        assert np.all(np.diff(loss_inverse_with_replacement(WR, s)) > 0)

    def test_self_dual(self):
        s = 0.4
        assert pld_density_with_replacement(WR, s) == pytest.approx(
            math.exp(s) * pld_density_with_replacement(WR, -s), rel=1e-12
        )

    def test_single_draw_matches_without_replacement(self):
        single = MechanismSpec(
            sigma=2.0, scheme=Scheme.WITH_REPLACEMENT, batch_size=1, dataset_size=100
        )
        reference = MechanismSpec(sigma=2.0, scheme=Scheme.WITHOUT_REPLACEMENT, q=0.01)
        s = np.linspace(-5.0, 5.0, 401)
        got = pld_density_with_replacement(single, s)
        want = pld_density_without_replacement(reference, s)
        assert np.max(np.abs(got - want)) <= 1e-10

    def test_normalisation(self):
        assert quadrature_mass(WR, 20.0, 10 ** 6) == pytest.approx(1.0, abs=1e-7)


def test_pld_density_dispatch():
    density = pld_density(POISSON)
    assert density.support_lo == pytest.approx(math.log(0.99))
    assert density(0.3) == pytest.approx(pld_density_poisson(POISSON, 0.3), rel=1e-15)
    assert math.isinf(pld_density(WOR).support_lo)
