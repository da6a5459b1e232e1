"""Radial heat-surrogate and convolution-bound tests."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hallmhd.splitting import (
    RadialSpectrum,
    beta_convolution_bound,
    heat_evolve,
    l2_norm_sq,
    log_radial_grid,
    low_freq_sup,
    power_profile,
    verify_splitting_decay,
)


@pytest.fixture
def radii():
    return log_radial_grid()


class TestRadialSpectrum:
    def test_validation(self, radii):
        with pytest.raises(ValueError, match="increasing"):
            RadialSpectrum(radii[::-1], np.ones_like(radii))
        with pytest.raises(ValueError, match=">= 0"):
            RadialSpectrum(radii, -np.ones_like(radii))
        with pytest.raises(ValueError, match="matching"):
            RadialSpectrum(radii, np.ones(3))

    def test_log_grid_defaults(self, radii):
        assert radii[0] == pytest.approx(1e-4)
        assert radii[-1] == pytest.approx(1e2)
        assert len(radii) == 8192


class TestLowFreqSup:
    def test_gaussian_sigma_one(self, radii):
        spec = RadialSpectrum(radii, np.exp(-radii ** 2))
        # max of r exp(-r^2) on (0, 1] at r = 1/sqrt(2)
        want = math.exp(-0.5) / math.sqrt(2.0)
        assert low_freq_sup(spec, 1.0) == pytest.approx(want, abs=1e-6)

    def test_flat_amplitude_sigma_zero(self, radii):
        spec = RadialSpectrum(radii, np.full_like(radii, 0.37))
        assert low_freq_sup(spec, 0.0) == pytest.approx(0.37)

    def test_power_profile_saturates_at_one(self, radii):
        for sigma in (-1.0, 0.0, 1.0):
            spec = power_profile(sigma, radii)
            assert low_freq_sup(spec, sigma) == pytest.approx(1.0)

    def test_sigma_range(self, radii):
        spec = RadialSpectrum(radii, np.ones_like(radii))
        with pytest.raises(ValueError):
            low_freq_sup(spec, 1.5)
        with pytest.raises(ValueError):
            low_freq_sup(spec, -1.1)

    def test_empty_low_band_rejected(self):
        r = np.geomspace(2.0, 10.0, 50)
        spec = RadialSpectrum(r, np.ones_like(r))
        with pytest.raises(ValueError, match="radius <= 1"):
            low_freq_sup(spec, 0.0)


class TestHeatEvolve:
    def test_identity_at_zero_time(self, radii):
        spec = RadialSpectrum(radii, np.exp(-radii))
        out = heat_evolve(spec, 1.0, 0.0)
        assert np.array_equal(out.amplitude, spec.amplitude)

    def test_semigroup_property(self, radii):
        spec = RadialSpectrum(radii, 1.0 / (1.0 + radii ** 2))
        a = heat_evolve(heat_evolve(spec, 0.3, 0.7), 0.3, 1.1)
        b = heat_evolve(spec, 0.3, 1.8)
        assert np.max(np.abs(a.amplitude - b.amplitude)) <= 1e-14 * np.max(
            b.amplitude)

    def test_single_radius_scalar_decay(self):
        r = np.array([0.5, 1.0, 2.0])
        spec = RadialSpectrum(r, np.array([0.0, 3.0, 0.0]))
        out = heat_evolve(spec, 0.4, 2.0)
        assert out.amplitude[1] == pytest.approx(3.0 * math.exp(-0.8))

    def test_strictly_decreases_l2(self, radii):
        spec = RadialSpectrum(radii, np.exp(-radii ** 2))
        assert l2_norm_sq(heat_evolve(spec, 1.0, 0.5)) < l2_norm_sq(spec)

    def test_low_freq_sup_never_increases(self, radii):
        spec = power_profile(0.5, radii)
        before = low_freq_sup(spec, 0.5)
        after = low_freq_sup(heat_evolve(spec, 1.0, 3.0), 0.5)
        assert after <= before


class TestL2NormSq:
    def test_ball_profile(self, radii):
        spec = RadialSpectrum(radii, (radii <= 1.0).astype(float))
        # trapezoid across the jump at r = 1 limits the accuracy here
        assert l2_norm_sq(spec) == pytest.approx(4 * math.pi / 3, rel=5e-3)

    def test_gaussian_closed_form(self, radii):
        spec = RadialSpectrum(radii, np.exp(-radii ** 2))
        want = math.pi ** 1.5 / (2 * math.sqrt(2.0))
        assert l2_norm_sq(spec) == pytest.approx(want, rel=1e-6)

    def test_node_doubling_self_convergence(self):
        vals = {}
        for nodes in (8192, 16384):
            r = log_radial_grid(nodes=nodes)
            vals[nodes] = l2_norm_sq(RadialSpectrum(r, np.exp(-r ** 2)))
        change = abs(vals[16384] - vals[8192]) / vals[8192]
        assert change < 1e-6


class TestDecayExponents:
    @pytest.mark.parametrize("sigma", [-1.0, -0.5, 0.0, 0.5, 1.0])
    def test_matches_expected_rate(self, sigma):
        fit = verify_splitting_decay(sigma)
        assert fit.exponent == pytest.approx(-(1.5 - sigma), abs=0.05)

    def test_sigma_out_of_range(self):
        with pytest.raises(ValueError):
            verify_splitting_decay(1.5)
        with pytest.raises(ValueError):
            verify_splitting_decay(-1.2)

    def test_viscosity_only_shifts_transient(self):
        fast = verify_splitting_decay(0.0, nu=2.0)
        slow = verify_splitting_decay(0.0, nu=1.0)
        assert fast.exponent == pytest.approx(slow.exponent, abs=5e-3)


class TestBetaBound:
    def test_classical_half_half(self):
        assert beta_convolution_bound(0.5, 0.5) == pytest.approx(math.pi,
                                                                 abs=1e-8)

    def test_three_quarters(self):
        want = math.pi * math.sqrt(2.0)
        assert beta_convolution_bound(0.75, 0.25) == pytest.approx(want,
                                                                   abs=1e-8)

    @given(alpha=st.floats(0.05, 0.95))
    @settings(max_examples=25, deadline=None)
    def test_matches_reflection_formula_and_symmetry(self, alpha):
        beta = 1.0 - alpha
        val = beta_convolution_bound(alpha, beta)
        assert val == pytest.approx(math.pi / math.sin(math.pi * beta),
                                    rel=1e-9)
        assert beta_convolution_bound(beta, alpha) == pytest.approx(val,
                                                                    rel=1e-9)

    @pytest.mark.parametrize("a,b", [(0.0, 1.0), (1.0, 0.0), (-0.1, 1.1),
                                     (0.3, 0.3)])
    def test_domain_errors(self, a, b):
        with pytest.raises(ValueError):
            beta_convolution_bound(a, b)
