import math

import numpy as np
import pytest

from iontherm.constants import ATOMIC_MASS, HBAR
from iontherm.errors import (
    InvalidConfigError,
    InvalidTransitionError,
    TruncationInsufficientError,
)
from iontherm.oscillator import (
    MotionalState,
    OscillatorConfig,
    TruncationConfig,
    displaced_thermal_populations,
    displacement_matrix,
    displacement_overlap_oracle,
    displacement_population_map,
    lamb_dicke,
    sideband_rabi_frequency,
    sideband_rabi_ladder,
    thermal_populations,
)

from _oracles import geometric_mean_n, naive_rabi_ratio

CA40 = dict(
    ion_mass=39.9626,
    secular_frequency=1.738e6,
    probe_wavelength=729e-9,
    beam_projection=math.cos(math.radians(10.0)),
)


class TestLambDicke:
    def test_ca40_reference_value(self):
        # Independent recomputation from scratch, then against the module.
        cfg = OscillatorConfig(**CA40)
        omega = 2 * math.pi * 1.738e6
        ground_size = math.sqrt(HBAR / (2 * 39.9626 * ATOMIC_MASS * omega))
        expected = 2 * math.pi * math.cos(math.radians(10)) / 729e-9 * ground_size
        eta = lamb_dicke(cfg)
        assert eta == pytest.approx(expected, rel=1e-12)
        assert round(eta, 3) == 0.072

    def test_orthogonal_beam_couples_nothing(self):
        cfg = OscillatorConfig(**{**CA40, "beam_projection": 0.0})
        assert lamb_dicke(cfg) == 0.0

    def test_mass_scaling(self):
        eta1 = lamb_dicke(OscillatorConfig(**CA40))
        eta2 = lamb_dicke(OscillatorConfig(**{**CA40, "ion_mass": 2 * CA40["ion_mass"]}))
        assert eta2 == pytest.approx(eta1 / math.sqrt(2.0), rel=1e-12)

    @pytest.mark.parametrize("field", ["ion_mass", "secular_frequency", "probe_wavelength"])
    def test_nonpositive_fields_rejected(self, field):
        with pytest.raises(InvalidConfigError):
            OscillatorConfig(**{**CA40, field: 0.0})

    def test_projection_out_of_range(self):
        with pytest.raises(InvalidConfigError):
            OscillatorConfig(**{**CA40, "beam_projection": 1.2})


class TestSidebandRabi:
    def test_carrier_at_zero_eta(self):
        assert sideband_rabi_frequency(0, 0, 0.0, 1.0) == 1.0

    def test_first_excited_carrier(self):
        # Eq. with L_1(x) = 1 - x worked by hand.
        expected = math.exp(-0.005) * (1.0 - 0.01)
        assert sideband_rabi_frequency(1, 0, 0.1, 1.0) == pytest.approx(expected, rel=1e-12)
        assert sideband_rabi_frequency(1, 0, 0.1, 1.0) == pytest.approx(0.985062, abs=1e-6)

    def test_red_blue_symmetry(self):
        for n in (1, 2, 5, 17, 300):
            for k in (1, 2, 4):
                if n - k < 0:
                    continue
                red = sideband_rabi_frequency(n, -k, 0.11, 2.5)
                blue = sideband_rabi_frequency(n - k, +k, 0.11, 2.5)
                assert red == blue

    def test_below_ground_state_rejected(self):
        with pytest.raises(InvalidTransitionError):
            sideband_rabi_frequency(1, -2, 0.1, 1.0)

    @pytest.mark.parametrize("n", range(0, 21, 4))
    @pytest.mark.parametrize("m", [-2, -1, 0, 1, 2, 3])
    def test_log_space_matches_naive(self, n, m):
        if n + m < 0:
            return
        for eta in (0.05, 0.1, 0.3):
            got = sideband_rabi_frequency(n, m, eta, 1.0)
            want = naive_rabi_ratio(n, m, eta)
            assert got == pytest.approx(want, rel=1e-12)

    def test_ladder_matches_scalar(self):
        for m in (-3, -1, 0, 2, 5):
            ladder = sideband_rabi_ladder(m, 0.13, 400)
            for n in (0, 1, 7, 111, 400):
                if n + m < 0:
                    assert ladder[n] == 0.0
                else:
                    assert ladder[n] == pytest.approx(
                        sideband_rabi_frequency(n, m, 0.13, 1.0), rel=1e-12, abs=1e-300
                    )

    def test_large_n_finite(self):
        value = sideband_rabi_frequency(1000, 8, 0.3, 1.0)
        assert math.isfinite(value) and value >= 0

    def test_matches_displacement_oracle(self):
        trunc = TruncationConfig(400)
        for n in (0, 3, 20):
            for m in (-2, -1, 0, 1, 2):
                if n + m < 0:
                    continue
                got = sideband_rabi_frequency(n, m, 0.1, 1.0)
                want = displacement_overlap_oracle(n, m, 0.1, trunc)
                assert got == pytest.approx(want, rel=1e-9, abs=1e-12)


class TestThermalPopulations:
    def test_ground_state(self):
        state = thermal_populations(0.0)
        assert state.populations[0] == 1.0
        assert state.populations[1:].sum() == 0.0

    def test_nbar_one_geometric(self):
        state = thermal_populations(1.0, TruncationConfig(2000))
        assert state.populations[0] == pytest.approx(0.5, abs=1e-12)
        ratios = state.populations[1:10] / state.populations[0:9]
        assert np.allclose(ratios, 0.5, atol=1e-12)

    def test_normalization(self):
        for nbar in (0.0, 0.3, 7.0, 235.0):
            state = thermal_populations(nbar)
            assert abs(state.populations.sum() - 1.0) <= 1e-12

    def test_mean_matches_direct_sum(self):
        # Truncation-limited agreement with a plain-python oracle.
        state = thermal_populations(75.0, TruncationConfig(1500))
        want = geometric_mean_n(75.0, 1500)
        assert state.mean_n() == pytest.approx(want, rel=1e-12)
        assert state.mean_n() == pytest.approx(75.0, rel=1e-6)

    def test_mean_accuracy_vs_truncation(self):
        # At n_max=1000 the geometric tail above the ladder biases the mean
        # by ~2e-5 at nbar=75; a deeper ladder removes it.
        bias_1000 = abs(thermal_populations(75.0, TruncationConfig(1000)).mean_n() - 75) / 75
        bias_2000 = abs(thermal_populations(75.0, TruncationConfig(2000)).mean_n() - 75) / 75
        assert bias_1000 < 4e-5
        assert bias_2000 < 1e-9
        for nbar in (0.5, 5.0, 25.0, 55.0):
            state = thermal_populations(nbar, TruncationConfig(1000))
            assert abs(state.mean_n() - nbar) / nbar < 1e-6
        for nbar in (75.0, 100.0):
            state = thermal_populations(nbar, TruncationConfig(2000))
            assert abs(state.mean_n() - nbar) / nbar < 1e-6

    def test_negative_nbar_rejected(self):
        with pytest.raises(InvalidConfigError):
            thermal_populations(-0.1)


class TestDisplacedThermal:
    def test_zero_alpha_is_thermal(self):
        a = displaced_thermal_populations(5.0, 0.0).populations
        b = thermal_populations(5.0).populations
        assert np.max(np.abs(a - b)) <= 1e-12

    def test_ground_state_displacement_is_poisson(self):
        state = displaced_thermal_populations(0.0, 1.0)
        n = np.arange(state.populations.size)
        from scipy.special import gammaln

        poisson = np.exp(-1.0 - gammaln(n + 1.0))
        assert np.max(np.abs(state.populations - poisson)) <= 1e-8

    def test_mean_is_nbar_plus_alpha_squared(self):
        for nbar, alpha in ((5.0, 2.0), (0.5, 1.3), (12.0, 0.4)):
            state = displaced_thermal_populations(nbar, alpha)
            direct = sum(n * p for n, p in enumerate(state.populations))
            assert direct == pytest.approx(nbar + alpha * alpha, rel=1e-9)

    def test_truncation_leak_raises(self):
        with pytest.raises(TruncationInsufficientError):
            displaced_thermal_populations(75.0, 0.5, TruncationConfig(1000))
        with pytest.raises(TruncationInsufficientError):
            displaced_thermal_populations(1.0, 6.0, TruncationConfig(60))

    def test_spectral_map_matches_expm(self):
        for dim in (48, 257):
            for alpha in (0.0, 0.8, 2.5):
                d = displacement_matrix(alpha, dim)
                assert np.max(np.abs(d * d - displacement_population_map(alpha, dim))) <= 1e-12

    def test_negative_parameters_rejected(self):
        with pytest.raises(InvalidConfigError):
            displaced_thermal_populations(-1.0, 0.0)
        with pytest.raises(InvalidConfigError):
            displaced_thermal_populations(1.0, -0.5)


class TestDisplacementOracle:
    def test_identity(self):
        assert displacement_overlap_oracle(0, 0, 0.0, TruncationConfig(50)) == pytest.approx(
            1.0, abs=1e-14
        )

    def test_first_order_analytic(self):
        got = displacement_overlap_oracle(0, 1, 0.1, TruncationConfig(200))
        assert got == pytest.approx(0.1 * math.exp(-0.005), rel=1e-9)
        assert got == pytest.approx(0.0995, abs=1e-4)

    def test_guard_band(self):
        with pytest.raises(TruncationInsufficientError):
            displacement_overlap_oracle(95, 1, 0.1, TruncationConfig(100))


class TestMotionalState:
    def test_populations_immutable(self):
        state = thermal_populations(1.0, TruncationConfig(50))
        with pytest.raises(ValueError):
            state.populations[0] = 0.9

    def test_unnormalized_rejected(self):
        with pytest.raises(InvalidConfigError):
            MotionalState(kind="thermal", populations=np.array([0.5, 0.4]), nbar=1.0)

    def test_negative_population_rejected(self):
        with pytest.raises(InvalidConfigError):
            MotionalState(kind="thermal", populations=np.array([1.1, -0.1]), nbar=0.0)
