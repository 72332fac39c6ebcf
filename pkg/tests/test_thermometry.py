import math

import numpy as np
import pytest

from iontherm.errors import (
    InsufficientDataError,
    InvalidConfigError,
    MethodRangeError,
    UnconstrainedFitError,
    UndefinedRatioError,
)
from iontherm.oscillator import TruncationConfig, thermal_populations
from iontherm.spectrum import ProbePulse, SidebandSpectrum, carrier_flop_curve, sideband_envelope, synthesize_measurement
from iontherm.thermometry import (
    HeatingSeries,
    bootstrap_envelope_sigma,
    dynamic_heating_difference,
    fit_envelope,
    fit_heating_rate,
    fit_rabi_decoherence,
    fit_sideband_ratio,
)

ETA = 0.072
HALF_PI = 1.5707963267948966


def clean_spectrum(nbar, theta=HALF_PI, max_order=4, shots=500, eta=ETA):
    state = thermal_populations(nbar)
    spec = sideband_envelope(state, eta, ProbePulse(1.0, theta), max_order)
    return SidebandSpectrum(
        max_order=max_order,
        amplitudes=spec.amplitudes,
        shots=np.full(2 * max_order + 1, shots),
    )


class TestSidebandRatio:
    @pytest.mark.parametrize("r,nbar", [(0.5, 1.0), (0.75, 3.0)])
    def test_algebraic_inversion(self, r, nbar):
        fit = fit_sideband_ratio(0.4 * r, 0.4, 500, 500)
        assert fit.nbar == pytest.approx(nbar, rel=1e-12)
        assert fit.method == "ratio"

    def test_zero_red_gives_ground_state(self):
        fit = fit_sideband_ratio(0.0, 0.3, 500, 500)
        assert fit.nbar == 0.0

    def test_hot_ion_out_of_range(self):
        with pytest.raises(MethodRangeError):
            fit_sideband_ratio(0.5, 0.4, 100, 100)

    def test_zero_blue_undefined(self):
        with pytest.raises(UndefinedRatioError):
            fit_sideband_ratio(0.1, 0.0, 100, 100)

    def test_uncertainty_scales_with_shots(self):
        few = fit_sideband_ratio(0.2, 0.4, 100, 100)
        many = fit_sideband_ratio(0.2, 0.4, 10000, 10000)
        assert many.nbar_uncertainty < few.nbar_uncertainty
        assert many.nbar_uncertainty == pytest.approx(few.nbar_uncertainty / 10, rel=1e-9)


class TestEnvelopeFit:
    def test_noise_free_reference_scale(self):
        fit = fit_envelope(clean_spectrum(2.2), ETA)
        assert abs(fit.nbar - 2.2) / 2.2 < 0.01
        assert fit.chi_square < 1e-10
        assert fit.base_rabi_times_t == pytest.approx(HALF_PI, rel=1e-3)

    def test_ground_state_pins_to_zero(self):
        fit = fit_envelope(clean_spectrum(0.0), ETA)
        assert fit.nbar < 0.05

    @pytest.mark.parametrize("nbar", [0.5, 2.2, 10.0, 75.0, 235.0, 500.0])
    @pytest.mark.parametrize("eta", [0.05, 0.072, 0.15])
    def test_noise_free_round_trip_grid(self, nbar, eta):
        fit = fit_envelope(clean_spectrum(nbar, eta=eta), eta)
        assert abs(fit.nbar - nbar) / nbar < 0.01

    def test_monotone_in_true_nbar(self):
        fitted = [
            fit_envelope(clean_spectrum(nbar), ETA).nbar
            for nbar in (0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 235.0, 400.0)
        ]
        assert all(b > a for a, b in zip(fitted, fitted[1:]))

    def test_noisy_recovery_with_uncertainty(self):
        clean = sideband_envelope(thermal_populations(75.0), ETA, ProbePulse(1.0, HALF_PI), 4)
        noisy = synthesize_measurement(clean, 500, 7)
        fit = fit_envelope(noisy, ETA)
        assert abs(fit.nbar - 75.0) <= 3.0 * fit.nbar_uncertainty
        # Reported uncertainty at the hot-run scale is order-comparable to
        # the published +-1.6.
        assert 0.16 <= fit.nbar_uncertainty <= 16.0
        assert fit.aux["seed"] == 7

    def test_degenerate_spectrum_rejected(self):
        flat = SidebandSpectrum(
            max_order=4, amplitudes=np.full(9, 0.5), shots=np.full(9, 500)
        )
        with pytest.raises(UnconstrainedFitError):
            fit_envelope(flat, ETA)

    def test_shots_required(self):
        spec = sideband_envelope(thermal_populations(1.0), ETA, ProbePulse(1.0, 1.0), 4)
        with pytest.raises(InvalidConfigError):
            fit_envelope(spec, ETA)

    def test_agrees_with_ratio_method_when_cold(self):
        for nbar, seed in ((0.5, 7), (3.0, 8), (5.0, 8)):
            clean = sideband_envelope(thermal_populations(nbar), ETA, ProbePulse(1.0, 5.0), 4)
            noisy = synthesize_measurement(clean, 500, seed)
            env = fit_envelope(noisy, ETA)
            rat = fit_sideband_ratio(noisy.amplitude(-1), noisy.amplitude(1), 500, 500)
            joint = math.hypot(env.nbar_uncertainty, rat.nbar_uncertainty)
            assert abs(env.nbar - rat.nbar) <= 2.0 * joint

    def test_estimator_calibration(self):
        # Spread of fitted values over seeded replicas stays within a factor
        # two of the reported profile uncertainty.
        clean = sideband_envelope(thermal_populations(5.0), ETA, ProbePulse(1.0, HALF_PI), 4)
        trunc = TruncationConfig(400)
        fitted, sigmas = [], []
        for seed in range(200):
            noisy = synthesize_measurement(clean, 300, seed)
            fit = fit_envelope(noisy, ETA, trunc=trunc)
            fitted.append(fit.nbar)
            sigmas.append(fit.nbar_uncertainty)
        spread = np.std(fitted, ddof=1)
        typical_sigma = np.median(sigmas)
        assert 0.5 <= spread / typical_sigma <= 2.0

    def test_displaced_model_on_thermal_data(self):
        trunc = TruncationConfig(512)
        fit = fit_envelope(
            clean_spectrum(10.0, theta=4.0), ETA, model="displaced_thermal", trunc=trunc
        )
        assert fit.alpha is not None
        assert fit.alpha**2 < 1.0
        assert abs(fit.nbar + fit.alpha**2 - 10.0) / 10.0 < 0.05

    def test_displaced_state_round_trip(self):
        from iontherm.oscillator import displaced_thermal_populations

        trunc = TruncationConfig(512)
        state = displaced_thermal_populations(2.0, 1.5, trunc)
        clean = sideband_envelope(state, ETA, ProbePulse(1.0, 4.0), 4)
        spec = SidebandSpectrum(
            max_order=4, amplitudes=clean.amplitudes, shots=np.full(9, 500)
        )
        fit = fit_envelope(spec, ETA, model="displaced_thermal", trunc=trunc)
        # The envelope pins the total mean tightly; the thermal/coherent
        # split is softer.
        total = fit.nbar + fit.alpha**2
        assert total == pytest.approx(2.0 + 1.5**2, rel=0.02)
        assert fit.alpha == pytest.approx(1.5, abs=0.25)

    def test_displaced_alpha_weakly_identified_but_bounded(self):
        # Per-seed fitted coherent fractions scatter; the median over a few
        # replicas stays below one quantum.
        trunc = TruncationConfig(512)
        clean = sideband_envelope(thermal_populations(6.0), ETA, ProbePulse(1.0, 3.0), 4)
        coherent = []
        for seed in (2, 3, 4, 5, 6):
            noisy = synthesize_measurement(clean, 2000, seed)
            fit = fit_envelope(noisy, ETA, model="displaced_thermal", trunc=trunc)
            coherent.append(fit.alpha**2)
        assert np.median(coherent) < 1.0

    def test_bootstrap_sigma_comparable_to_profile(self):
        clean = sideband_envelope(thermal_populations(5.0), ETA, ProbePulse(1.0, HALF_PI), 4)
        noisy = synthesize_measurement(clean, 500, 3)
        fit = fit_envelope(noisy, ETA)
        boot = bootstrap_envelope_sigma(noisy, ETA, replicas=40, seed=1)
        assert 0.3 <= boot / fit.nbar_uncertainty <= 3.0


class TestRabiDecoherenceFit:
    OMEGA0 = math.pi / 10e-6
    TIMES = np.linspace(0.0, 60e-6, 150)

    def curve(self, nbar, eta=ETA):
        return carrier_flop_curve(thermal_populations(nbar), eta, self.OMEGA0, self.TIMES)

    def test_noise_free_doppler_scale(self):
        fit = fit_rabi_decoherence(self.TIMES, self.curve(6.0), 500, ETA)
        assert abs(fit.nbar - 6.0) / 6.0 < 0.02
        assert fit.aux["omega0_rad_s"] == pytest.approx(self.OMEGA0, rel=1e-6)

    @pytest.mark.parametrize("nbar", [0.5, 2.2, 10.0, 75.0, 235.0, 500.0])
    @pytest.mark.parametrize("eta", [0.05, 0.072, 0.15])
    def test_noise_free_round_trip_grid(self, nbar, eta):
        fit = fit_rabi_decoherence(self.TIMES, self.curve(nbar, eta=eta), 500, eta)
        assert abs(fit.nbar - nbar) / nbar < 0.01

    def test_ground_state_undamped(self):
        fit = fit_rabi_decoherence(self.TIMES, self.curve(0.0), 500, ETA)
        assert fit.nbar < 0.05

    def test_noisy_recovery(self):
        noisy = synthesize_measurement(self.curve(30.0), 500, 11)
        fit = fit_rabi_decoherence(self.TIMES, noisy, 500, ETA)
        assert abs(fit.nbar - 30.0) <= 3.0 * fit.nbar_uncertainty

    def test_too_few_points_rejected(self):
        with pytest.raises(InsufficientDataError):
            fit_rabi_decoherence(self.TIMES[:8], self.curve(5.0)[:8], 500, ETA)

    def test_too_few_oscillations_rejected(self):
        times = np.linspace(0.0, 12e-6, 40)  # just over one flop
        probs = carrier_flop_curve(thermal_populations(1.0), ETA, self.OMEGA0, times)
        with pytest.raises(InsufficientDataError):
            fit_rabi_decoherence(times, probs, 500, ETA)

    def test_oscillation_count_reported(self):
        fit = fit_rabi_decoherence(self.TIMES, self.curve(2.0), 500, ETA)
        assert fit.aux["oscillations"] == pytest.approx(6.0, rel=1e-3)


class TestHeatingRate:
    def test_two_point_line(self):
        series = HeatingSeries(
            delays=np.array([0.0, 1.0]),
            nbars=np.array([1.0, 4.0]),
            uncertainties=np.array([0.1, 0.1]),
        )
        fit = fit_heating_rate(series)
        assert fit.slope == pytest.approx(3.0, rel=1e-12)
        assert fit.intercept == pytest.approx(1.0, rel=1e-12)
        assert fit.degrees_of_freedom == 0

    def test_noise_free_slope_recovery(self):
        delays = np.linspace(0.0, 6.0, 7)
        series = HeatingSeries(
            delays=delays,
            nbars=0.3 + 3.0 * delays,
            uncertainties=np.full(7, 0.2),
        )
        fit = fit_heating_rate(series)
        assert abs(fit.slope - 3.0) / 3.0 < 1e-3
        assert fit.chi_square < 1e-20

    def test_noisy_slope_within_three_sigma(self):
        rng = np.random.default_rng(9)
        delays = np.linspace(0.0, 6.0, 7)
        truth = 0.3 + 3.0 * delays
        series = HeatingSeries(
            delays=delays,
            nbars=truth + rng.normal(0.0, 0.25, delays.size),
            uncertainties=np.full(7, 0.25),
        )
        fit = fit_heating_rate(series)
        assert abs(fit.slope - 3.0) <= 3.0 * fit.slope_uncertainty

    def test_constant_series_zero_slope(self):
        series = HeatingSeries(
            delays=np.array([0.0, 1.0, 2.0, 3.0]),
            nbars=np.full(4, 5.0),
            uncertainties=np.full(4, 0.3),
        )
        fit = fit_heating_rate(series)
        assert abs(fit.slope) <= fit.slope_uncertainty

    def test_too_short_series_rejected(self):
        with pytest.raises(InsufficientDataError):
            HeatingSeries(
                delays=np.array([1.0]), nbars=np.array([1.0]), uncertainties=np.array([0.1])
            )

    def test_weighted_fit_prefers_precise_points(self):
        series = HeatingSeries(
            delays=np.array([0.0, 1.0, 2.0]),
            nbars=np.array([0.0, 3.0, 20.0]),
            uncertainties=np.array([1e-3, 1e-3, 10.0]),
        )
        fit = fit_heating_rate(series)
        assert fit.slope == pytest.approx(3.0, rel=1e-3)


class TestDynamicHeatingDifference:
    def ratio_like(self, nbar, sigma):
        return fit_sideband_ratio(0.0, 0.5, 100, 100).__class__(
            nbar=nbar,
            nbar_uncertainty=sigma,
            method="envelope",
            chi_square=0.0,
            degrees_of_freedom=1,
        )

    def test_identical_fits(self):
        a = self.ratio_like(5.0, 0.3)
        diff = dynamic_heating_difference(a, a)
        assert diff.delta_nbar == 0.0
        assert diff.uncertainty == pytest.approx(0.3 * math.sqrt(2.0), rel=1e-12)
        assert not diff.negative_flag

    def test_published_pair(self):
        transport = self.ratio_like(75.4, 1.6)
        reference = self.ratio_like(2.2, 0.4)
        diff = dynamic_heating_difference(transport, reference)
        assert diff.delta_nbar == pytest.approx(73.2, rel=1e-12)
        assert diff.uncertainty == pytest.approx(math.hypot(1.6, 0.4), rel=1e-12)
        assert round(diff.uncertainty, 2) == 1.65

    def test_negative_difference_flagged(self):
        diff = dynamic_heating_difference(self.ratio_like(1.0, 0.2), self.ratio_like(2.0, 0.2))
        assert diff.delta_nbar == pytest.approx(-1.0)
        assert diff.negative_flag
