import numpy as np
import pytest

from ghzsim import nonlocality
from ghzsim.circuit import ghz3_state, ghz4_state, ghz_mixture, NoiseParams
from ghzsim.qmath import expectation
from ghzsim.sampler import CountRecord, SamplerConfig, exact_record, sample_experiment

from oracles import dm, expectation_via_trace, ghz_ket, random_product_state

PC_CALIBRATED = 0.618  # signal_weight * coherence of the calibrated model


def exact_records(rho, settings, shots=1000):
    return [exact_record(rho, s, shots) for s in settings]


def avn_records(rho, shots=1000):
    return exact_records(rho, [spec.setting for spec in nonlocality.AVN_SPECS_4], shots)


class TestAvnEpsilon:
    def test_ideal_state_has_no_errors(self):
        rec = exact_record(dm(ghz_ket(4)), "XXXX")
        assert abs(nonlocality.avn_epsilon(rec, +1)) < 1e-12

    def test_calibrated_error_rate(self, calibrated_noise):
        rho = ghz4_state(calibrated_noise)
        for spec in nonlocality.AVN_SPECS_4:
            rec = exact_record(rho, spec.setting)
            eps = nonlocality.avn_epsilon(rec, spec.predicted_sign)
            assert abs(eps - (1 - PC_CALIBRATED) / 2) < 1e-12
            assert abs(eps - 0.191) < 1e-12

    def test_white_noise_is_random(self):
        rec = exact_record(np.eye(16) / 16, "YYXX")
        assert abs(nonlocality.avn_epsilon(rec, -1) - 0.5) < 1e-12

    def test_rejects_z_settings(self):
        rec = exact_record(dm(ghz_ket(4)), "ZZZZ")
        with pytest.raises(ValueError, match="only X and Y"):
            nonlocality.avn_epsilon(rec, +1)

    def test_wrong_fraction_equals_expectation_form(self, rng):
        # outcome-fraction route vs (1 - s<P>)/2 route, on exact probabilities
        from oracles import random_density_matrix

        rho = random_density_matrix(4, rng)
        for spec in nonlocality.AVN_SPECS_4:
            rec = exact_record(rho, spec.setting)
            eps = nonlocality.avn_epsilon(rec, spec.predicted_sign)
            via_expectation = (1 - spec.predicted_sign * expectation(rho, spec.setting)) / 2
            assert abs(eps - via_expectation) < 1e-12


class TestAvnSuite:
    def test_ideal_state_violates(self):
        suite = nonlocality.avn_suite(avn_records(dm(ghz_ket(4))), resamples=120)
        assert abs(suite.epsilon_mean.value) < 1e-12
        assert suite.violates_local_realism
        assert suite.bound == 0.25

    def test_white_noise_does_not_violate(self):
        suite = nonlocality.avn_suite(avn_records(np.eye(16) / 16), resamples=120)
        assert abs(suite.epsilon_mean.value - 0.5) < 1e-12
        assert not suite.violates_local_realism

    def test_sampled_calibrated_state(self, calibrated_noise):
        rho = ghz4_state(calibrated_noise)
        cfg = SamplerConfig(shots_per_setting=10**6, seed=13)
        records = sample_experiment(rho, [s.setting for s in nonlocality.AVN_SPECS_4], cfg)
        suite = nonlocality.avn_suite(records, resamples=300, seed=13)
        assert abs(suite.epsilon_mean.value - 0.191) <= 0.002
        assert suite.violates_local_realism
        assert suite.epsilon_mean.sigma < 0.001

    def test_missing_setting(self):
        with pytest.raises(ValueError, match="missing"):
            nonlocality.avn_suite(avn_records(dm(ghz_ket(4)))[:-1], resamples=120)

    def test_duplicate_setting(self):
        records = avn_records(dm(ghz_ket(4)))
        with pytest.raises(ValueError, match="duplicate"):
            nonlocality.avn_suite(records + [records[0]], resamples=120)

    def test_three_photon_specs(self, calibrated_noise):
        rho = ghz3_state(calibrated_noise)
        records = exact_records(rho, [s.setting for s in nonlocality.AVN_SPECS_3])
        suite = nonlocality.avn_suite(records, nonlocality.AVN_SPECS_3, resamples=120)
        assert abs(suite.epsilon_mean.value - 0.191) < 1e-12
        assert suite.violates_local_realism


class TestMermin:
    def test_ideal_phase_zero_reaches_eight(self):
        records = exact_records(dm(ghz_ket(4)), nonlocality.mermin_m4_settings())
        result = nonlocality.mermin_m4(records, resamples=120)
        assert abs(result.value.value - 8.0) < 1e-9

    def test_rotated_state_reaches_quantum_maximum(self):
        phase = 3 * np.pi / 4
        records = exact_records(dm(ghz_ket(4, phase)), nonlocality.mermin_m4_settings())
        result = nonlocality.mermin_m4(records, resamples=120, target_phase=phase)
        assert abs(result.value.value - 8 * np.sqrt(2)) < 1e-9
        assert result.target_phase == phase

    def test_calibrated_value_scales_with_pc(self, calibrated_noise):
        rho = ghz_mixture(
            4, calibrated_noise.signal_weight, calibrated_noise.coherence, 3 * np.pi / 4
        )
        records = exact_records(rho, nonlocality.mermin_m4_settings())
        result = nonlocality.mermin_m4(records, resamples=120)
        assert abs(result.value.value - PC_CALIBRATED * 8 * np.sqrt(2)) < 1e-9
        assert abs(result.value.value - 6.99) < 0.005

    def test_record_route_matches_trace_route(self, rng):
        from oracles import random_density_matrix

        rho = random_density_matrix(4, rng)
        records = exact_records(rho, nonlocality.mermin_m4_settings())
        via_records = nonlocality.mermin_m4(records, resamples=120).value.value
        coeffs = {s: nonlocality.MERMIN_COEFF_BY_Y_COUNT[s.count("Y")] for s in nonlocality.mermin_m4_settings()}
        via_trace = abs(sum(c * expectation_via_trace(rho, s) for s, c in coeffs.items()))
        assert abs(via_records - via_trace) < 1e-9

    def test_pc_scaling_invariant(self):
        phase = 3 * np.pi / 4
        for p in (0.4, 0.8, 1.0):
            for c in (0.3, 0.9):
                rho = ghz_mixture(4, p, c, phase)
                records = exact_records(rho, nonlocality.mermin_m4_settings())
                value = nonlocality.mermin_m4(records, resamples=120).value.value
                assert abs(value - p * c * 8 * np.sqrt(2)) < 1e-9

    def test_m3_ideal(self):
        records = exact_records(dm(ghz_ket(3)), nonlocality.mermin_m3_settings())
        result = nonlocality.mermin_m3(records, resamples=120)
        assert abs(result.value.value - 4.0) < 1e-9
        assert result.classical_bound == 2.0
        assert result.quantum_max == 4.0

    def test_m3_white_noise(self):
        records = exact_records(np.eye(8) / 8, nonlocality.mermin_m3_settings())
        assert abs(nonlocality.mermin_m3(records, resamples=120).value.value) < 1e-12

    def test_m3_calibrated(self, calibrated_noise):
        records = exact_records(ghz3_state(calibrated_noise), nonlocality.mermin_m3_settings())
        result = nonlocality.mermin_m3(records, resamples=120)
        assert abs(result.value.value - PC_CALIBRATED * 4) < 1e-9
        assert abs(result.value.value - 2.472) < 1e-9

    def test_sampled_violation_significance(self, calibrated_noise):
        rho = ghz_mixture(
            4, calibrated_noise.signal_weight, calibrated_noise.coherence, 3 * np.pi / 4
        )
        cfg = SamplerConfig(shots_per_setting=3000, seed=17)
        records = sample_experiment(rho, nonlocality.mermin_m4_settings(), cfg)
        result = nonlocality.mermin_m4(records, resamples=200, seed=17)
        assert result.value.value > result.classical_bound
        assert result.standard_deviations_of_violation > 5

    def test_missing_settings(self):
        records = exact_records(dm(ghz_ket(4)), nonlocality.mermin_m4_settings())[:10]
        with pytest.raises(ValueError, match="missing"):
            nonlocality.mermin_m4(records, resamples=120)


class TestWitness:
    def test_ideal_state_reaches_minus_one(self):
        records = exact_records(dm(ghz_ket(4)), ["XXXX", "ZZZZ"])
        value = nonlocality.witness_ghz4(records, resamples=120)
        assert abs(value.value + 1.0) < 1e-9

    def test_product_state_is_non_negative(self):
        records = exact_records(dm(np.eye(16, dtype=complex)[0]), ["XXXX", "ZZZZ"])
        value = nonlocality.witness_ghz4(records, resamples=120)
        assert abs(value.value) < 1e-9

    def test_calibrated_model_value(self, calibrated_noise):
        # closed form 2 - pc - 2(p + (1-p)/8), frozen from the matrix oracle
        p = calibrated_noise.signal_weight
        records = exact_records(ghz4_state(calibrated_noise), ["XXXX", "ZZZZ"])
        value = nonlocality.witness_ghz4(records, resamples=120)
        closed_form = 2.0 - PC_CALIBRATED - 2.0 * (p + (1.0 - p) / 8.0)
        assert abs(closed_form + 0.298) < 1e-9
        assert abs(value.value - closed_form) < 1e-9

    def test_non_negative_on_random_product_states(self, rng):
        for _ in range(100):
            rho = random_product_state(4, rng)
            records = exact_records(rho, ["XXXX", "ZZZZ"])
            value = nonlocality.witness_ghz4(records, resamples=100)
            assert value.value >= -1e-9

    def test_missing_setting(self):
        records = exact_records(dm(ghz_ket(4)), ["XXXX"])
        with pytest.raises(ValueError, match="missing"):
            nonlocality.witness_ghz4(records, resamples=120)


class TestCalibrate:
    def test_paper_point(self):
        fit = nonlocality.calibrate(0.729, 0.191)
        assert abs(fit.signal_weight - 0.8171) < 5e-5
        assert abs(fit.coherence - 0.7563) < 5e-5
        # verify by re-evaluating fidelity and error rate on the fitted state
        rho = ghz_mixture(4, fit.signal_weight, fit.coherence, 0.0)
        from ghzsim.qmath import fidelity_with_pure

        assert abs(fidelity_with_pure(rho, ghz_ket(4)) - 0.729) < 1e-12
        eps = (1 - expectation(rho, "XXXX")) / 2
        assert abs(eps - 0.191) < 1e-12

    def test_predictions_inside_measured_intervals(self):
        predictions = nonlocality.calibrate(0.729, 0.191).predictions
        assert abs(predictions.mermin_m4 - 6.98) <= 0.16
        assert abs(predictions.fidelity_3 - 0.742) <= 0.004
        assert abs(predictions.mermin_m3 - 2.50) <= 0.13
        assert predictions.epsilon_3 == 0.191

    def test_ideal_point(self):
        fit = nonlocality.calibrate(1.0 - 1e-12, 1e-13)
        assert abs(fit.signal_weight - 1.0) < 1e-9
        assert abs(fit.coherence - 1.0) < 1e-9

    def test_rejects_out_of_range_inputs(self):
        with pytest.raises(ValueError):
            nonlocality.calibrate(1.2, 0.2)
        with pytest.raises(ValueError):
            nonlocality.calibrate(0.7, 0.0)

    def test_unsolvable_region(self):
        with pytest.raises(ValueError, match="unit square"):
            nonlocality.calibrate(0.999, 0.49)


class TestClassicalBounds:
    def test_m4_exhaustive_maximum(self):
        assert nonlocality.local_realism_bound_m4() == 4.0

    def test_m3_exhaustive_maximum(self):
        assert nonlocality.local_realism_bound_m3() == 2.0


class TestContradiction:
    def test_even_symbols_with_negative_sign_product(self):
        all_even, sign_product = nonlocality.avn_contradiction()
        assert all_even
        assert sign_product == -1

    def test_spec_table_is_fixed(self):
        expected = {
            "XXXX": 1, "YYYY": 1, "XXYY": -1, "XYXY": -1,
            "XYYX": -1, "YXXY": -1, "YXYX": -1, "YYXX": -1,
        }
        assert {s.setting: s.predicted_sign for s in nonlocality.AVN_SPECS_4} == expected
