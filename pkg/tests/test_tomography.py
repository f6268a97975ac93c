import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ghzsim import tomography
from ghzsim.circuit import ghz4_state, ghz_mixture, NoiseParams
from ghzsim.qmath import fidelity_with_pure, hermiticity_defect
from ghzsim.sampler import SamplerConfig, exact_record, sample_experiment
from ghzsim.tomography import TomographySet, UncertainValue

from oracles import dm, ghz_ket, random_density_matrix, traced_density_matrix


def exact_set(rho, n, shots=1000):
    return TomographySet.from_records(
        [exact_record(rho, s, shots) for s in tomography.enumerate_settings(n)]
    )


def sampled_set(rho, n, shots, seed, tag=0):
    cfg = SamplerConfig(shots_per_setting=shots, seed=seed)
    return TomographySet.from_records(
        sample_experiment(rho, tomography.enumerate_settings(n), cfg, tag)
    )


class TestEnumerateSettings:
    def test_complete_sets(self):
        assert len(tomography.enumerate_settings(4)) == 81
        assert len(tomography.enumerate_settings(3)) == 27
        assert tomography.enumerate_settings(1) == ["X", "Y", "Z"]

    def test_lexicographic_order(self):
        settings_2 = tomography.enumerate_settings(2)
        assert settings_2[:4] == ["XX", "XY", "XZ", "YX"]
        assert settings_2 == sorted(settings_2)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            tomography.enumerate_settings(5)
        with pytest.raises(ValueError):
            tomography.enumerate_settings(0)


class TestTomographySet:
    def test_rejects_missing_setting(self):
        rho = dm(ghz_ket(2))
        records = [exact_record(rho, s) for s in ["XX", "XY", "XZ"]]
        with pytest.raises(ValueError, match="missing"):
            TomographySet(n=2, records=records)

    def test_rejects_duplicates(self):
        rho = dm(ghz_ket(2))
        records = [exact_record(rho, s) for s in tomography.enumerate_settings(2)]
        with pytest.raises(ValueError, match="duplicate"):
            TomographySet(n=2, records=records + [records[0]])

    def test_rejects_zero_shots(self):
        rho = dm(ghz_ket(2))
        records = [exact_record(rho, s, shots=0) for s in tomography.enumerate_settings(2)]
        with pytest.raises(ValueError, match="no shots"):
            TomographySet(n=2, records=records)


class TestPauliExpectationFromCounts:
    def test_identity_string_is_exactly_one(self):
        tset = exact_set(np.eye(16) / 16, 4)
        assert tomography.pauli_expectation_from_counts(tset, "IIII") == 1.0

    def test_zzzz_on_ghz4(self):
        tset = exact_set(dm(ghz_ket(4)), 4)
        assert abs(tomography.pauli_expectation_from_counts(tset, "ZZZZ") - 1.0) < 1e-12

    def test_xxii_vanishes_on_ghz4(self):
        # the reduced two-photon state is diagonal, so X(x)X averages to zero
        reduced = traced_density_matrix(dm(ghz_ket(4)), [0, 1], 4)
        assert abs(reduced[0, 1]) < 1e-12
        tset = exact_set(dm(ghz_ket(4)), 4)
        assert abs(tomography.pauli_expectation_from_counts(tset, "XXII")) < 1e-12

    def test_invalid_string(self):
        tset = exact_set(np.eye(4) / 4, 2)
        with pytest.raises(ValueError, match="invalid Pauli string"):
            tomography.pauli_expectation_from_counts(tset, "XQ")


class TestLinearInversion:
    def test_exact_ghz4(self):
        tset = exact_set(dm(ghz_ket(4)), 4)
        np.testing.assert_allclose(tomography.linear_inversion(tset), dm(ghz_ket(4)), atol=1e-9)

    def test_exact_white_noise(self):
        tset = exact_set(np.eye(16) / 16, 4)
        np.testing.assert_allclose(tomography.linear_inversion(tset), np.eye(16) / 16, atol=1e-12)

    def test_finite_counts_can_go_negative(self):
        tset = sampled_set(ghz4_state(NoiseParams()), 4, shots=50, seed=2)
        estimate = tomography.linear_inversion(tset)
        assert hermiticity_defect(estimate) < 1e-12
        assert abs(np.trace(estimate) - 1.0) < 1e-10
        assert np.linalg.eigvalsh(estimate).min() < 0  # flagged, not fatal


class TestPhysicalProjection:
    def test_identity_on_physical_input(self, rng):
        rho = random_density_matrix(4, rng)
        np.testing.assert_allclose(tomography.physical_projection(rho), rho, atol=1e-10)

    def test_one_dimensional_simplex_example(self):
        projected = tomography.physical_projection(np.diag([1.2, -0.2]))
        np.testing.assert_allclose(projected, np.diag([1.0, 0.0]), atol=1e-12)

    def test_idempotent(self, rng):
        noisy = random_density_matrix(4, rng) + 0.05 * np.diag(rng.normal(size=16))
        noisy = (noisy + noisy.conj().T) / 2
        noisy = noisy / np.trace(noisy)
        once = tomography.physical_projection(noisy)
        twice = tomography.physical_projection(once)
        np.testing.assert_allclose(once, twice, atol=1e-10)

    def test_never_increases_distance_to_physical_states(self, rng):
        for _ in range(20):
            h = random_density_matrix(4, rng) + 0.1 * np.diag(rng.normal(size=16))
            h = (h + h.conj().T) / 2
            h = h / np.trace(h)
            target = random_density_matrix(4, rng)
            projected = tomography.physical_projection(h)
            assert (
                np.linalg.norm(projected - target) <= np.linalg.norm(h - target) + 1e-12
            )

    def test_rejects_non_hermitian(self):
        bad = np.eye(4, dtype=complex) / 4
        bad[0, 1] = 0.2
        with pytest.raises(ValueError, match="not Hermitian"):
            tomography.physical_projection(bad)

    @settings(deadline=None, max_examples=40)
    @given(st.lists(st.floats(min_value=-2, max_value=2, allow_nan=False), min_size=2, max_size=16))
    def test_projected_spectra_live_on_simplex(self, spectrum):
        w = tomography._spectra_to_simplex(np.array(spectrum, dtype=float))
        assert w.min() >= 0.0
        assert abs(w.sum() - 1.0) < 1e-9


class TestReconstruct:
    def test_round_trip_on_small_grid(self, rng):
        states = [
            dm(ghz_ket(4)),
            np.eye(16) / 16,
            ghz_mixture(4, 0.8, 0.7, 1.2),
            random_density_matrix(4, rng),
            random_density_matrix(4, rng, rank=2),
        ]
        for rho in states:
            tset = exact_set(rho, 4)
            np.testing.assert_allclose(tomography.reconstruct(tset), rho, atol=1e-8)

    def test_sampled_ghz_recovers_high_fidelity(self):
        tset = sampled_set(dm(ghz_ket(4)), 4, shots=10**5, seed=5)
        fid = fidelity_with_pure(tomography.reconstruct(tset), ghz_ket(4))
        assert fid >= 0.99


class TestFidelityWithUncertainty:
    def test_rejects_small_resample_count(self):
        tset = exact_set(dm(ghz_ket(4)), 4)
        with pytest.raises(ValueError, match="resamples"):
            tomography.fidelity_with_uncertainty(tset, ghz_ket(4), resamples=50)

    def test_sigma_shrinks_with_shots(self, calibrated_noise):
        rho = ghz4_state(calibrated_noise)
        sigmas = []
        for shots in (10**3, 10**4, 10**5):
            tset = sampled_set(rho, 4, shots=shots, seed=31)
            uv = tomography.fidelity_with_uncertainty(tset, ghz_ket(4), resamples=150, seed=31)
            sigmas.append(uv.sigma)
        assert sigmas[0] > sigmas[1] > sigmas[2]

    def test_fidelity_trend_is_non_decreasing_in_shots(self):
        # expectation over seeds, with a five-sigma statistical margin
        rho = dm(ghz_ket(4))
        levels = (10**3, 10**4, 10**5)
        means, sems = [], []
        for shots in levels:
            values = [
                fidelity_with_pure(
                    tomography.reconstruct(sampled_set(rho, 4, shots, seed)), ghz_ket(4)
                )
                for seed in range(8)
            ]
            means.append(np.mean(values))
            sems.append(np.std(values, ddof=1) / np.sqrt(len(values)))
        for low, high in ((0, 1), (1, 2)):
            margin = 5 * np.hypot(sems[low], sems[high])
            assert means[high] >= means[low] - margin

    def test_value_matches_plain_reconstruction(self, calibrated_noise):
        rho = ghz4_state(calibrated_noise)
        tset = sampled_set(rho, 4, shots=2000, seed=7)
        uv = tomography.fidelity_with_uncertainty(tset, ghz_ket(4), resamples=120, seed=7)
        direct = fidelity_with_pure(tomography.reconstruct(tset), ghz_ket(4))
        assert uv.value == direct
        assert uv.sigma > 0
        assert uv.resamples == 120


class TestUncertainValue:
    def test_validation(self):
        with pytest.raises(ValueError):
            UncertainValue(0.5, -0.1, 100)
        with pytest.raises(ValueError):
            UncertainValue(0.5, 0.1, 0)

    def test_to_dict(self):
        uv = UncertainValue(0.5, 0.01, 200)
        assert uv.to_dict() == {"value": 0.5, "sigma": 0.01, "resamples": 200}
