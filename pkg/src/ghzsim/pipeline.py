"""Experiment orchestration: state construction, sampling, analysis blocks,
fringe scans, and deterministic report assembly.

Stream tags keep every analysis block on its own RNG substream family so
that, for one seed, blocks are statistically independent of each other while
each block alone stays reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

import numpy as np

from .circuit import (
    ghz4_state,
    ghz_mixture,
    ghz_vector,
    hhom_fringe,
    hhom_visibility,
    path_correlation_fringe,
)
from .nonlocality import (
    AVN_SPECS_3,
    AVN_SPECS_4,
    avn_suite,
    calibrate,
    mermin_m3,
    mermin_m3_settings,
    mermin_m4,
    mermin_m4_settings,
    witness_ghz4,
)
from .qmath import matrix_to_parts, project_qubit
from .sampler import records_to_document, sample_experiment
from .schemas import ExperimentConfig
from .tomography import TomographySet, enumerate_settings, fidelity_with_uncertainty, reconstruct

REPORT_SCHEMA = "ghzsim-report/1"

_TAG_TOMO = 1
_TAG_AVN = 2
_TAG_MERMIN = 3
_TAG_WITNESS = 4
_TAG_TOMO3_BASE = 10  # + projected-photon index
_TAG_XY3_BASE = 20  # + projected-photon index

PHOTON_LABELS = "ABCD"


@dataclass(frozen=True)
class FringeScan:
    kind: str
    x_label: str
    xs: np.ndarray
    values: np.ndarray
    fitted_visibility: float


@dataclass(frozen=True)
class RunResult:
    report: dict[str, Any]
    artifacts: dict[str, dict[str, Any]]


def _fit_cosine_visibility(xs: np.ndarray, values: np.ndarray) -> float:
    """Least-squares fit of a + b*cos(x); visibility is b/a."""
    design = np.column_stack([np.ones_like(xs), np.cos(xs)])
    (offset, amplitude), *_ = np.linalg.lstsq(design, values, rcond=None)
    return float(amplitude / offset)


def _fit_hom_visibility(ts: np.ndarray, values: np.ndarray) -> float:
    """Least-squares fit of a + b*t(1-t); visibility is -1 - b/(2a)."""
    design = np.column_stack([np.ones_like(ts), ts * (1.0 - ts)])
    (offset, curvature), *_ = np.linalg.lstsq(design, values, rcond=None)
    return float(-1.0 - curvature / (2.0 * offset))


def fringe_scan(
    kind: str,
    steps: int,
    visibility: float = 0.935,
    overlap: float = 0.95,
    purity: float = 0.902,
) -> FringeScan:
    """Tabulate one interference fringe and fit its visibility back.

    ``path_correlation`` scans the analyzer phase over [0, 2*pi];
    ``hhom`` scans the sorter MZI transmittance over [0, 1]. On these
    noiseless scans the fitted visibility reproduces the input exactly.
    """
    if steps < 2:
        raise ValueError("a fringe scan needs at least 2 steps")
    if kind == "path_correlation":
        xs = np.linspace(0.0, 2.0 * np.pi, steps)
        values = np.array([path_correlation_fringe(visibility, x) for x in xs])
        fitted = _fit_cosine_visibility(xs, values)
        return FringeScan(kind, "phase_rad", xs, values, fitted)
    if kind == "hhom":
        xs = np.linspace(0.0, 1.0, steps)
        values = np.array([hhom_fringe(overlap, purity, x) for x in xs])
        fitted = _fit_hom_visibility(xs, values)
        return FringeScan(kind, "transmittance", xs, values, fitted)
    raise ValueError(f"unknown fringe kind {kind!r}")


def _fringe_artifact(scan: FringeScan) -> dict[str, Any]:
    return {
        "kind": "csv",
        "header": [scan.x_label, "coincidence_probability"],
        "rows": [[float(x), float(v)] for x, v in zip(scan.xs, scan.values)],
    }


def _records_artifact(records) -> dict[str, Any]:
    return {"kind": "json", "body": records_to_document(records)}


def run_experiment(config: ExperimentConfig) -> RunResult:
    """Execute every requested analysis and assemble the report.

    The report is reproducible bit-exactly from (config, seed): sampling and
    resampling both derive from the configured seed, and no timestamps enter
    the report body.
    """
    noise = config.noise.to_params()
    sampler_cfg = config.sampler.to_config()
    resamples = config.resamples
    seed = sampler_cfg.seed
    analyses = set(config.analyses)
    results: dict[str, Any] = {}
    artifacts: dict[str, dict[str, Any]] = {}

    if config.n == 4:
        rho = ghz4_state(noise)
        if "tomo" in analyses:
            records = sample_experiment(rho, enumerate_settings(4), sampler_cfg, _TAG_TOMO)
            tset = TomographySet.from_records(records)
            target = ghz_vector(4, noise.phase)
            fid = fidelity_with_uncertainty(tset, target, resamples, seed, _TAG_TOMO)
            rho_re, rho_im = matrix_to_parts(reconstruct(tset))
            results["tomo"] = {
                "fidelity": fid.to_dict(),
                "target_phase": noise.phase,
                "settings": len(records),
                "shots_per_setting": sampler_cfg.shots_per_setting,
            }
            artifacts["records/tomography.json"] = _records_artifact(records)
            artifacts["tomography.json"] = {
                "kind": "json",
                "body": {"n": 4, "rho_re": rho_re, "rho_im": rho_im, "fidelity": fid.to_dict()},
            }
        if "avn" in analyses:
            records = sample_experiment(
                rho, [spec.setting for spec in AVN_SPECS_4], sampler_cfg, _TAG_AVN
            )
            suite = avn_suite(records, AVN_SPECS_4, resamples, seed, _TAG_AVN)
            results["avn"] = suite.to_dict()
            artifacts["records/avn.json"] = _records_artifact(records)
        if "mermin" in analyses:
            # Maximum violation needs the rotated GHZ state, so the Mermin
            # block prepares its own phase independent of noise.phase.
            rho_rotated = ghz_mixture(
                4, noise.signal_weight, noise.coherence, config.mermin_phase
            )
            records = sample_experiment(rho_rotated, mermin_m4_settings(), sampler_cfg, _TAG_MERMIN)
            result = mermin_m4(records, resamples, seed, _TAG_MERMIN, config.mermin_phase)
            results["mermin"] = result.to_dict()
            artifacts["records/mermin.json"] = _records_artifact(records)
        if "witness" in analyses:
            records = sample_experiment(rho, ["XXXX", "ZZZZ"], sampler_cfg, _TAG_WITNESS)
            value = witness_ghz4(records, resamples, seed, _TAG_WITNESS)
            results["witness"] = {
                "value": value.to_dict(),
                "witnesses_entanglement": bool(value.value < 0.0),
            }
            artifacts["records/witness.json"] = _records_artifact(records)
    else:
        # Three-photon mode: project each photon of the four-photon state
        # onto |+> in turn and characterize the remaining trio.
        rho4 = ghz4_state(noise)
        plus = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
        rows: list[dict[str, Any]] = []
        for q, label in enumerate(PHOTON_LABELS):
            rho3, prob = project_qubit(rho4, q, plus)
            row: dict[str, Any] = {"projected_photon": label, "projection_probability": prob}
            if "tomo" in analyses:
                records = sample_experiment(
                    rho3, enumerate_settings(3), sampler_cfg, _TAG_TOMO3_BASE + q
                )
                tset = TomographySet.from_records(records)
                fid = fidelity_with_uncertainty(
                    tset, ghz_vector(3, noise.phase), resamples, seed, _TAG_TOMO3_BASE + q
                )
                row["fidelity"] = fid.to_dict()
                artifacts[f"records/photon_{label}_tomography.json"] = _records_artifact(records)
            if analyses & {"avn", "mermin"}:
                records = sample_experiment(
                    rho3, mermin_m3_settings(), sampler_cfg, _TAG_XY3_BASE + q
                )
                artifacts[f"records/photon_{label}_xy.json"] = _records_artifact(records)
                if "avn" in analyses:
                    suite = avn_suite(records, AVN_SPECS_3, resamples, seed, _TAG_XY3_BASE + q)
                    row["epsilon_max"] = suite.epsilon_max.to_dict()
                    row["violates_local_realism"] = suite.violates_local_realism
                if "mermin" in analyses:
                    result = mermin_m3(records, resamples, seed, _TAG_XY3_BASE + q, noise.phase)
                    row["mermin_m3"] = result.to_dict()
            rows.append(row)
        results["three_photon"] = rows

    if "fringes" in analyses:
        block = {}
        for name, vis in (("s1", noise.visibility_s1), ("s2", noise.visibility_s2)):
            scan = fringe_scan("path_correlation", config.fringe_steps, visibility=vis)
            block[name] = {"visibility": vis, "fitted_visibility": scan.fitted_visibility}
            artifacts[f"fringes/path_correlation_{name}.csv"] = _fringe_artifact(scan)
        results["fringes"] = block
    if "hom" in analyses:
        scan = fringe_scan("hhom", config.fringe_steps, overlap=noise.overlap, purity=noise.purity)
        results["hom"] = {
            "visibility": hhom_visibility(noise.overlap, noise.purity),
            "cc_min": hhom_fringe(noise.overlap, noise.purity, 0.5),
            "fitted_visibility": scan.fitted_visibility,
        }
        artifacts["fringes/hhom.csv"] = _fringe_artifact(scan)
    if "calibrate" in analyses:
        fit = calibrate(config.calibration_fidelity, config.calibration_epsilon)
        results["calibrate"] = {
            "targets": {
                "fidelity": config.calibration_fidelity,
                "epsilon_mean": config.calibration_epsilon,
            },
            **fit.to_dict(),
        }

    report = {
        "schema": REPORT_SCHEMA,
        "seed": seed,
        "config": config.model_dump(mode="json"),
        "results": results,
    }
    return RunResult(report=report, artifacts=artifacts)


def report_json(report: dict[str, Any]) -> str:
    """Canonical report serialization; identical inputs give identical bytes."""
    return json.dumps(report, indent=2, allow_nan=False) + "\n"
