"""FastAPI service exposing the simulator and the analysis pipeline.

Every endpoint is stateless: requests carry the full configuration or the
count records to analyze, and responses carry the complete result. The CLI
is a thin client of this app; external tooling can POST real measurement
records to the analyze endpoints using the same JSON interchange format.
"""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import nonlocality, schemas
from .circuit import ghz3_state, ghz4_state, ghz_vector
from .pipeline import fringe_scan, run_experiment
from .qmath import matrix_to_parts
from .sampler import CountRecord, records_to_document, sample_experiment
from .tomography import TomographySet, enumerate_settings, fidelity_with_uncertainty, reconstruct

try:
    _VERSION = version("ghzsim")
except PackageNotFoundError:
    _VERSION = "unknown"

app = FastAPI(
    title="ghzsim",
    description="Four-photon GHZ entanglement simulator and analysis service",
    version=_VERSION,
)


@app.exception_handler(ValueError)
async def _domain_error(request: Request, exc: ValueError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": str(exc)})


def _records_from_document(doc: schemas.RecordsDocument) -> list[CountRecord]:
    return [
        CountRecord(setting=r.setting, counts=np.asarray(r.counts, dtype=float), shots=r.shots)
        for r in doc.records
    ]


def _uncertain(uv) -> schemas.UncertainValueModel:
    return schemas.UncertainValueModel(value=uv.value, sigma=uv.sigma, resamples=uv.resamples)


def _settings_for(n: int, choice) -> list[str]:
    if isinstance(choice, list):
        return choice
    if choice == "tomography":
        return enumerate_settings(n)
    if choice == "avn":
        return [spec.setting for spec in nonlocality.avn_specs(n)]
    if choice == "mermin":
        return nonlocality.mermin_m4_settings() if n == 4 else nonlocality.mermin_m3_settings()
    if choice == "witness":
        return ["XXXX", "ZZZZ"]
    raise ValueError(f"unknown settings choice {choice!r}")


@app.get("/health", response_model=schemas.HealthResponse)
def health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=_VERSION)


@app.post("/state", response_model=schemas.StateResponse)
def state(req: schemas.StateRequest) -> schemas.StateResponse:
    noise = req.noise.to_params()
    rho = ghz4_state(noise) if req.n == 4 else ghz3_state(noise)
    rho_re, rho_im = matrix_to_parts(rho)
    return schemas.StateResponse(n=req.n, rho_re=rho_re, rho_im=rho_im)


@app.post("/sample", response_model=schemas.RecordsDocument)
def sample(req: schemas.SampleRequest) -> schemas.RecordsDocument:
    noise = req.noise.to_params()
    rho = ghz4_state(noise) if req.n == 4 else ghz3_state(noise)
    records = sample_experiment(rho, _settings_for(req.n, req.settings), req.sampler.to_config())
    return schemas.RecordsDocument.model_validate(records_to_document(records))


@app.post("/analyze/tomography", response_model=schemas.TomographyResponse)
def analyze_tomography(req: schemas.TomographyRequest) -> schemas.TomographyResponse:
    tset = TomographySet.from_records(_records_from_document(req.records))
    target = ghz_vector(tset.n, req.target_phase)
    fid = fidelity_with_uncertainty(tset, target, req.resamples, req.seed)
    rho_re, rho_im = matrix_to_parts(reconstruct(tset))
    return schemas.TomographyResponse(
        n=tset.n, rho_re=rho_re, rho_im=rho_im, fidelity=_uncertain(fid)
    )


@app.post("/analyze/avn", response_model=schemas.AvnResponse)
def analyze_avn(req: schemas.AvnRequest) -> schemas.AvnResponse:
    records = _records_from_document(req.records)
    suite = nonlocality.avn_suite(
        records, nonlocality.avn_specs(req.records.n), req.resamples, req.seed
    )
    return schemas.AvnResponse(
        per_setting=[
            schemas.AvnSettingResult(setting=s, epsilon=_uncertain(uv))
            for s, uv in suite.per_setting_epsilon
        ],
        epsilon_mean=_uncertain(suite.epsilon_mean),
        epsilon_max=_uncertain(suite.epsilon_max),
        bound=suite.bound,
        violates_local_realism=suite.violates_local_realism,
    )


@app.post("/analyze/mermin", response_model=schemas.MerminResponse)
def analyze_mermin(req: schemas.MerminRequest) -> schemas.MerminResponse:
    records = _records_from_document(req.records)
    evaluate = nonlocality.mermin_m4 if req.records.n == 4 else nonlocality.mermin_m3
    result = evaluate(records, req.resamples, req.seed, target_phase=req.target_phase)
    deviations = result.standard_deviations_of_violation
    return schemas.MerminResponse(
        value=_uncertain(result.value),
        classical_bound=result.classical_bound,
        quantum_max=result.quantum_max,
        standard_deviations_of_violation=deviations if np.isfinite(deviations) else None,
        target_phase=result.target_phase,
    )


@app.post("/analyze/witness", response_model=schemas.WitnessResponse)
def analyze_witness(req: schemas.WitnessRequest) -> schemas.WitnessResponse:
    if req.records.n != 4:
        raise ValueError("the entanglement witness is defined for n=4 only")
    value = nonlocality.witness_ghz4(_records_from_document(req.records), req.resamples, req.seed)
    return schemas.WitnessResponse(
        value=_uncertain(value), witnesses_entanglement=bool(value.value < 0.0)
    )


@app.post("/fringe", response_model=schemas.FringeResponse)
def fringe(req: schemas.FringeRequest) -> schemas.FringeResponse:
    scan = fringe_scan(
        req.kind, req.steps, visibility=req.visibility, overlap=req.overlap, purity=req.purity
    )
    return schemas.FringeResponse(
        kind=scan.kind,
        x_label=scan.x_label,
        rows=[[float(x), float(v)] for x, v in zip(scan.xs, scan.values)],
        fitted_visibility=scan.fitted_visibility,
    )


@app.post("/calibrate", response_model=schemas.CalibrateResponse)
def calibrate(req: schemas.CalibrateRequest) -> schemas.CalibrateResponse:
    fit = nonlocality.calibrate(req.fidelity, req.epsilon_mean)
    return schemas.CalibrateResponse(
        signal_weight=fit.signal_weight,
        coherence=fit.coherence,
        predictions=schemas.CalibratePredictions(**fit.predictions.to_dict()),
    )


@app.post("/run", response_model=schemas.RunResponse)
def run(config: schemas.ExperimentConfig) -> schemas.RunResponse:
    result = run_experiment(config)
    return schemas.RunResponse(
        report=result.report,
        artifacts={
            name: schemas.ArtifactModel(**artifact) for name, artifact in result.artifacts.items()
        },
    )
