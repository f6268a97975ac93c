"""Pydantic models shared by the service, the CLI, and the pipeline.

These are the wire and config schemas; the numeric core works on plain
dataclasses and numpy arrays and converts at this boundary.
"""

from __future__ import annotations

from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .circuit import NoiseParams
from .sampler import MAX_SEED, SamplerConfig

# Noise-model fit reproducing fidelity 0.729 and mean AVN error rate 0.191
# (see nonlocality.calibrate); used as the default simulated chip.
CALIBRATED_SIGNAL_WEIGHT = 0.8171428571428571
CALIBRATED_COHERENCE = 0.7562937062937064

# Relative phase maximizing the four-photon Mermin violation.
MERMIN_PHASE_DEFAULT = 2.356194490192345  # 3*pi/4

TWO_PI = 6.283185307179586

Analysis = Literal["tomo", "avn", "mermin", "witness", "fringes", "hom", "calibrate"]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class NoiseSpec(StrictModel):
    """Chip imperfection parameters; defaults are the calibrated values."""

    signal_weight: float = Field(CALIBRATED_SIGNAL_WEIGHT, ge=0.0, le=1.0)
    coherence: float = Field(CALIBRATED_COHERENCE, ge=0.0, le=1.0)
    phase: float = Field(0.0, ge=0.0, lt=TWO_PI)
    overlap: float = Field(0.95, ge=0.0, le=1.0)
    purity: float = Field(0.902, ge=0.0, le=1.0)
    visibility_s1: float = Field(0.935, ge=0.0, le=1.0)
    visibility_s2: float = Field(0.938, ge=0.0, le=1.0)

    def to_params(self) -> NoiseParams:
        return NoiseParams(
            signal_weight=self.signal_weight,
            coherence=self.coherence,
            phase=self.phase,
            overlap=self.overlap,
            purity=self.purity,
            visibility_s1=self.visibility_s1,
            visibility_s2=self.visibility_s2,
        )


class SamplerSpec(StrictModel):
    """Shot budget and RNG seed; 470 shots per setting reflects a realistic
    multi-hour four-fold campaign."""

    shots_per_setting: int = Field(470, ge=0)
    accidental_fraction: float = Field(0.0, ge=0.0, le=1.0)
    seed: int = Field(0, ge=0, lt=MAX_SEED)

    def to_config(self) -> SamplerConfig:
        return SamplerConfig(
            shots_per_setting=self.shots_per_setting,
            accidental_fraction=self.accidental_fraction,
            seed=self.seed,
        )


class ExperimentConfig(StrictModel):
    """Full experiment description consumed by the run pipeline."""

    n: Literal[3, 4] = 4
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    sampler: SamplerSpec = Field(default_factory=SamplerSpec)
    analyses: list[Analysis] = Field(default_factory=lambda: ["tomo", "avn", "mermin", "witness"])
    output_dir: Optional[str] = None
    resamples: int = Field(1000, ge=100)
    mermin_phase: float = Field(MERMIN_PHASE_DEFAULT, ge=0.0, lt=TWO_PI)
    fringe_steps: int = Field(100, ge=2)
    calibration_fidelity: float = Field(0.729, gt=0.0, lt=1.0)
    calibration_epsilon: float = Field(0.191, gt=0.0, lt=1.0)

    @model_validator(mode="after")
    def _check_analyses(self) -> "ExperimentConfig":
        if not self.analyses:
            raise ValueError("analyses must not be empty")
        if len(set(self.analyses)) != len(self.analyses):
            raise ValueError("analyses must not repeat")
        if self.n == 3 and "witness" in self.analyses:
            raise ValueError("the entanglement witness is defined for n=4 only")
        return self


class UncertainValueModel(StrictModel):
    value: float
    sigma: float = Field(ge=0.0)
    resamples: int = Field(ge=1)


class RecordModel(StrictModel):
    """One measurement record in the JSON interchange format."""

    setting: str
    counts: list[int]
    shots: int = Field(ge=0)


class RecordsDocument(StrictModel):
    """Interchange document: {"n": ..., "records": [...]}."""

    n: int = Field(ge=1, le=4)
    records: list[RecordModel]

    @model_validator(mode="after")
    def _check_records(self) -> "RecordsDocument":
        for rec in self.records:
            if len(rec.setting) != self.n or any(c not in "XYZ" for c in rec.setting):
                raise ValueError(f"invalid setting {rec.setting!r} for n={self.n}")
            if len(rec.counts) != 2**self.n:
                raise ValueError(f"record {rec.setting!r} needs {2**self.n} count bins")
            if any(c < 0 for c in rec.counts):
                raise ValueError(f"record {rec.setting!r} has negative counts")
            if sum(rec.counts) > rec.shots:
                raise ValueError(f"record {rec.setting!r} has more counts than shots")
        return self


class StateRequest(StrictModel):
    n: Literal[3, 4] = 4
    noise: NoiseSpec = Field(default_factory=NoiseSpec)


class StateResponse(StrictModel):
    n: int
    rho_re: list[list[float]]
    rho_im: list[list[float]]


SettingsChoice = Union[Literal["tomography", "avn", "mermin", "witness"], list[str]]


class SampleRequest(StrictModel):
    n: Literal[3, 4] = 4
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    sampler: SamplerSpec = Field(default_factory=SamplerSpec)
    settings: SettingsChoice = "tomography"

    @model_validator(mode="after")
    def _check_settings(self) -> "SampleRequest":
        if isinstance(self.settings, list):
            if not self.settings:
                raise ValueError("settings list must not be empty")
            for s in self.settings:
                if len(s) != self.n or any(c not in "XYZ" for c in s):
                    raise ValueError(f"invalid setting {s!r} for n={self.n}")
        elif self.settings == "witness" and self.n != 4:
            raise ValueError("witness settings are defined for n=4 only")
        return self


class TomographyRequest(StrictModel):
    records: RecordsDocument
    target_phase: float = Field(0.0, ge=0.0, lt=TWO_PI)
    resamples: int = Field(1000, ge=100)
    seed: int = Field(0, ge=0, lt=MAX_SEED)


class TomographyResponse(StrictModel):
    n: int
    rho_re: list[list[float]]
    rho_im: list[list[float]]
    fidelity: UncertainValueModel


class AvnRequest(StrictModel):
    records: RecordsDocument
    resamples: int = Field(1000, ge=100)
    seed: int = Field(0, ge=0, lt=MAX_SEED)


class AvnSettingResult(StrictModel):
    setting: str
    epsilon: UncertainValueModel


class AvnResponse(StrictModel):
    per_setting: list[AvnSettingResult]
    epsilon_mean: UncertainValueModel
    epsilon_max: UncertainValueModel
    bound: float
    violates_local_realism: bool


class MerminRequest(StrictModel):
    records: RecordsDocument
    resamples: int = Field(1000, ge=100)
    seed: int = Field(0, ge=0, lt=MAX_SEED)
    target_phase: Optional[float] = None


class MerminResponse(StrictModel):
    value: UncertainValueModel
    classical_bound: float
    quantum_max: float
    standard_deviations_of_violation: Optional[float] = None
    target_phase: Optional[float] = None


class WitnessRequest(StrictModel):
    records: RecordsDocument
    resamples: int = Field(1000, ge=100)
    seed: int = Field(0, ge=0, lt=MAX_SEED)


class WitnessResponse(StrictModel):
    value: UncertainValueModel
    witnesses_entanglement: bool


class FringeRequest(StrictModel):
    kind: Literal["path_correlation", "hhom"]
    steps: int = Field(100, ge=2)
    visibility: float = Field(0.935, ge=0.0, le=1.0)
    overlap: float = Field(0.95, ge=0.0, le=1.0)
    purity: float = Field(0.902, ge=0.0, le=1.0)


class FringeResponse(StrictModel):
    kind: str
    x_label: str
    rows: list[list[float]]
    fitted_visibility: float


class CalibrateRequest(StrictModel):
    fidelity: float = Field(0.729, gt=0.0, lt=1.0)
    epsilon_mean: float = Field(0.191, gt=0.0, lt=1.0)


class CalibratePredictions(StrictModel):
    mermin_m4: float
    mermin_m3: float
    fidelity_3: float
    epsilon_3: float


class CalibrateResponse(StrictModel):
    signal_weight: float
    coherence: float
    predictions: CalibratePredictions


class ArtifactModel(StrictModel):
    """A file the run pipeline produced; the client decides where it lands."""

    kind: Literal["json", "csv"]
    body: Optional[dict[str, Any]] = None
    header: Optional[list[str]] = None
    rows: Optional[list[list[Any]]] = None


class RunResponse(StrictModel):
    report: dict[str, Any]
    artifacts: dict[str, ArtifactModel]


class HealthResponse(StrictModel):
    status: str
    version: str
