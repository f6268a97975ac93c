"""Nonlocality certification: all-versus-nothing error rates, Mermin
inequalities, the two-setting entanglement witness, and noise-model
calibration against measured fidelity and error rate.

All record-based estimators work on outcome fractions, so externally
measured histograms can be substituted for simulated ones. Error bars use
the same Poisson resampling engine as tomography.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .sampler import CountRecord, outcome_signs, poisson_resampled_counts
from .tomography import UncertainValue

AVN_BOUND = 0.25
MERMIN_M4_CLASSICAL_BOUND = 4.0
MERMIN_M4_QUANTUM_MAX = 8.0 * math.sqrt(2.0)
MERMIN_M3_CLASSICAL_BOUND = 2.0
MERMIN_M3_QUANTUM_MAX = 4.0

# Term sign in the Mermin sum as a function of the number of Y symbols.
MERMIN_COEFF_BY_Y_COUNT = (1.0, -1.0, -1.0, 1.0, 1.0)


@dataclass(frozen=True)
class AvnSettingSpec:
    """One all-versus-nothing setting and its perfect-correlation sign."""

    setting: str
    predicted_sign: int

    def __post_init__(self) -> None:
        if any(c not in "XY" for c in self.setting):
            raise ValueError(f"AVN settings use only X and Y, got {self.setting!r}")
        if self.predicted_sign not in (1, -1):
            raise ValueError("predicted sign must be +1 or -1")


AVN_SPECS_4 = (
    AvnSettingSpec("XXXX", +1),
    AvnSettingSpec("YYYY", +1),
    AvnSettingSpec("XXYY", -1),
    AvnSettingSpec("XYXY", -1),
    AvnSettingSpec("XYYX", -1),
    AvnSettingSpec("YXXY", -1),
    AvnSettingSpec("YXYX", -1),
    AvnSettingSpec("YYXX", -1),
)

AVN_SPECS_3 = (
    AvnSettingSpec("XXX", +1),
    AvnSettingSpec("XYY", -1),
    AvnSettingSpec("YXY", -1),
    AvnSettingSpec("YYX", -1),
)


def avn_specs(n: int) -> tuple[AvnSettingSpec, ...]:
    if n == 4:
        return AVN_SPECS_4
    if n == 3:
        return AVN_SPECS_3
    raise ValueError(f"AVN specs are defined for 3 or 4 photons, not {n}")


def mermin_m4_settings() -> list[str]:
    """All 16 X/Y settings entering the four-photon Mermin sum."""
    return ["".join(t) for t in itertools.product("XY", repeat=4)]


def mermin_m3_settings() -> list[str]:
    """The four settings of M3 = |XXX - (XYY + YXY + YYX)|."""
    return ["XXX", "XYY", "YXY", "YYX"]


@dataclass(frozen=True)
class AvnResult:
    per_setting_epsilon: tuple[tuple[str, UncertainValue], ...]
    epsilon_mean: UncertainValue
    epsilon_max: UncertainValue
    bound: float
    violates_local_realism: bool

    def to_dict(self) -> dict:
        return {
            "per_setting": [
                {"setting": s, "epsilon": uv.to_dict()} for s, uv in self.per_setting_epsilon
            ],
            "epsilon_mean": self.epsilon_mean.to_dict(),
            "epsilon_max": self.epsilon_max.to_dict(),
            "bound": self.bound,
            "violates_local_realism": self.violates_local_realism,
        }


@dataclass(frozen=True)
class MerminResult:
    value: UncertainValue
    classical_bound: float
    quantum_max: float
    standard_deviations_of_violation: float
    target_phase: float | None = None

    def to_dict(self) -> dict:
        deviations = self.standard_deviations_of_violation
        return {
            "value": self.value.to_dict(),
            "classical_bound": self.classical_bound,
            "quantum_max": self.quantum_max,
            # infinite when sigma is zero; JSON carries that as null
            "standard_deviations_of_violation": deviations if math.isfinite(deviations) else None,
            "target_phase": self.target_phase,
        }


@dataclass(frozen=True)
class CalibrationPredictions:
    mermin_m4: float
    mermin_m3: float
    fidelity_3: float
    epsilon_3: float

    def to_dict(self) -> dict:
        return {
            "mermin_m4": self.mermin_m4,
            "mermin_m3": self.mermin_m3,
            "fidelity_3": self.fidelity_3,
            "epsilon_3": self.epsilon_3,
        }


@dataclass(frozen=True)
class CalibrationResult:
    signal_weight: float
    coherence: float
    predictions: CalibrationPredictions

    def to_dict(self) -> dict:
        return {
            "signal_weight": self.signal_weight,
            "coherence": self.coherence,
            "predictions": self.predictions.to_dict(),
        }


def _fractions(record: CountRecord) -> tuple[np.ndarray, float]:
    total = float(record.counts.sum())
    if total <= 0:
        raise ValueError(f"record {record.setting!r} holds no counts")
    return record.counts, total


def avn_epsilon(record: CountRecord, predicted_sign: int) -> float:
    """Fraction of outcomes whose eigenvalue product contradicts the
    GHZ prediction; equals (1 - sign * <P>) / 2 on exact frequencies."""
    if "Z" in record.setting:
        raise ValueError(f"AVN settings use only X and Y, got {record.setting!r}")
    if predicted_sign not in (1, -1):
        raise ValueError("predicted sign must be +1 or -1")
    counts, total = _fractions(record)
    signs = outcome_signs(record.n)
    return float(counts[signs != predicted_sign].sum() / total)


def _match_records(records, settings) -> list[CountRecord]:
    """Order records by the given settings, requiring each exactly once."""
    by_setting: dict[str, CountRecord] = {}
    for rec in records:
        if rec.setting in by_setting:
            raise ValueError(f"duplicate record for setting {rec.setting!r}")
        by_setting[rec.setting] = rec
    missing = [s for s in settings if s not in by_setting]
    if missing:
        raise ValueError(f"missing records for settings {missing}")
    extra = set(by_setting) - set(settings)
    if extra:
        raise ValueError(f"unexpected records for settings {sorted(extra)}")
    return [by_setting[s] for s in settings]


def _resampled_totals(records, resamples, seed, stream_tag):
    counts = np.stack([rec.counts for rec in records])
    redrawn = poisson_resampled_counts(counts, resamples, seed, stream_tag)
    totals = redrawn.sum(axis=-1)
    return redrawn, np.where(totals > 0, totals, 1.0)


def avn_suite(
    records,
    specs: tuple[AvnSettingSpec, ...] = AVN_SPECS_4,
    resamples: int = 1000,
    seed: int = 0,
    stream_tag: int = 0,
) -> AvnResult:
    """Per-setting error rates with Poisson error bars, their mean and max,
    and the verdict against the 1/4 bound (decided on point values)."""
    ordered = _match_records(records, [spec.setting for spec in specs])
    n = ordered[0].n
    signs = outcome_signs(n)
    wrong_masks = np.stack([signs != spec.predicted_sign for spec in specs])

    point = np.array([avn_epsilon(rec, spec.predicted_sign) for rec, spec in zip(ordered, specs)])
    redrawn, totals = _resampled_totals(ordered, resamples, seed, stream_tag)
    eps_r = (redrawn * wrong_masks[None]).sum(axis=-1) / totals

    per_setting = tuple(
        (spec.setting, UncertainValue(float(point[k]), float(np.std(eps_r[:, k], ddof=1)), resamples))
        for k, spec in enumerate(specs)
    )
    eps_mean = UncertainValue(
        float(point.mean()), float(np.std(eps_r.mean(axis=1), ddof=1)), resamples
    )
    eps_max = UncertainValue(
        float(point.max()), float(np.std(eps_r.max(axis=1), ddof=1)), resamples
    )
    return AvnResult(
        per_setting_epsilon=per_setting,
        epsilon_mean=eps_mean,
        epsilon_max=eps_max,
        bound=AVN_BOUND,
        violates_local_realism=bool(eps_max.value < AVN_BOUND),
    )


def _mermin_value(records, coefficients) -> float:
    total = 0.0
    for rec, coeff in zip(records, coefficients):
        counts, norm = _fractions(rec)
        total += float(coeff) * float(outcome_signs(rec.n) @ counts / norm)
    return abs(total)


def _mermin_result(
    records, settings, classical_bound, quantum_max, resamples, seed, stream_tag, target_phase
) -> MerminResult:
    ordered = _match_records(records, settings)
    n = ordered[0].n
    coefficients = np.array([MERMIN_COEFF_BY_Y_COUNT[s.count("Y")] for s in settings])
    point = _mermin_value(ordered, coefficients)

    redrawn, totals = _resampled_totals(ordered, resamples, seed, stream_tag)
    expectations = (redrawn * outcome_signs(n)[None, None]).sum(axis=-1) / totals
    values_r = np.abs(expectations @ coefficients)
    sigma = float(np.std(values_r, ddof=1))

    if sigma > 0:
        deviations = (point - classical_bound) / sigma
    elif point == classical_bound:
        deviations = 0.0
    else:
        deviations = math.inf if point > classical_bound else -math.inf
    return MerminResult(
        value=UncertainValue(point, sigma, resamples),
        classical_bound=classical_bound,
        quantum_max=quantum_max,
        standard_deviations_of_violation=float(deviations),
        target_phase=target_phase,
    )


def mermin_m4(
    records,
    resamples: int = 1000,
    seed: int = 0,
    stream_tag: int = 0,
    target_phase: float | None = None,
) -> MerminResult:
    """Four-photon Mermin value from the 16 X/Y records.

    The maximum quantum value 8*sqrt(2) is reached on the GHZ state with
    relative phase 3*pi/4; ``target_phase`` records which phase the supplied
    records were prepared at.
    """
    return _mermin_result(
        records,
        mermin_m4_settings(),
        MERMIN_M4_CLASSICAL_BOUND,
        MERMIN_M4_QUANTUM_MAX,
        resamples,
        seed,
        stream_tag,
        target_phase,
    )


def mermin_m3(
    records,
    resamples: int = 1000,
    seed: int = 0,
    stream_tag: int = 0,
    target_phase: float | None = None,
) -> MerminResult:
    """Three-photon Mermin value |XXX - (XYY + YXY + YYX)|; bound 2, max 4."""
    return _mermin_result(
        records,
        mermin_m3_settings(),
        MERMIN_M3_CLASSICAL_BOUND,
        MERMIN_M3_QUANTUM_MAX,
        resamples,
        seed,
        stream_tag,
        target_phase,
    )


def _witness_point(xxxx: np.ndarray, xxxx_total: float, zzzz: np.ndarray, zzzz_total: float) -> float:
    # <W> = 3 - 2 [ (<XXXX> + 1)/2 + q ] with q the population on the
    # simultaneous +1 eigenspace of the three adjacent ZZ parities, i.e. the
    # fraction of ZZZZ outcomes 0000 and 1111.
    x_expect = float(outcome_signs(4) @ xxxx / xxxx_total)
    q = float((zzzz[0] + zzzz[-1]) / zzzz_total)
    return 2.0 - x_expect - 2.0 * q


def witness_ghz4(
    records, resamples: int = 1000, seed: int = 0, stream_tag: int = 0
) -> UncertainValue:
    """Two-setting entanglement witness from XXXX and ZZZZ records.

    A negative expectation value witnesses genuine four-photon entanglement;
    the ideal GHZ state gives -1.
    """
    xxxx_rec, zzzz_rec = _match_records(records, ["XXXX", "ZZZZ"])
    x_counts, x_total = _fractions(xxxx_rec)
    z_counts, z_total = _fractions(zzzz_rec)
    point = _witness_point(x_counts, x_total, z_counts, z_total)

    redrawn, totals = _resampled_totals([xxxx_rec, zzzz_rec], resamples, seed, stream_tag)
    values_r = np.array(
        [
            _witness_point(redrawn[r, 0], totals[r, 0], redrawn[r, 1], totals[r, 1])
            for r in range(resamples)
        ]
    )
    return UncertainValue(point, float(np.std(values_r, ddof=1)), resamples)


def calibrate(fidelity: float, epsilon_mean: float) -> CalibrationResult:
    """Fit the (p, c) noise model to a measured fidelity and AVN error rate.

    Inverts the closed forms p*c = 1 - 2*eps and p(1+c)/2 + (1-p)/16 = F,
    then predicts the four-photon Mermin value p*c*8*sqrt(2) (at phase
    3*pi/4), the three-photon fidelity p(1+c)/2 + (1-p)/8, the three-photon
    Mermin value p*c*4, and the three-photon error rate (unchanged).
    """
    if not 0.0 < fidelity < 1.0:
        raise ValueError(f"fidelity must lie in (0, 1), got {fidelity!r}")
    if not 0.0 < epsilon_mean < 1.0:
        raise ValueError(f"error rate must lie in (0, 1), got {epsilon_mean!r}")
    pc = 1.0 - 2.0 * epsilon_mean
    weight = (fidelity - pc / 2.0 - 1.0 / 16.0) * 16.0 / 7.0
    if pc < 0.0 or not 0.0 < weight <= 1.0:
        raise ValueError(
            f"no noise-model solution in the unit square for fidelity {fidelity} "
            f"and error rate {epsilon_mean} (weight {weight:.4f}, coherence*weight {pc:.4f})"
        )
    coherence = pc / weight
    if coherence > 1.0 + 1e-9:
        raise ValueError(
            f"no noise-model solution in the unit square: coherence would be {coherence:.4f}"
        )
    coherence = min(coherence, 1.0)
    predictions = CalibrationPredictions(
        mermin_m4=pc * MERMIN_M4_QUANTUM_MAX,
        mermin_m3=pc * MERMIN_M3_QUANTUM_MAX,
        fidelity_3=weight * (1.0 + coherence) / 2.0 + (1.0 - weight) / 8.0,
        epsilon_3=epsilon_mean,
    )
    return CalibrationResult(signal_weight=weight, coherence=coherence, predictions=predictions)


def _max_over_local_assignments(terms, n: int) -> float:
    """Largest |signed sum| any deterministic local model can produce.

    Every photon carries pre-assigned values for X and Y, so the search is
    exhaustive over all 2^(2n) sign assignments.
    """
    best = 0.0
    for assignment in itertools.product((1, -1), repeat=2 * n):
        xs, ys = assignment[:n], assignment[n:]
        total = 0.0
        for setting, coeff in terms:
            prod = 1
            for q, symbol in enumerate(setting):
                prod *= xs[q] if symbol == "X" else ys[q]
            total += coeff * prod
        best = max(best, abs(total))
    return best


def local_realism_bound_m4() -> float:
    """Exhaustive classical maximum of the M4 expression (equals 4)."""
    terms = [(s, MERMIN_COEFF_BY_Y_COUNT[s.count("Y")]) for s in mermin_m4_settings()]
    return _max_over_local_assignments(terms, 4)


def local_realism_bound_m3() -> float:
    """Exhaustive classical maximum of the M3 expression (equals 2)."""
    terms = [(s, MERMIN_COEFF_BY_Y_COUNT[s.count("Y")]) for s in mermin_m3_settings()]
    return _max_over_local_assignments(terms, 3)


def avn_contradiction(specs: tuple[AvnSettingSpec, ...] | None = None) -> tuple[bool, int]:
    """Symbolic core of the all-versus-nothing argument.

    For the default subset (XXXX, XXYY, XYXY, XYYX) every photon sees each
    of X and Y an even number of times, so any deterministic assignment
    makes the product of the four outcomes +1, while the predicted signs
    multiply to -1. Returns (all-even flag, product of predicted signs).
    """
    if specs is None:
        by_setting = {spec.setting: spec for spec in AVN_SPECS_4}
        specs = tuple(by_setting[s] for s in ("XXXX", "XXYY", "XYXY", "XYYX"))
    n = len(specs[0].setting)
    all_even = True
    for q in range(n):
        for symbol in "XY":
            if sum(1 for spec in specs if spec.setting[q] == symbol) % 2:
                all_even = False
    sign_product = int(np.prod([spec.predicted_sign for spec in specs]))
    return all_even, sign_product
