"""Seeded Monte Carlo generation of finite-count measurement records.

A "shot" is one post-selected n-fold coincidence, not a pump pulse; pulse
level emission statistics live in :func:`ghzsim.circuit.post_selection_probability`
and :func:`rate_report`. Outcomes are indexed by bitstring with photon A as
the most significant bit; bit 0 means the +1 eigenvalue of that photon's
analyzer setting, bit 1 the -1 eigenvalue.

Reproducibility contract: every record is drawn from its own Philox
substream derived from ``SeedSequence([seed, kind, stream_tag, n, rank])``
where ``rank`` is the base-3 encoding of the setting string (X=0, Y=1, Z=2)
and ``kind`` separates count sampling from Poisson resampling. Records are
therefore bit-identical for a fixed (seed, setting, tag) regardless of the
order settings are processed in, including concurrent execution. Poisson
resampling keys one substream per resample index the same way.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .qmath import num_qubits

_STREAM_RECORD = 0
_STREAM_POISSON = 1

MAX_SEED = 2**64

# Rows are the <+|/<-| eigenbras of each analyzer basis, so stacking them as
# a unitary U per photon turns Born probabilities into diag(U rho U^dag).
_ANALYZER_BRAS = {
    "X": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0),
    "Y": np.array([[1, -1j], [1, 1j]], dtype=complex) / np.sqrt(2.0),
    "Z": np.eye(2, dtype=complex),
}


def validate_setting(setting: str, n: int | None = None) -> str:
    """Check that a measurement setting is a string over {X, Y, Z}."""
    if not setting or any(c not in "XYZ" for c in setting):
        raise ValueError(f"invalid measurement setting {setting!r}: expected symbols X, Y, Z")
    if n is not None and len(setting) != n:
        raise ValueError(f"setting {setting!r} has {len(setting)} symbols, expected {n}")
    return setting


def setting_rank(setting: str) -> int:
    """Base-3 value of a setting (X=0, Y=1, Z=2); keys that setting's RNG substream."""
    validate_setting(setting)
    rank = 0
    for c in setting:
        rank = 3 * rank + "XYZ".index(c)
    return rank


@dataclass(frozen=True)
class SamplerConfig:
    """Shot budget, accidental background, and RNG seed for one experiment."""

    shots_per_setting: int = 470
    accidental_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.shots_per_setting < 0:
            raise ValueError("shots_per_setting must be non-negative")
        if not 0.0 <= self.accidental_fraction <= 1.0:
            raise ValueError("accidental_fraction must lie in [0, 1]")
        if not 0 <= self.seed < MAX_SEED:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(eq=False)
class CountRecord:
    """One measurement setting plus its 2^n-bin outcome histogram.

    Counts are stored as floats so that exact (infinite-statistics) records
    can carry non-integer values; sampled records and the JSON interchange
    format are integer-valued.
    """

    setting: str
    counts: np.ndarray = field(repr=False)
    shots: int

    def __post_init__(self) -> None:
        validate_setting(self.setting)
        self.counts = np.asarray(self.counts, dtype=float)
        expected = 2 ** len(self.setting)
        if self.counts.shape != (expected,):
            raise ValueError(
                f"record for {self.setting!r} needs {expected} count bins, "
                f"got shape {self.counts.shape}"
            )
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")
        if self.shots < 0:
            raise ValueError("shots must be non-negative")
        if self.counts.sum() > self.shots + 1e-6:
            raise ValueError(
                f"counts sum to {self.counts.sum()!r}, more than shots = {self.shots}"
            )

    @property
    def n(self) -> int:
        return len(self.setting)


def outcome_probabilities(rho: np.ndarray, setting: str) -> np.ndarray:
    """Born probabilities of all 2^n analyzer outcomes for one setting."""
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits(rho.shape[0])
    validate_setting(setting, n)
    basis_change = np.array([[1.0 + 0j]])
    for c in setting:
        basis_change = np.kron(basis_change, _ANALYZER_BRAS[c])
    probs = np.real(np.einsum("ij,jk,ik->i", basis_change, rho, basis_change.conj()))
    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"outcome probabilities sum to {total!r}; state is not normalized")
    return probs


def outcome_signs(n: int, active: str | None = None) -> np.ndarray:
    """Eigenvalue products (+/-1) per outcome bitstring.

    ``active`` restricts the product to the non-I positions of a Pauli
    string of length n; by default every position contributes.
    """
    outcomes = np.arange(2**n)
    parity = np.zeros(2**n, dtype=int)
    for q in range(n):
        if active is None or active[q] != "I":
            parity += (outcomes >> (n - 1 - q)) & 1
    return 1 - 2 * (parity % 2)


def record_stream(seed: int, setting: str, stream_tag: int = 0) -> np.random.Generator:
    """Philox substream for one record; see the module docstring for the key."""
    key = np.random.SeedSequence(
        [int(seed), _STREAM_RECORD, int(stream_tag), len(setting), setting_rank(setting)]
    )
    return np.random.Generator(np.random.Philox(key))


def resample_stream(seed: int, resample_index: int, stream_tag: int = 0) -> np.random.Generator:
    """Philox substream for one Poisson resample."""
    key = np.random.SeedSequence(
        [int(seed), _STREAM_POISSON, int(stream_tag), int(resample_index)]
    )
    return np.random.Generator(np.random.Philox(key))


def sample_record(
    rho: np.ndarray, setting: str, cfg: SamplerConfig, stream_tag: int = 0
) -> CountRecord:
    """Draw a multinomial count histogram for one setting.

    The outcome distribution is (1 - a) * Born + a * uniform with
    a = cfg.accidental_fraction. Sampling is inverse-CDF on the outcome
    cumulative distribution, so zero-probability outcomes are never drawn,
    and the record depends only on (seed, setting, stream_tag).
    """
    probs = outcome_probabilities(rho, setting)
    dim = probs.size
    a = cfg.accidental_fraction
    mixed = (1.0 - a) * probs + a / dim
    cdf = np.cumsum(mixed)
    cdf /= cdf[-1]
    rng = record_stream(cfg.seed, setting, stream_tag)
    draws = np.searchsorted(cdf, rng.random(cfg.shots_per_setting), side="right")
    counts = np.bincount(draws, minlength=dim).astype(float)
    return CountRecord(setting=setting, counts=counts, shots=cfg.shots_per_setting)


def sample_experiment(
    rho: np.ndarray, settings, cfg: SamplerConfig, stream_tag: int = 0
) -> list[CountRecord]:
    """One record per setting; per-setting substreams make the result
    independent of iteration order."""
    return [sample_record(rho, s, cfg, stream_tag) for s in settings]


def exact_record(rho: np.ndarray, setting: str, shots: int = 1) -> CountRecord:
    """Infinite-statistics record: counts = Born probabilities * shots."""
    probs = outcome_probabilities(rho, setting)
    return CountRecord(setting=setting, counts=probs * shots, shots=shots)


def poisson_resampled_counts(
    counts: np.ndarray, resamples: int, seed: int, stream_tag: int = 0
) -> np.ndarray:
    """Redraw every count from a Poisson law with mean equal to the count.

    ``counts`` has shape (records, outcomes); the result has shape
    (resamples, records, outcomes). Observed zeros resample to zero.
    """
    counts = np.asarray(counts, dtype=float)
    if resamples < 1:
        raise ValueError("resamples must be positive")
    out = np.empty((resamples,) + counts.shape)
    for r in range(resamples):
        out[r] = resample_stream(seed, r, stream_tag).poisson(counts)
    return out


def records_to_document(records) -> dict:
    """Serialize records to the JSON interchange document.

    Field order is canonical: {"n": ..., "records": [{"setting", "counts",
    "shots"}, ...]}. Counts must be integer-valued on the wire.
    """
    records = list(records)
    if not records:
        raise ValueError("cannot serialize an empty record list")
    n = records[0].n
    body = []
    for rec in records:
        if rec.n != n:
            raise ValueError("records mix different qubit counts")
        rounded = np.rint(rec.counts)
        if np.max(np.abs(rounded - rec.counts)) > 1e-9:
            raise ValueError(
                f"record {rec.setting!r} has non-integer counts; only measured "
                "or sampled records can be serialized"
            )
        body.append(
            {
                "setting": rec.setting,
                "counts": [int(x) for x in rounded],
                "shots": int(rec.shots),
            }
        )
    return {"n": n, "records": body}


def records_from_document(doc: dict) -> list[CountRecord]:
    """Parse the JSON interchange document back into records."""
    n = int(doc["n"])
    records = []
    for item in doc["records"]:
        setting = validate_setting(str(item["setting"]), n)
        records.append(
            CountRecord(
                setting=setting,
                counts=np.asarray(item["counts"], dtype=float),
                shots=int(item["shots"]),
            )
        )
    return records


def save_records(path, records) -> None:
    Path(path).write_text(json.dumps(records_to_document(records), indent=2) + "\n")


def load_records(path) -> list[CountRecord]:
    return records_from_document(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class RatePlan:
    """Linear bookkeeping from configured rates to expected shots."""

    hours: float
    pump_pulses: float
    pairs_per_source: float
    expected_fourfolds: float


def rate_report(
    pair_rate_hz: float,
    repetition_hz: float,
    fourfold_rate_per_hour: float,
    hours: float,
) -> RatePlan:
    """Expected counts over a wall-clock duration; no physics is derived here."""
    if pair_rate_hz <= 0 or repetition_hz <= 0 or fourfold_rate_per_hour <= 0:
        raise ValueError("rates must be positive")
    if hours < 0:
        raise ValueError("duration must be non-negative")
    seconds = 3600.0 * hours
    return RatePlan(
        hours=hours,
        pump_pulses=repetition_hz * seconds,
        pairs_per_source=pair_rate_hz * seconds,
        expected_fourfolds=fourfold_rate_per_hour * hours,
    )
