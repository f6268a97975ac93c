"""Quantum state tomography from count records.

Reconstruction is linear inversion over the Pauli basis followed by a
projection onto the physical set (eigenvalue clipping with simplex
renormalization of the spectrum), which is the Frobenius-nearest density
matrix to the inverted estimate. Uncertainties come from Monte Carlo
resampling with Poisson counting statistics: every observed count is
redrawn from a Poisson law with mean equal to the count, the state is
reconstructed again, and the spread of the derived quantity is reported.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .qmath import fidelity_with_pure, check_density_matrix, hermiticity_defect, pauli_matrix
from .sampler import CountRecord, outcome_signs, poisson_resampled_counts


@dataclass(frozen=True)
class UncertainValue:
    """A point value with a one-standard-deviation Monte Carlo error bar."""

    value: float
    sigma: float
    resamples: int

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.resamples < 1:
            raise ValueError("resamples must be positive")

    def to_dict(self) -> dict:
        return {"value": self.value, "sigma": self.sigma, "resamples": self.resamples}


def enumerate_settings(n: int) -> list[str]:
    """All 3^n measurement settings in lexicographic X < Y < Z order."""
    if not 1 <= n <= 4:
        raise ValueError(f"qubit count must be between 1 and 4, got {n}")
    return ["".join(t) for t in itertools.product("XYZ", repeat=n)]


@dataclass(eq=False)
class TomographySet:
    """A complete set of 3^n count records, one per measurement setting."""

    n: int
    records: list[CountRecord]

    def __post_init__(self) -> None:
        wanted = enumerate_settings(self.n)
        seen = {}
        for rec in self.records:
            if rec.n != self.n:
                raise ValueError(f"record {rec.setting!r} does not act on {self.n} qubits")
            if rec.setting in seen:
                raise ValueError(f"duplicate record for setting {rec.setting!r}")
            if rec.shots <= 0:
                raise ValueError(f"record {rec.setting!r} has no shots")
            seen[rec.setting] = rec
        missing = [s for s in wanted if s not in seen]
        if missing:
            raise ValueError(f"tomography set is missing {len(missing)} settings, e.g. {missing[0]!r}")
        self._by_setting = seen
        self._ordered = [seen[s] for s in wanted]

    @classmethod
    def from_records(cls, records) -> "TomographySet":
        records = list(records)
        if not records:
            raise ValueError("no records supplied")
        return cls(n=records[0].n, records=records)

    def record(self, setting: str) -> CountRecord:
        try:
            return self._by_setting[setting]
        except KeyError:
            raise ValueError(f"missing record for setting {setting!r}") from None

    def counts_matrix(self) -> np.ndarray:
        """Counts stacked as (3^n, 2^n) in enumerate_settings order."""
        return np.stack([rec.counts for rec in self._ordered])

    def shots_vector(self) -> np.ndarray:
        return np.array([rec.shots for rec in self._ordered], dtype=float)


@lru_cache(maxsize=None)
def _pauli_strings(n: int) -> tuple[str, ...]:
    return tuple("".join(t) for t in itertools.product("IXYZ", repeat=n))


@lru_cache(maxsize=None)
def _pauli_stack(n: int) -> np.ndarray:
    return np.stack([pauli_matrix(s) for s in _pauli_strings(n)])


@lru_cache(maxsize=None)
def _estimation_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Per Pauli string: index of its canonical setting, and outcome signs.

    The canonical compatible setting substitutes X at every I position; the
    sign vector multiplies only the non-I positions, which marginalizes the
    I positions out of that setting's histogram.
    """
    position = {s: i for i, s in enumerate(enumerate_settings(n))}
    strings = _pauli_strings(n)
    setting_index = np.empty(len(strings), dtype=np.intp)
    signs = np.empty((len(strings), 2**n))
    for k, s in enumerate(strings):
        setting_index[k] = position[s.replace("I", "X")]
        signs[k] = outcome_signs(n, active=s)
    return setting_index, signs


def _expectations(n: int, counts: np.ndarray, totals: np.ndarray) -> np.ndarray:
    """Estimates of all 4^n Pauli expectations from stacked counts.

    ``counts`` has shape (..., 3^n, 2^n) and ``totals`` (..., 3^n). The
    identity string is pinned to exactly 1.
    """
    setting_index, signs = _estimation_tables(n)
    freq = counts / np.where(totals > 0, totals, 1.0)[..., None]
    values = np.einsum("ko,...ko->...k", signs, freq[..., setting_index, :])
    values[..., 0] = 1.0
    return values


def pauli_expectation_from_counts(tset: TomographySet, pauli_string: str) -> float:
    """Estimate <P> for a Pauli string over {I, X, Y, Z} from the record set."""
    if len(pauli_string) != tset.n or any(c not in "IXYZ" for c in pauli_string):
        raise ValueError(f"invalid Pauli string {pauli_string!r} for {tset.n} qubits")
    if set(pauli_string) == {"I"}:
        return 1.0
    rec = tset.record(pauli_string.replace("I", "X"))
    signs = outcome_signs(tset.n, active=pauli_string)
    return float(signs @ rec.counts / rec.shots)


def linear_inversion(tset: TomographySet) -> np.ndarray:
    """rho = 2^-n sum_s <s> P_s over all 4^n Pauli strings.

    Hermitian with unit trace by construction; finite counts can leave
    negative eigenvalues, which is expected and handled downstream by
    :func:`physical_projection`.
    """
    values = _expectations(tset.n, tset.counts_matrix(), tset.shots_vector())
    rho = np.tensordot(values, _pauli_stack(tset.n), axes=(0, 0)) / 2**tset.n
    return rho


def _spectra_to_simplex(eigenvalues: np.ndarray) -> np.ndarray:
    """Euclidean projection of spectra (last axis) onto the probability simplex."""
    dim = eigenvalues.shape[-1]
    descending = np.sort(eigenvalues, axis=-1)[..., ::-1]
    running = np.cumsum(descending, axis=-1)
    ks = np.arange(1, dim + 1)
    feasible = descending - (running - 1.0) / ks > 0
    k = feasible.sum(axis=-1)
    shift = (np.take_along_axis(running, k[..., None] - 1, axis=-1)[..., 0] - 1.0) / k
    return np.clip(eigenvalues - shift[..., None], 0.0, None)


def physical_projection(hermitian: np.ndarray) -> np.ndarray:
    """Nearest density matrix in Frobenius norm to a Hermitian matrix.

    Eigenvectors are kept; the spectrum is projected onto the probability
    simplex (negative eigenvalues clipped, remainder renormalized). The
    projection is the identity on anything that is already physical.
    """
    hermitian = np.asarray(hermitian, dtype=complex)
    defect = hermiticity_defect(hermitian)
    if defect > 1e-10:
        raise ValueError(f"input is not Hermitian: max |h - h^dag| = {defect:.3e}")
    sym = (hermitian + hermitian.conj().T) / 2
    eigenvalues, vectors = np.linalg.eigh(sym)
    clipped = _spectra_to_simplex(eigenvalues)
    rho = (vectors * clipped) @ vectors.conj().T
    rho = (rho + rho.conj().T) / 2
    return check_density_matrix(rho)


def reconstruct(tset: TomographySet) -> np.ndarray:
    """Full reconstruction: linear inversion then physical projection."""
    return physical_projection(linear_inversion(tset))


def fidelity_with_uncertainty(
    tset: TomographySet,
    target: np.ndarray,
    resamples: int = 1000,
    seed: int = 0,
    stream_tag: int = 0,
) -> UncertainValue:
    """Reconstruction fidelity with a pure target, plus its Poisson error bar.

    The point value is the fidelity of the un-resampled reconstruction. For
    each resample every count is redrawn from Poisson(observed count), the
    state is reconstructed, and sigma is the sample standard deviation of
    the resulting fidelities. Resampled expectation estimates divide by the
    redrawn totals, so observed zeros stay zero and empty redraws are inert.
    """
    if resamples < 100:
        raise ValueError(f"resamples must be at least 100, got {resamples}")
    target = np.asarray(target, dtype=complex).reshape(-1)
    value = fidelity_with_pure(reconstruct(tset), target)

    redrawn = poisson_resampled_counts(tset.counts_matrix(), resamples, seed, stream_tag)
    values = _expectations(tset.n, redrawn, redrawn.sum(axis=-1))
    rhos = np.tensordot(values, _pauli_stack(tset.n), axes=(-1, 0)) / 2**tset.n
    eigenvalues, vectors = np.linalg.eigh(rhos)
    clipped = _spectra_to_simplex(eigenvalues)
    amplitudes = np.einsum("j,rjk->rk", target.conj(), vectors)
    fidelities = np.einsum("rk,rk->r", clipped, np.abs(amplitudes) ** 2)
    sigma = float(np.std(fidelities, ddof=1))
    return UncertainValue(value=value, sigma=sigma, resamples=resamples)
