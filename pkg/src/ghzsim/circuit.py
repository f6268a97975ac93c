"""Analytic models of the GHZ photonic chip.

Covers the two Bell-pair source modules, the path-parity sorter (PPS) with
its post-selection rule, the noisy GHZ mixture used throughout the package,
and the two interference-fringe formulas (path-correlation and heralded
Hong-Ou-Mandel).

The noise model for an n-photon GHZ state is a two-parameter mixture

    rho = p * [ (|0..0><0..0| + |1..1><1..1|) / 2
                + (c/2) (e^{-i phi} |0..0><1..1| + e^{i phi} |1..1><0..0|) ]
        + (1 - p) * 1 / 2^n

where p is the weight of the GHZ component (1 - p is white noise), c is the
coherence surviving dephasing, and phi is the relative phase carried by the
|1..1> ket. White noise alone cannot match both the measured fidelity and
the measured Mermin value; the (p, c) pair can (see nonlocality.calibrate).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .qmath import basis_vector, check_density_matrix

TWO_PI = 2.0 * np.pi


def _check_unit_interval(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


@dataclass(frozen=True)
class NoiseParams:
    """Imperfection parameters of the simulated chip.

    signal_weight   weight p of the GHZ component; 1 - p is white noise
    coherence       off-diagonal GHZ coherence c in [0, 1]
    phase           relative phase phi on |1..1>, in [0, 2*pi)
    overlap         spectral overlap sigma between the two signal photons
    purity          heralded single-photon spectral purity
    visibility_s1   path-correlation visibility of source module S1
    visibility_s2   path-correlation visibility of source module S2
    """

    signal_weight: float = 1.0
    coherence: float = 1.0
    phase: float = 0.0
    overlap: float = 1.0
    purity: float = 1.0
    visibility_s1: float = 1.0
    visibility_s2: float = 1.0

    def __post_init__(self) -> None:
        for name in ("signal_weight", "coherence", "overlap", "purity",
                     "visibility_s1", "visibility_s2"):
            _check_unit_interval(name, getattr(self, name))
        if not 0.0 <= self.phase < TWO_PI:
            raise ValueError(f"phase must lie in [0, 2*pi), got {self.phase!r}")


@dataclass(frozen=True)
class PairEmissionEvent:
    """Number of photon pairs emitted by each source module in one pulse."""

    n1: int
    n2: int

    def __post_init__(self) -> None:
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError("pair counts must be non-negative")


@dataclass(frozen=True)
class PpsRouting:
    """Where the two signal photons exit the parity sorter."""

    photon_b_exit: str
    photon_c_exit: str
    coincidence: bool


def bell_vector() -> np.ndarray:
    """|Psi2> = (|00> + |11>) / sqrt(2), the state emitted by each source."""
    return (basis_vector(2, 0) + basis_vector(2, 3)) / np.sqrt(2.0)


def ghz_vector(n: int, phase: float = 0.0) -> np.ndarray:
    """(|0..0> + e^{i phase} |1..1>) / sqrt(2) on n qubits."""
    v = np.zeros(2**n, dtype=complex)
    v[0] = 1.0 / np.sqrt(2.0)
    v[-1] = np.exp(1j * phase) / np.sqrt(2.0)
    return v


def bell_state(visibility: float) -> np.ndarray:
    """Werner form of one source module: v |Psi2><Psi2| + (1 - v) 1/4."""
    v = _check_unit_interval("visibility", visibility)
    psi = bell_vector()
    return v * np.outer(psi, psi.conj()) + (1.0 - v) * np.eye(4) / 4.0


def fidelity_from_visibility(visibility: float) -> float:
    """Werner-state fidelity F = (1 + 3V) / 4 of a source with visibility V."""
    v = _check_unit_interval("visibility", visibility)
    return (1.0 + 3.0 * v) / 4.0


def pps_route(input_mode_b: int, input_mode_c: int) -> PpsRouting:
    """Route photons B and C through the path-parity sorter.

    Mode-1 photons swap output arms, mode-0 photons keep theirs, so a B-C
    coincidence survives exactly when the two input modes are equal.
    """
    if input_mode_b not in (0, 1) or input_mode_c not in (0, 1):
        raise ValueError("path modes must be 0 or 1")
    b_exit = "B" if input_mode_b == 0 else "C"
    c_exit = "C" if input_mode_c == 0 else "B"
    return PpsRouting(b_exit, c_exit, coincidence=(b_exit != c_exit))


def ghz_mixture(n: int, signal_weight: float, coherence: float, phase: float) -> np.ndarray:
    """Noisy n-photon GHZ density matrix (see the module docstring)."""
    dim = 2**n
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = signal_weight / 2.0
    rho[-1, -1] = signal_weight / 2.0
    off = signal_weight * coherence / 2.0
    rho[0, -1] = off * np.exp(-1j * phase)
    rho[-1, 0] = off * np.exp(1j * phase)
    rho += (1.0 - signal_weight) * np.eye(dim) / dim
    return check_density_matrix(rho)


def ghz4_state(noise: NoiseParams) -> np.ndarray:
    """Four-photon GHZ state produced by post-selection at the sorter outputs."""
    return ghz_mixture(4, noise.signal_weight, noise.coherence, noise.phase)


def ghz3_state(noise: NoiseParams) -> np.ndarray:
    """Three-photon GHZ state left after projecting one photon onto |+>.

    Equals ``project_qubit(ghz4_state(noise), q, |+>)`` for every choice of
    q; the closed form reuses the same (p, c, phi) on 3 qubits.
    """
    return ghz_mixture(3, noise.signal_weight, noise.coherence, noise.phase)


def poisson_two_pair_distribution() -> dict[PairEmissionEvent, float]:
    """Distribution of (n1, n2) among two-pair events for equal-mean sources.

    Independent Poisson emission with equal means, conditioned on exactly
    two pairs in total, is binomial: (2,0) and (0,2) with weight 1/4 each,
    (1,1) with weight 1/2.
    """
    return {
        PairEmissionEvent(2, 0): 0.25,
        PairEmissionEvent(1, 1): 0.5,
        PairEmissionEvent(0, 2): 0.25,
    }


def post_selection_probability(stats: Mapping | None = None) -> float:
    """Probability that a four-photon emission event yields the GHZ state.

    ``stats`` is a normalized distribution over two-pair emission events,
    keyed by PairEmissionEvent or (n1, n2) tuples. Only the (1, 1) events
    can put one photon at each sorter output, and half of those survive the
    parity match, so the result is P(1,1) / 2. Both-pairs-from-one-source
    events leave an output dark and contribute nothing. Defaults to the
    equal-mean Poisson distribution, which gives 0.25.
    """
    if stats is None:
        stats = poisson_two_pair_distribution()
    total = 0.0
    p11 = 0.0
    for key, weight in stats.items():
        event = key if isinstance(key, PairEmissionEvent) else PairEmissionEvent(*key)
        if event.n1 + event.n2 != 2:
            raise ValueError(f"not a two-pair event: {event}")
        if weight < 0.0:
            raise ValueError(f"negative probability {weight!r} for {event}")
        total += weight
        if event == PairEmissionEvent(1, 1):
            p11 = weight
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"emission distribution sums to {total!r}, expected 1")
    return p11 / 2.0


def path_correlation_fringe(visibility: float, phi: float) -> float:
    """Two-fold coincidence probability CC(phi) = (1 + V cos phi) / 4.

    This is the fringe traced out when the idler analyzer sits at |+> and
    the signal analyzer phase phi is scanned; its visibility
    (CC_max - CC_min) / (CC_max + CC_min) equals V exactly.
    """
    v = _check_unit_interval("visibility", visibility)
    return (1.0 + v * np.cos(phi)) / 4.0


def hhom_fringe(overlap: float, purity: float, transmittance: float) -> float:
    """Heralded-HOM coincidence vs MZI transmittance, normalized to max 1.

    CC(t) = t^2 + (1-t)^2 - 2 t (1-t) sigma^2 Pur, so CC(0) = CC(1) = 1 and
    CC(1/2) = (1 - sigma^2 Pur) / 2.
    """
    sigma = _check_unit_interval("overlap", overlap)
    pur = _check_unit_interval("purity", purity)
    t = _check_unit_interval("transmittance", transmittance)
    return t**2 + (1.0 - t) ** 2 - 2.0 * t * (1.0 - t) * sigma**2 * pur


def hhom_visibility(overlap: float, purity: float) -> float:
    """Heralded-HOM visibility (CC_max/2 - CC_min) / (CC_max/2) = sigma^2 Pur."""
    sigma = _check_unit_interval("overlap", overlap)
    pur = _check_unit_interval("purity", purity)
    return sigma**2 * pur
