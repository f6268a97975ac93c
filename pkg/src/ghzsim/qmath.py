"""Dense complex linear algebra for small multi-qubit states.

Qubit ordering convention, used everywhere in this package: photon A is
qubit 0 and occupies the *most significant* bit of every computational-basis
index. So for four photons (A, B, C, D) the basis state |0110> has index 6,
and ``pauli_matrix("XYZI")`` applies X to photon A.

States live in dense complex128 numpy arrays; the largest object handled is
16 x 16, so there is no sparsity or stabilizer machinery here.
"""

from __future__ import annotations

import numpy as np

# Exact-algebra tolerance, PSD eigenvalue slack, and the imaginary residue
# allowed when extracting a real number from a trace.
ATOL_ALGEBRA = 1e-12
ATOL_PSD = 1e-9
ATOL_IMAG = 1e-10

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def num_qubits(dim: int) -> int:
    """Return n for dim = 2^n, rejecting non-power-of-two dimensions."""
    n = int(dim).bit_length() - 1
    if dim <= 0 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; the left factor becomes the most significant subsystem."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def tensor(ops) -> np.ndarray:
    """Kronecker product of a sequence of operators, left to right."""
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = kron(out, op)
    return out


def basis_vector(n: int, index: int) -> np.ndarray:
    """Computational-basis ket |index> on n qubits."""
    if not 0 <= index < 2**n:
        raise ValueError(f"basis index {index} out of range for {n} qubits")
    v = np.zeros(2**n, dtype=complex)
    v[index] = 1.0
    return v


def pauli_matrix(symbols: str) -> np.ndarray:
    """Tensor product of single-qubit Paulis, e.g. "XXYY" or "IZZI".

    The leftmost symbol acts on photon A (most significant index bit).
    """
    try:
        return tensor(PAULI_1Q[c] for c in symbols)
    except KeyError as exc:
        raise ValueError(f"invalid Pauli symbol {exc.args[0]!r} in {symbols!r}") from None


def expectation(rho: np.ndarray, symbols: str) -> float:
    """Tr(rho P) for the Pauli string P; the result is real for Hermitian rho."""
    rho = np.asarray(rho, dtype=complex)
    pauli = pauli_matrix(symbols)
    if rho.shape != pauli.shape:
        raise ValueError(
            f"dimension mismatch: state is {rho.shape[0]}-dimensional, "
            f"Pauli string {symbols!r} is {pauli.shape[0]}-dimensional"
        )
    value = complex(np.trace(rho @ pauli))
    if abs(value.imag) > ATOL_IMAG:
        raise ValueError(f"expectation has imaginary residue {value.imag:.3e}")
    return float(value.real)


def partial_trace(rho: np.ndarray, keep) -> np.ndarray:
    """Trace out every qubit not named in ``keep``, preserving qubit order."""
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits(rho.shape[0])
    kept = sorted({int(q) for q in keep})
    if not kept:
        raise ValueError("keep must name at least one qubit")
    if kept[0] < 0 or kept[-1] >= n:
        raise ValueError(f"qubit indices {kept} out of range for {n} qubits")
    tensor_form = rho.reshape((2,) * (2 * n))
    remaining = n
    for q in sorted(set(range(n)) - set(kept), reverse=True):
        tensor_form = np.trace(tensor_form, axis1=q, axis2=q + remaining)
        remaining -= 1
    return tensor_form.reshape(2**remaining, 2**remaining)


def fidelity_with_pure(rho: np.ndarray, psi: np.ndarray) -> float:
    """<psi|rho|psi>, clamped into [0, 1]; psi must be normalized."""
    rho = np.asarray(rho, dtype=complex)
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if rho.shape != (psi.size, psi.size):
        raise ValueError(
            f"dimension mismatch: state is {rho.shape[0]}-dimensional, "
            f"target vector has {psi.size} entries"
        )
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > ATOL_ALGEBRA:
        raise ValueError(f"target vector is not normalized: |psi| = {norm!r}")
    value = complex(psi.conj() @ rho @ psi)
    if abs(value.imag) > ATOL_IMAG:
        raise ValueError(f"fidelity has imaginary residue {value.imag:.3e}")
    return float(min(max(value.real, 0.0), 1.0))


def project_qubit(rho: np.ndarray, qubit: int, direction) -> tuple[np.ndarray, float]:
    """Project one qubit onto a single-qubit state and drop it.

    Returns the renormalized conditional state on the remaining qubits and
    the outcome probability Tr[(|d><d| (x) 1) rho]. Raises when the outcome
    probability is below 1e-12 (conditioning on an impossible outcome).
    """
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits(rho.shape[0])
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} out of range for {n} qubits")
    d = np.asarray(direction, dtype=complex).reshape(2)
    norm = float(np.linalg.norm(d))
    if abs(norm - 1.0) > ATOL_ALGEBRA:
        raise ValueError(f"projection direction is not normalized: |d| = {norm!r}")
    tensor_form = rho.reshape((2,) * (2 * n))
    # Contract the bra side then the ket side of the projected qubit.
    contracted = np.tensordot(d.conj(), tensor_form, axes=(0, qubit))
    contracted = np.tensordot(contracted, d, axes=((n - 1) + qubit, 0))
    conditional = contracted.reshape(2 ** (n - 1), 2 ** (n - 1))
    prob = complex(np.trace(conditional))
    if abs(prob.imag) > ATOL_IMAG:
        raise ValueError(f"projection probability has imaginary residue {prob.imag:.3e}")
    p = prob.real
    if p < 1e-12:
        raise ValueError(f"projection probability {p:.3e} below 1e-12; outcome is impossible")
    return conditional / p, float(min(max(p, 0.0), 1.0))


def hermiticity_defect(m: np.ndarray) -> float:
    """Largest entrywise deviation of m from its conjugate transpose."""
    m = np.asarray(m, dtype=complex)
    return float(np.max(np.abs(m - m.conj().T)))


def check_density_matrix(
    rho: np.ndarray,
    *,
    atol_herm: float = ATOL_ALGEBRA,
    atol_trace: float = ATOL_ALGEBRA,
    atol_psd: float = ATOL_PSD,
) -> np.ndarray:
    """Validate Hermiticity, unit trace, and positive semidefiniteness.

    Eigenvalues are taken from the Hermitian part with a Hermitian solver;
    an asymmetric input is reported through the Hermiticity error first.
    Returns the input unchanged so calls can be chained.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {rho.shape}")
    num_qubits(rho.shape[0])
    defect = hermiticity_defect(rho)
    if defect > atol_herm:
        raise ValueError(f"not Hermitian: max |rho - rho^dag| = {defect:.3e}")
    trace = complex(np.trace(rho))
    if abs(trace - 1.0) > atol_trace:
        raise ValueError(f"trace is {trace!r}, expected 1")
    lowest = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min())
    if lowest < -atol_psd:
        raise ValueError(f"not positive semidefinite: min eigenvalue {lowest:.3e}")
    return rho


def matrix_to_parts(m: np.ndarray) -> tuple[list[list[float]], list[list[float]]]:
    """Split a complex matrix into real/imaginary nested lists for JSON.

    Python's JSON float formatting round-trips doubles exactly, so storage
    through this representation is bit-exact.
    """
    m = np.asarray(m, dtype=complex)
    return m.real.tolist(), m.imag.tolist()


def matrix_from_parts(re, im) -> np.ndarray:
    """Inverse of :func:`matrix_to_parts`."""
    return np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)
