"""Dense operator algebra on small multi-level systems.

Everything in the toolkit is a dense complex numpy array; the largest
system is two qutrits (9x9), so there is no reason for sparse storage.
Subsystem 0 (the control qubit) is always the *left* tensor factor, so
"ZX" means Z on the control and X on the target.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_ATOL = 1e-12
UNITARY_ATOL = 1e-10

_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

PAULI_LABELS = tuple(a + b for a in "IXYZ" for b in "IXYZ")


def annihilation(d: int) -> np.ndarray:
    """Ladder (lowering) operator of a d-level oscillator."""
    if d < 2:
        raise ValueError(f"subsystem dimension must be >= 2, got {d}")
    a = np.zeros((d, d), dtype=complex)
    a[np.arange(d - 1), np.arange(1, d)] = np.sqrt(np.arange(1, d))
    return a


def creation(d: int) -> np.ndarray:
    return annihilation(d).conj().T


def number_op(d: int) -> np.ndarray:
    return np.diag(np.arange(d, dtype=float)).astype(complex)


def pauli1(label: str) -> np.ndarray:
    """Single-qubit Pauli matrix for label in {I, X, Y, Z}."""
    try:
        return _PAULI_1Q[label].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli label {label!r}") from None


def pauli(label: str) -> np.ndarray:
    """Two-qubit Pauli product, e.g. pauli("ZX") = Z (x) X."""
    if len(label) != 2 or any(c not in _PAULI_1Q for c in label):
        raise ValueError(f"invalid two-qubit Pauli label {label!r}")
    return np.kron(_PAULI_1Q[label[0]], _PAULI_1Q[label[1]])


def embed_op(op: np.ndarray, subsystem: int, dims: list[int]) -> np.ndarray:
    """Embed a single-subsystem operator into the full product space."""
    if not 0 <= subsystem < len(dims):
        raise ValueError(f"subsystem {subsystem} outside dims {dims}")
    if op.shape != (dims[subsystem], dims[subsystem]):
        raise ValueError("operator shape does not match subsystem dimension")
    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[subsystem] = op
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


def _embed_pauli1(label: str, d: int) -> np.ndarray:
    """Single-qubit Pauli on the lowest two levels of a d-level system."""
    if d < 2:
        raise ValueError(f"subsystem dimension must be >= 2, got {d}")
    m = np.zeros((d, d), dtype=complex)
    m[:2, :2] = _PAULI_1Q[label]
    return m


def embed_pauli(label: str, dims: list[int]) -> np.ndarray:
    """Two-qubit Pauli acting on the computational levels of each subsystem.

    The matrix is zero outside of the qubit block, so for "II" this is the
    projector onto the computational subspace.
    """
    if len(label) != 2 or any(c not in _PAULI_1Q for c in label):
        raise ValueError(f"invalid two-qubit Pauli label {label!r}")
    if len(dims) != 2:
        raise ValueError("embed_pauli expects two subsystems")
    return np.kron(_embed_pauli1(label[0], dims[0]), _embed_pauli1(label[1], dims[1]))


def computational_indices(dims: list[int]) -> np.ndarray:
    """Flat indices of the computational (qubit) basis states."""
    idx = []
    for i in range(2):
        for j in range(2):
            idx.append(i * dims[1] + j)
    return np.array(idx)


def project_to_qubits(op: np.ndarray, dims: list[int]) -> np.ndarray:
    """4x4 computational-subspace block of a full-space operator."""
    idx = computational_indices(dims)
    return op[np.ix_(idx, idx)]


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential; eigendecomposition fast path for (skew-)Hermitian input."""
    a = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix exponential of non-finite matrix")
    if a.shape[-1] != a.shape[-2]:
        raise ValueError("matrix exponential requires a square matrix")
    if is_hermitian(a):
        w, v = np.linalg.eigh(a)
        return (v * np.exp(w)) @ v.conj().T
    if is_hermitian(1j * a):
        # skew-Hermitian: a = -i h with h Hermitian
        w, v = np.linalg.eigh(1j * a)
        return (v * np.exp(-1j * w)) @ v.conj().T
    from scipy.linalg import expm as _scipy_expm

    return _scipy_expm(a)


def expm_herm_batch(h: np.ndarray) -> np.ndarray:
    """exp(-i h) for a stack of Hermitian matrices, batched over axis 0."""
    w, v = np.linalg.eigh(h)
    return np.einsum("...ij,...j,...kj->...ik", v, np.exp(-1j * w), v.conj())


def is_hermitian(a: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    return bool(np.max(np.abs(a - a.conj().swapaxes(-1, -2))) < atol)


def is_unitary(u: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    eye = np.eye(u.shape[-1])
    return bool(np.max(np.abs(u.conj().swapaxes(-1, -2) @ u - eye)) < atol)


def closest_unitary(a: np.ndarray) -> np.ndarray:
    """Polar projection: the unitary closest to a in Frobenius norm."""
    u, _, vh = np.linalg.svd(a)
    return u @ vh


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def kron(*ops: np.ndarray) -> np.ndarray:
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def pauli_coefficients(h: np.ndarray) -> dict[str, float]:
    """Expand a Hermitian 4x4 matrix as sum_L coeff_L * P_L / 2.

    Returns real coefficients in the H = sum c_L P_L/2 normalization used
    for two-qubit effective Hamiltonians (so c_L = tr(P_L H) / 2).
    """
    if h.shape != (4, 4):
        raise ValueError("pauli_coefficients expects a 4x4 matrix")
    return {lab: float(np.real(np.trace(pauli(lab) @ h))) / 2.0 for lab in PAULI_LABELS}
