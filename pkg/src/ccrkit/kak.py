"""Cartan (KAK) decomposition of two-qubit unitaries.

A two-qubit gate U factors as ``U = exp(i*phase) (k1l x k1r) A(c) (k2l x k2r)``
with ``A(c) = exp(-i sum_k c_k sigma_k x sigma_k / 2)``.  The coefficient
triple ``c`` is reduced to a fixed fundamental cell of the Weyl chamber:

    pi/2 >= c1 >= c2 >= |c3|,   c1, c2 >= 0,
    c3 >= 0 whenever c1 = pi/2 or the class is mirror-symmetric.

``c3`` carries a sign only for gates whose mirror image is not locally
equivalent to themselves; every gate appearing in this toolkit (CNOT,
iSWAP, SWAP, XY-family entanglers) canonicalizes to c3 >= 0.

The algorithm is the standard magic-basis one: rotate U into the Bell
(magic) basis, factor the resulting matrix as O1 * diag(exp(i theta)) * O2
with real special-orthogonal O1, O2 via simultaneous diagonalization of
the symmetric matrix M^T M, and read the Cartan angles off the phases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import closest_unitary, expm, kron, pauli, pauli1

# Magic (Bell) basis change.
MAGIC = np.array(
    [
        [1, 0, 0, 1j],
        [0, 1j, 1, 0],
        [0, 1j, -1, 0],
        [1, 0, 0, -1j],
    ],
    dtype=complex,
) / np.sqrt(2)

_SIGMA = {1: pauli1("X"), 2: pauli1("Y"), 3: pauli1("Z")}

# diag patterns of sigma_k x sigma_k in the magic basis (each is diagonal
# there); row k of _D is that +-1 pattern.
_D = np.zeros((3, 4))
for _k in (1, 2, 3):
    _m = MAGIC.conj().T @ kron(_SIGMA[_k], _SIGMA[_k]) @ MAGIC
    _D[_k - 1] = np.real(np.diag(_m))

# theta_j = phase + sum_k (-c_k/2) d_kj ; solve via _T @ [phase, c] = theta
_T = np.hstack([np.ones((4, 1)), -_D.T / 2.0])
_T_INV = np.linalg.inv(_T)


@dataclass(frozen=True)
class CartanCoefficients:
    c1: float
    c2: float
    c3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3])


@dataclass(frozen=True)
class KakDecomposition:
    k1_left: np.ndarray
    k1_right: np.ndarray
    k2_left: np.ndarray
    k2_right: np.ndarray
    coefficients: CartanCoefficients
    global_phase: float

    def reconstruct(self) -> np.ndarray:
        a = canonical_gate(self.coefficients.as_array())
        return (
            np.exp(1j * self.global_phase)
            * kron(self.k1_left, self.k1_right)
            @ a
            @ kron(self.k2_left, self.k2_right)
        )


def canonical_gate(c: np.ndarray) -> np.ndarray:
    """A(c) = exp(-i sum c_k sigma_k x sigma_k / 2)."""
    gen = sum(c[k - 1] * kron(_SIGMA[k], _SIGMA[k]) for k in (1, 2, 3))
    return expm(-0.5j * gen)


def _simultaneously_diagonalize_symmetric(p: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Real orthogonal O with O^T p O diagonal, for complex symmetric unitary p.

    Re(p) and Im(p) are commuting real symmetric matrices; diagonalize the
    real part first, then the imaginary part inside each degenerate block.
    """
    a, b = np.real(p), np.imag(p)
    w, o = np.linalg.eigh(a)
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[start] > tol:
            if i - start > 1:
                block = o[:, start:i]
                sub = block.T @ b @ block
                _, o2 = np.linalg.eigh((sub + sub.T) / 2)
                o[:, start:i] = block @ o2
            start = i
    return o


def _factor_local(k4: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Split a (phase x local) 4x4 unitary into (a, b, phase) with det a = det b = 1."""
    m = k4.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(m)
    if s[1] > 1e-6:
        raise ValueError("matrix is not a tensor product of single-qubit unitaries")
    a = (u[:, 0] * np.sqrt(s[0])).reshape(2, 2)
    b = (vh[0] * np.sqrt(s[0])).reshape(2, 2)
    phase = 0.0
    for mat in (a, b):
        det = np.linalg.det(mat)
        root = np.sqrt(det + 0j)
        mat /= root
        phase += float(np.angle(root))
    return a, b, phase


class _State:
    """Mutable (phase, k1, c, k2) tuple with the Weyl-chamber moves."""

    def __init__(self, phase: float, c: np.ndarray):
        self.phase = phase
        self.c = np.array(c, dtype=float)
        self.k1l = np.eye(2, dtype=complex)
        self.k1r = np.eye(2, dtype=complex)
        self.k2l = np.eye(2, dtype=complex)
        self.k2r = np.eye(2, dtype=complex)

    def shift(self, k: int, n: int) -> None:
        # c_k -> c_k + pi*n, compensated by sigma_k x sigma_k locals and phase
        if n == 0:
            return
        self.c[k] += np.pi * n
        s = np.linalg.matrix_power(_SIGMA[k + 1], n % 4)
        self.k1l = self.k1l @ s
        self.k1r = self.k1r @ s
        self.phase += n * np.pi / 2

    def negate_pair(self, j: int, k: int) -> None:
        # (c_j, c_k) -> (-c_j, -c_k) via conjugation by sigma_l on qubit 0
        l = 3 - j - k
        self.c[j] = -self.c[j]
        self.c[k] = -self.c[k]
        s = _SIGMA[l + 1]
        self.k1l = self.k1l @ s
        self.k2l = s @ self.k2l

    def swap(self, j: int, k: int) -> None:
        # exchange c_j, c_k via the pi rotation about the (j+k) axis on both qubits
        if j == k:
            return
        s = expm(-0.5j * np.pi * (_SIGMA[j + 1] + _SIGMA[k + 1]) / np.sqrt(2))
        self.c[[j, k]] = self.c[[k, j]]
        sd = s.conj().T
        self.k1l = self.k1l @ sd
        self.k1r = self.k1r @ sd
        self.k2l = s @ self.k2l
        self.k2r = s @ self.k2r


_BOUNDARY_TOL = 1e-12


def _canonicalize(phase: float, c_raw: np.ndarray) -> _State:
    st = _State(phase, c_raw)
    # bring every coefficient into [0, pi)
    for k in range(3):
        st.shift(k, -int(np.floor(st.c[k] / np.pi)))
        if st.c[k] >= np.pi - _BOUNDARY_TOL:
            st.shift(k, -1)
    # Coefficients above pi/2 fold down to pi - c, which costs one negation
    # plus a free pi shift.  Negations only exist in pairs, so with an odd
    # number of folds either a parity-neutral slot (c = 0 or c = pi/2, where
    # folding does not change the value) absorbs the extra one, or the
    # smallest coefficient is left negated: the mirror branch of the chamber.
    folded = np.minimum(st.c, np.pi - st.c)
    fold = [bool(st.c[k] > np.pi / 2 + _BOUNDARY_TOL) for k in range(3)]
    if sum(fold) % 2:
        free = [
            k
            for k in range(3)
            if folded[k] < _BOUNDARY_TOL or abs(folded[k] - np.pi / 2) < _BOUNDARY_TOL
        ]
        k = free[0] if free else int(np.argmin(folded))
        fold[k] = not fold[k]
    picked = [k for k in range(3) if fold[k]]
    for j in range(0, len(picked), 2):
        st.negate_pair(picked[j], picked[j + 1])
    # shift everything into (-pi/2, pi/2]
    for k in range(3):
        st.shift(k, -int(np.floor((st.c[k] + np.pi / 2 - _BOUNDARY_TOL) / np.pi)))
    # sort by |c| descending
    top = int(np.argmax(np.abs(st.c) - 1e-15 * np.arange(3)))
    if top != 0:
        st.swap(0, top)
    if abs(st.c[2]) > abs(st.c[1]) + 1e-15:
        st.swap(1, 2)
    # at the c1 = pi/2 wall the mirror identification is free: pick c3 >= 0
    if st.c[2] < -_BOUNDARY_TOL and abs(st.c[0] - np.pi / 2) < 1e-9:
        st.shift(0, -1)
        st.negate_pair(0, 2)
    if abs(st.c[2]) <= _BOUNDARY_TOL:
        st.c[2] = abs(st.c[2])
    return st


def kak_decompose(u: np.ndarray, atol: float = 1e-8) -> KakDecomposition:
    """KAK decomposition of a 4x4 unitary with canonical Weyl-chamber coefficients."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise ValueError("kak_decompose expects a 4x4 matrix")
    if np.max(np.abs(u.conj().T @ u - np.eye(4))) > atol:
        raise ValueError("input matrix is not unitary")
    u = closest_unitary(u)

    m = MAGIC.conj().T @ u @ MAGIC
    p = m.T @ m
    o2 = _simultaneously_diagonalize_symmetric(p)
    d2 = np.diag(o2.T @ p @ o2)
    theta = np.angle(d2) / 2.0
    # m = k1 @ diag(exp(i theta)) @ k2 with real orthogonal k1, k2
    k2 = o2.T.copy()
    if np.linalg.det(k2) < 0:
        # flipping one eigenvector flips both orthogonal determinants
        k2[0, :] *= -1
    k1c = (m @ k2.T) * np.exp(-1j * theta)[None, :]
    if np.max(np.abs(np.imag(k1c))) > 1e-7:
        raise ValueError("magic-basis factorization failed (non-real orthogonal factor)")
    k1 = np.real(k1c)
    if np.linalg.det(k1) < 0:
        # flip one column of k1 and compensate with a pi shift of the matching
        # phase, which leaves k1 @ diag(exp(i theta)) @ k2 unchanged
        k1[:, 0] *= -1
        theta[0] += np.pi

    # phases -> raw Cartan coefficients
    sol = _T_INV @ theta
    phase, c_raw = float(sol[0]), sol[1:]

    st = _canonicalize(phase, c_raw)

    k1_full = MAGIC @ k1 @ MAGIC.conj().T @ kron(st.k1l, st.k1r)
    k2_full = kron(st.k2l, st.k2r) @ MAGIC @ k2 @ MAGIC.conj().T
    a1, b1, ph1 = _factor_local(k1_full)
    a2, b2, ph2 = _factor_local(k2_full)
    total_phase = float(np.mod(st.phase + ph1 + ph2, 2 * np.pi))

    dec = KakDecomposition(
        k1_left=a1,
        k1_right=b1,
        k2_left=a2,
        k2_right=b2,
        coefficients=CartanCoefficients(*st.c),
        global_phase=total_phase,
    )
    return dec


def cartan_coefficients(u: np.ndarray, atol: float = 1e-8) -> CartanCoefficients:
    return kak_decompose(u, atol=atol).coefficients


def local_equivalent(u: np.ndarray, v: np.ndarray, tol: float = 1e-6) -> bool:
    """True iff u and v share canonical Cartan coefficients within tol."""
    cu = cartan_coefficients(u).as_array()
    cv = cartan_coefficients(v).as_array()
    return bool(np.max(np.abs(cu - cv)) < tol)


def anti_crossing_model(x: float, gamma: float) -> CartanCoefficients:
    """Cartan coefficients of exp(i pi/2 H) for the ZZ-perturbed bidirectional
    drive model H = ((1-x)/2) XZ/2 + ((1+x)/2) ZX/2 + gamma ZZ/2."""
    h = (
        (1 - x) / 2 * pauli("XZ") / 2
        + (1 + x) / 2 * pauli("ZX") / 2
        + gamma * pauli("ZZ") / 2
    )
    return cartan_coefficients(expm(0.5j * np.pi * h))
