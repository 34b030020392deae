"""Two-qubit quantum channel representations, tomography, and purification.

A channel is stored in one of four interchangeable representations:

- ``superop``: 16x16 matrix acting on row-major vectorized density matrices,
  ``vec(E(rho)) = S @ vec(rho)`` with ``vec(A rho B) = (A kron B.T) vec(rho)``.
- ``choi``: 16x16 Choi matrix ``C = sum_{pq} E(|p><q|) kron |p><q|`` with
  ``tr(C) = 4`` for a trace-preserving channel.
- ``chi``: 16x16 process matrix in the two-qubit Pauli basis,
  ``E(rho) = sum_{ij} chi[i, j] P_i rho P_j`` with the Paulis ordered
  II, IX, IY, IZ, XI, ... (so ``sum_i chi[i, i] = 1`` when trace preserving).
- ``kraus``: list of 4x4 Kraus operators, ``E(rho) = sum_k K_k rho K_k^dag``.

The purification routine projects a noisy channel onto the closest unitary
in the sense of the dominant Choi eigenvector: keep only the leading rank-1
component, read it as a single Kraus operator, replace its eigenvalues by
their phases, and re-unitarize by polar projection.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kak import CartanCoefficients, cartan_coefficients
from .operators import PAULI_LABELS, closest_unitary, pauli

__all__ = [
    "ChannelRep",
    "PurifiedUnitary",
    "PurificationError",
    "convert",
    "apply_channel",
    "compose_channels",
    "unitary_channel",
    "identity_channel",
    "depolarizing_channel",
    "amplitude_damping_channel",
    "is_trace_preserving",
    "is_completely_positive",
    "process_fidelity",
    "simulate_qpt",
    "purify_channel",
    "cartan_of_channel",
    "channel_to_json",
    "channel_from_json",
]

REPRESENTATIONS = ("superop", "choi", "chi", "kraus")

#: Columns are vec(P_i)/2, an orthonormal (unitary) basis of 16x16 space.
_PAULI_BASIS = np.stack([pauli(lbl).reshape(16) for lbl in PAULI_LABELS], axis=1) / 2.0

_DEGENERACY_TOL = 1e-9
_CP_EIGVAL_TOL = -1e-9


class PurificationError(ValueError):
    """The channel is too mixed for a meaningful unitary projection."""


@dataclass(frozen=True)
class ChannelRep:
    """A two-qubit channel in one of the four standard representations.

    ``clip_mass`` records the total negative Choi eigenvalue mass discarded
    if a Kraus extraction had to clip a (slightly) non-positive Choi matrix;
    it is 0.0 for exactly completely positive inputs.
    """

    kind: str
    data: np.ndarray | tuple[np.ndarray, ...]
    clip_mass: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in REPRESENTATIONS:
            raise ValueError(f"unknown representation {self.kind!r}")
        if self.kind == "kraus":
            ops = tuple(np.asarray(k, dtype=complex) for k in self.data)
            if not ops or any(k.shape != (4, 4) for k in ops):
                raise ValueError("kraus data must be a nonempty list of 4x4 operators")
            object.__setattr__(self, "data", ops)
        else:
            mat = np.asarray(self.data, dtype=complex)
            if mat.shape != (16, 16):
                raise ValueError(f"{self.kind} data must be a 16x16 matrix")
            object.__setattr__(self, "data", mat)

    def superop(self) -> np.ndarray:
        return convert(self, "superop").data

    def choi(self) -> np.ndarray:
        return convert(self, "choi").data

    def chi(self) -> np.ndarray:
        return convert(self, "chi").data

    def kraus(self) -> tuple[np.ndarray, ...]:
        return convert(self, "kraus").data


def _choi_from_superop(s: np.ndarray) -> np.ndarray:
    # C[(m,p),(n,q)] = S[(m,n),(p,q)]; the reindexing is an involution.
    return s.reshape(4, 4, 4, 4).transpose(0, 2, 1, 3).reshape(16, 16)


def _superop_from_kraus(ops: tuple[np.ndarray, ...]) -> np.ndarray:
    return sum(np.kron(k, k.conj()) for k in ops)


def _kraus_from_choi(choi: np.ndarray) -> tuple[tuple[np.ndarray, ...], float]:
    vals, vecs = np.linalg.eigh(0.5 * (choi + choi.conj().T))
    clip_mass = float(-vals[vals < 0].sum())
    ops = []
    for val, vec in zip(vals, vecs.T):
        if val > 1e-12:
            ops.append(math.sqrt(val) * vec.reshape(4, 4))
    if not ops:
        raise ValueError("channel has no positive Choi eigenvalues")
    return tuple(ops), clip_mass


def _chi_from_choi(choi: np.ndarray) -> np.ndarray:
    # Choi = 4 * B @ chi @ B^dag with B the orthonormal Pauli basis.
    return _PAULI_BASIS.conj().T @ choi @ _PAULI_BASIS / 4.0


def _choi_from_chi(chi: np.ndarray) -> np.ndarray:
    return 4.0 * _PAULI_BASIS @ chi @ _PAULI_BASIS.conj().T


def convert(rep: ChannelRep, target: str) -> ChannelRep:
    """Convert between channel representations (round trips exact to 1e-10)."""
    if target not in REPRESENTATIONS:
        raise ValueError(f"unknown representation {target!r}")
    if target == rep.kind:
        return rep
    # Route everything through the Choi matrix.
    if rep.kind == "choi":
        choi = rep.data
    elif rep.kind == "superop":
        choi = _choi_from_superop(rep.data)
    elif rep.kind == "chi":
        choi = _choi_from_chi(rep.data)
    else:
        choi = _choi_from_superop(_superop_from_kraus(rep.data))
    clip_mass = rep.clip_mass
    if target == "choi":
        return ChannelRep("choi", choi, clip_mass)
    if target == "superop":
        return ChannelRep("superop", _choi_from_superop(choi), clip_mass)
    if target == "chi":
        return ChannelRep("chi", _chi_from_choi(choi), clip_mass)
    ops, clipped = _kraus_from_choi(choi)
    return ChannelRep("kraus", ops, clip_mass + clipped)


def apply_channel(rep: ChannelRep, rho: np.ndarray) -> np.ndarray:
    """Apply the channel to a 4x4 density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("rho must be a 4x4 matrix")
    return (rep.superop() @ rho.reshape(16)).reshape(4, 4)


def compose_channels(first: ChannelRep, second: ChannelRep) -> ChannelRep:
    """The channel applying ``first`` then ``second``."""
    return ChannelRep("superop", second.superop() @ first.superop())


def unitary_channel(u: np.ndarray) -> ChannelRep:
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise ValueError("u must be a 4x4 matrix")
    return ChannelRep("kraus", (u,))


def identity_channel() -> ChannelRep:
    return ChannelRep("superop", np.eye(16, dtype=complex))


def depolarizing_channel(p: float) -> ChannelRep:
    """Two-qubit depolarizing channel rho -> (1-p) rho + p I/4."""
    if not 0.0 <= p <= 16.0 / 15.0:
        raise ValueError("depolarizing strength outside the physical range")
    chi = np.diag(np.full(16, p / 16.0, dtype=complex))
    chi[0, 0] = 1.0 - 15.0 * p / 16.0
    return ChannelRep("chi", chi)


def amplitude_damping_channel(gamma: float) -> ChannelRep:
    """Independent amplitude damping of strength gamma on each qubit."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    k0 = np.array([[1.0, 0.0], [0.0, math.sqrt(1.0 - gamma)]], dtype=complex)
    k1 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    ops = tuple(np.kron(a, b) for a in (k0, k1) for b in (k0, k1))
    return ChannelRep("kraus", ops)


def is_trace_preserving(rep: ChannelRep, atol: float = 1e-9) -> bool:
    """Check partial trace of the Choi matrix over the output slot equals I."""
    choi = rep.choi().reshape(4, 4, 4, 4)
    reduced = np.einsum("apaq->pq", choi)
    return bool(np.max(np.abs(reduced - np.eye(4))) < atol)


def is_completely_positive(rep: ChannelRep, atol: float = -_CP_EIGVAL_TOL) -> bool:
    choi = rep.choi()
    vals = np.linalg.eigvalsh(0.5 * (choi + choi.conj().T))
    return bool(vals.min() > -atol)


def process_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """|tr(U^dag V)| / 4 for two 4x4 unitaries (global phase ignored)."""
    return float(abs(np.trace(np.asarray(u).conj().T @ np.asarray(v))) / 4.0)


# ---------------------------------------------------------------------------
# Quantum process tomography
# ---------------------------------------------------------------------------

_SQ_STATES = (
    np.array([1.0, 0.0], dtype=complex),                      # |0>
    np.array([0.0, 1.0], dtype=complex),                      # |1>
    np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0),     # |+>
    np.array([1.0, 1.0j], dtype=complex) / math.sqrt(2.0),    # |+i>
)


def qpt_input_states() -> list[np.ndarray]:
    """The 16 product input states (density matrices) of the QPT design."""
    states = []
    for a in _SQ_STATES:
        for b in _SQ_STATES:
            psi = np.kron(a, b)
            states.append(np.outer(psi, psi.conj()))
    return states


def _sampled_expectation(
    pauli_op: np.ndarray, rho: np.ndarray, shots: int, rng: np.random.Generator
) -> float:
    # Projective measurement of a +/-1 observable: binomial draw on the
    # probability of the +1 eigenspace.
    p_plus = float(np.real(np.trace((np.eye(4) + pauli_op) @ rho)) / 2.0)
    p_plus = min(1.0, max(0.0, p_plus))
    return 2.0 * rng.binomial(shots, p_plus) / shots - 1.0


def simulate_qpt(
    rep: ChannelRep,
    shots: int | float | None = None,
    rng: np.random.Generator | None = None,
) -> ChannelRep:
    """Linear-inversion process tomography of a two-qubit channel.

    The fixed design prepares the 16 product states built from
    {|0>, |1>, |+>, |+i>} per qubit and measures each nontrivial two-qubit
    Pauli expectation value on the output.  With ``shots=None`` (or
    ``math.inf``) exact expectation values are used and the channel is
    recovered exactly; at finite shots each expectation is estimated from
    an independent binomial draw over the observable's +/-1 outcomes.
    """
    exact = shots is None or shots == math.inf
    if not exact:
        shots = int(shots)
        if shots < 1:
            raise ValueError("shots must be >= 1")
        if rng is None:
            raise ValueError("finite-shot tomography requires a random generator")
    s_true = rep.superop()
    states = qpt_input_states()
    paulis = [pauli(lbl) for lbl in PAULI_LABELS]

    # data[j, k] = <P_j> on E(rho_k); the identity row is fixed at 1.
    data = np.zeros((16, 16))
    for k, rho in enumerate(states):
        out = (s_true @ rho.reshape(16)).reshape(4, 4)
        # The identity row is the output trace: fixed by normalization when
        # sampling, and kept exact so non-trace-preserving inputs round trip.
        data[0, k] = float(np.real(np.trace(out)))
        for j in range(1, 16):
            exact_val = float(np.real(np.trace(paulis[j] @ out)))
            if exact:
                data[j, k] = exact_val
            else:
                data[j, k] = _sampled_expectation(paulis[j], out, shots, rng)

    # data = R @ S @ V with R rows vec(P_j)^dag and V columns vec(rho_k);
    # R = 2 B^dag for the orthonormal Pauli basis B, so R^{-1} = B / 2.
    v_mat = np.stack([rho.reshape(16) for rho in states], axis=1)
    if abs(np.linalg.det(v_mat)) < 1e-12:
        raise np.linalg.LinAlgError("singular tomography design")
    s_est = (_PAULI_BASIS / 2.0) @ data @ np.linalg.inv(v_mat)
    return ChannelRep("superop", s_est)


# ---------------------------------------------------------------------------
# Channel purification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PurifiedUnitary:
    """Unitary approximant of a noisy channel.

    ``weight`` is the dominant Choi eigenvalue's fraction of the total Choi
    trace: 1.0 for a unitary channel, decreasing with mixedness.
    """

    unitary: np.ndarray
    weight: float

    def __post_init__(self) -> None:
        u = np.asarray(self.unitary, dtype=complex)
        object.__setattr__(self, "unitary", u)
        if np.max(np.abs(u.conj().T @ u - np.eye(4))) > 1e-9:
            raise ValueError("purified operator is not unitary")


def purify_channel(rep: ChannelRep) -> PurifiedUnitary:
    """Project a noisy channel onto an approximating unitary.

    Steps: keep the dominant rank-1 component of the Choi matrix, reshape
    its eigenvector into a single Kraus operator K, eigendecompose
    K = M diag{r_i e^{i theta_i}} M^{-1}, keep only the eigenvalue phases,
    and polar-project M diag{e^{i theta_i}} M^{-1} back to the unitary group
    (K is generally non-normal, so the phase-only operator is not exactly
    unitary).
    """
    choi = rep.choi()
    vals, vecs = np.linalg.eigh(0.5 * (choi + choi.conj().T))
    lead, runner = vals[-1], vals[-2]
    if lead - runner < _DEGENERACY_TOL * max(lead, 1.0):
        raise PurificationError(
            "dominant Choi eigenvalue is degenerate; channel too mixed to purify"
        )
    kraus = math.sqrt(max(lead, 0.0)) * vecs[:, -1].reshape(4, 4)
    w, m = np.linalg.eig(kraus)
    mags = np.abs(w)
    phases = np.where(mags > 1e-12, w / np.where(mags > 1e-12, mags, 1.0), 1.0)
    u = closest_unitary(m @ np.diag(phases) @ np.linalg.inv(m))
    weight = float(lead / np.real(np.trace(choi)))
    return PurifiedUnitary(unitary=u, weight=weight)


def cartan_of_channel(rep: ChannelRep, atol: float = 1e-8) -> CartanCoefficients:
    """Cartan coefficients of the unitary approximant of a channel."""
    return cartan_coefficients(purify_channel(rep).unitary, atol=atol)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _matrix_to_pairs(mat: np.ndarray) -> list[list[float]]:
    flat = np.asarray(mat, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def _matrix_from_pairs(pairs: list[list[float]], shape: tuple[int, int]) -> np.ndarray:
    flat = np.array([complex(re, im) for re, im in pairs])
    if flat.size != shape[0] * shape[1]:
        raise ValueError("serialized matrix has the wrong number of entries")
    return flat.reshape(shape)


def channel_to_json(rep: ChannelRep) -> str:
    if rep.kind == "kraus":
        payload = {
            "representation": "kraus",
            "operators": [_matrix_to_pairs(k) for k in rep.data],
        }
    else:
        payload = {"representation": rep.kind, "matrix": _matrix_to_pairs(rep.data)}
    payload["clip_mass"] = rep.clip_mass
    return json.dumps(payload)


def channel_from_json(text: str | Path) -> ChannelRep:
    if isinstance(text, Path):
        text = text.read_text()
    payload = json.loads(text)
    kind = payload["representation"]
    clip_mass = float(payload.get("clip_mass", 0.0))
    if kind == "kraus":
        ops = tuple(_matrix_from_pairs(p, (4, 4)) for p in payload["operators"])
        return ChannelRep("kraus", ops, clip_mass)
    return ChannelRep(kind, _matrix_from_pairs(payload["matrix"], (16, 16)), clip_mass)
