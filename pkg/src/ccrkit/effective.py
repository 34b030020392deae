"""Analytic effective models of single- and double-cross drives on a qubit pair.

Everything here works on the ideal two-qubit model (infinite anharmonicity):

    H = w0 ZI/2 + w1 IZ/2 + g XX + W0 cos(wd0 t) XI + W1 cos(wd1 t) IX

with Delta = w0_dressed - w1_dressed.  The closed-form rates for the
steady cross drives are, with s = sgn(Delta):

    single drive:  s g W0 / sqrt(Delta^2 + W0^2)                 on ZX/2
    double drive:  s g W0 / sqrt(Delta^2 + W0^2 + 2 W1^2)        on ZX/2
                  -s g W1 / sqrt(Delta^2 + 2 W0^2 + W1^2)        on XZ/2

The derivation chain (frame at the mean drive frequency, two
Schrieffer-Wolff steps, a final frame, and period averaging) is exposed
step by step so it can be verified numerically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .operators import commutator, expm, pauli

# ---------------------------------------------------------------------------
# closed-form rates


@dataclass(frozen=True)
class EffectiveRates:
    """Coefficients of ZX/2 and XZ/2 in the effective Hamiltonian (rad/s)."""

    zx: float
    xz: float


def double_drive_rates(g: float, delta: float, omega0: float, omega1: float) -> EffectiveRates:
    """Effective entangling rates for simultaneous cross drives."""
    s = np.sign(delta)
    zx = s * g * omega0 / np.sqrt(delta**2 + omega0**2 + 2 * omega1**2)
    xz = -s * g * omega1 / np.sqrt(delta**2 + 2 * omega0**2 + omega1**2)
    return EffectiveRates(zx=zx, xz=xz)


def single_drive_rate(g: float, delta: float, omega0: float) -> float:
    """Effective ZX/2 rate for a single cross drive.

    Defined as the double-drive rate with the second tone off, so the
    reduction is exact by construction.
    """
    return double_drive_rates(g, delta, omega0, 0.0).zx


def cartan_trajectory(
    g: float, delta: float, omega0: float, omega1: float, t: float | np.ndarray
) -> np.ndarray:
    """Signed Cartan coefficients (c1, c2, c3) accumulated after time t.

    Raw (unfolded) values; fold into the Weyl chamber with the kak module
    when comparing against decompositions of simulated unitaries.
    """
    r = double_drive_rates(g, delta, omega0, omega1)
    t = np.asarray(t, dtype=float)
    return np.stack([r.zx * t, r.xz * t, np.zeros_like(t)], axis=-1)


def swap_gate_time(g: float, delta: float, omega: float, *, double_drive: bool) -> float:
    """Total drive time to synthesize SWAP from three quarter-turn gates.

    `omega` is the single-drive amplitude; the double-drive variant uses
    omega/2 on each tone so both schemes spend the same total power.
    """
    if g <= 0 or omega <= 0:
        raise ValueError("coupling and amplitude must be positive")
    if double_drive:
        return 3 * np.pi * np.sqrt(delta**2 + 0.75 * omega**2) / (2 * g * omega)
    return 3 * np.pi * np.sqrt(delta**2 + omega**2) / (2 * g * omega)


# ---------------------------------------------------------------------------
# stark-shifted drive frequencies


def stark_drive_frequencies(
    delta: float, omega_q: tuple[float, float], amps: tuple[float, float]
) -> tuple[float, float]:
    """Leading-order drive frequencies compensating the drive-induced shifts.

    Tone 0 (on qubit 0, aimed at qubit 1): wd0 = w1 - W0^2 / (2 Delta).
    Tone 1 (on qubit 1, aimed at qubit 0): wd1 = w0 + W1^2 / (2 Delta).
    """
    wd0 = omega_q[1] - amps[0] ** 2 / (2 * delta)
    wd1 = omega_q[0] + amps[1] ** 2 / (2 * delta)
    return wd0, wd1


def stark_condition_residual(
    drive_freqs: tuple[float, float], omega_q: tuple[float, float], amps: tuple[float, float]
) -> np.ndarray:
    """Residual of the exact frequency-matching conditions.

    The derivation requires the shifted qubit splittings to sit symmetrically
    about the mean drive frequency:

        D0 (1 + r0^2/2) = -2 wm   and   D1 (1 + r1^2/2) = +2 wm,

    with Di = wi - wdi, ri = Wi/Di, wm = (wd0 - wd1)/2.
    """
    wd0, wd1 = drive_freqs
    wm = (wd0 - wd1) / 2
    d0 = omega_q[0] - wd0
    d1 = omega_q[1] - wd1
    r0 = amps[0] / d0
    r1 = amps[1] / d1
    return np.array(
        [d0 * (1 + r0**2 / 2) + 2 * wm, d1 * (1 + r1**2 / 2) - 2 * wm]
    )


def solve_stark_frequencies(
    omega_q: tuple[float, float], amps: tuple[float, float]
) -> tuple[float, float]:
    """Drive frequencies satisfying the exact matching conditions.

    The closed-form values solve the conditions only to leading order (and
    exactly when the two amplitudes coincide); this refines them numerically.
    """
    delta = omega_q[0] - omega_q[1]
    guess = stark_drive_frequencies(delta, omega_q, amps)
    sol = scipy.optimize.root(
        lambda w: stark_condition_residual((w[0], w[1]), omega_q, amps), np.array(guess)
    )
    if not sol.success:
        raise RuntimeError(f"stark-condition solve failed: {sol.message}")
    return float(sol.x[0]), float(sol.x[1])


# ---------------------------------------------------------------------------
# Schrieffer-Wolff and Magnus helpers


def schrieffer_wolff(h: np.ndarray, s: np.ndarray, order: int | None = None) -> np.ndarray:
    """Similarity transform e^S H e^-S.

    `s` must be skew-Hermitian.  With order=None the transform is exact;
    otherwise the Baker-Campbell-Hausdorff series is truncated after the
    nested commutator of the given order (order=0 returns h).
    """
    if not np.allclose(s, -s.conj().T, atol=1e-12 * max(1.0, np.abs(s).max())):
        raise ValueError("generator must be skew-Hermitian")
    if order is None:
        e = expm(s)
        return e @ h @ np.linalg.inv(e)
    out = h.copy()
    term = h.copy()
    for k in range(1, order + 1):
        term = commutator(s, term) / k
        out = out + term
    return out


def magnus_average(h_func, period: float, order: int = 1, n_points: int = 257) -> np.ndarray:
    """Effective Hamiltonian of a periodic drive from the Magnus expansion.

    First order is the plain time average over one period; second order adds
    -i/(2T) * int_0^T dt1 int_0^t1 [H(t1), H(t2)].  Integrals use uniform
    trapezoid quadrature with n_points samples.
    """
    if order not in (1, 2):
        raise ValueError("only orders 1 and 2 are implemented")
    ts = np.linspace(0.0, period, n_points)
    hs = np.array([h_func(t) for t in ts])
    avg = np.trapezoid(hs, ts, axis=0) / period
    if order == 1:
        return avg
    # cumulative inner integral int_0^t1 H(t2) dt2 by trapezoid
    dt = ts[1] - ts[0]
    inner = np.zeros_like(hs)
    inner[1:] = np.cumsum((hs[1:] + hs[:-1]) / 2, axis=0) * dt
    comm = hs @ inner - inner @ hs  # [H(t1), inner(t1)] batched
    second = -0.5j * np.trapezoid(comm, ts, axis=0) / period
    return avg + second


def chain_frame(h: np.ndarray, generator: np.ndarray, t: float) -> np.ndarray:
    """Rotating-frame transform in the convention used by the derivation chain.

    H' = R H R^dag - generator with R = exp(-i generator t).  Note this is the
    opposite conjugation sense from device.rotating_frame; both are valid
    frame conventions and the chain's displayed intermediate Hamiltonians
    follow this one.
    """
    r = expm(-1j * generator * t)
    return r @ h @ r.conj().T - generator


# ---------------------------------------------------------------------------
# step-by-step derivation chain (ideal qubit model, 4x4 matrices)


@dataclass(frozen=True)
class QubitModelParams:
    """Bare parameters of the ideal-qubit double-drive model."""

    omega: tuple[float, float]  # bare qubit frequencies (rad/s)
    g: float
    amps: tuple[float, float]
    drive_freqs: tuple[float, float]

    @property
    def omega_dressed(self) -> tuple[float, float]:
        d = self.omega[0] - self.omega[1]
        return (self.omega[0] + self.g**2 / d, self.omega[1] - self.g**2 / d)

    @property
    def delta(self) -> float:
        """Dressed detuning."""
        return self.omega_dressed[0] - self.omega_dressed[1]

    @property
    def omega_p(self) -> float:
        return (self.drive_freqs[0] + self.drive_freqs[1]) / 2

    @property
    def omega_m(self) -> float:
        return (self.drive_freqs[0] - self.drive_freqs[1]) / 2


def lab_hamiltonian(q: QubitModelParams, t: float) -> np.ndarray:
    """Stage 0: the ideal-qubit lab-frame Hamiltonian."""
    return (
        q.omega[0] * pauli("ZI") / 2
        + q.omega[1] * pauli("IZ") / 2
        + q.g * pauli("XX")
        + q.amps[0] * np.cos(q.drive_freqs[0] * t) * pauli("XI")
        + q.amps[1] * np.cos(q.drive_freqs[1] * t) * pauli("IX")
    )


def mean_frame_hamiltonian(q: QubitModelParams, t: float) -> np.ndarray:
    """Stage 1: frame at the mean drive frequency, counter-rotating terms dropped."""
    wm = q.omega_m
    return (
        (q.omega[0] - q.omega_p) * pauli("ZI") / 2
        + (q.omega[1] - q.omega_p) * pauli("IZ") / 2
        + q.g * (pauli("XX") + pauli("YY")) / 2
        + q.amps[0] * (np.cos(wm * t) * pauli("XI") / 2 - np.sin(wm * t) * pauli("YI") / 2)
        + q.amps[1] * (np.cos(wm * t) * pauli("IX") / 2 + np.sin(wm * t) * pauli("IY") / 2)
    )


def coupling_sw_generator(q: QubitModelParams) -> np.ndarray:
    """Skew-Hermitian generator that removes the exchange coupling block."""
    return -1j * (q.g / q.delta) * (pauli("XY") / 2 - pauli("YX") / 2)


def decoupled_hamiltonian(q: QubitModelParams, t: float) -> np.ndarray:
    """Stage 2: after the coupling Schrieffer-Wolff, truncated at O((g/Delta)^3)."""
    wm = q.omega_m
    w0d, w1d = q.omega_dressed
    gd = q.g / q.delta
    return (
        (w0d - q.omega_p) * pauli("ZI") / 2
        + (w1d - q.omega_p) * pauli("IZ") / 2
        + q.amps[0] * (np.cos(wm * t) * pauli("XI") / 2 - np.sin(wm * t) * pauli("YI") / 2)
        + q.amps[1] * (np.cos(wm * t) * pauli("IX") / 2 + np.sin(wm * t) * pauli("IY") / 2)
        + gd * q.amps[0] * (np.cos(wm * t) * pauli("ZX") / 2 - np.sin(wm * t) * pauli("ZY") / 2)
        - gd * q.amps[1] * (np.cos(wm * t) * pauli("XZ") / 2 + np.sin(wm * t) * pauli("YZ") / 2)
    )


def split_frame_hamiltonian(q: QubitModelParams, t: float) -> np.ndarray:
    """Stage 3: exact frame at half the drive-frequency difference."""
    wm = q.omega_m
    w0d, w1d = q.omega_dressed
    gd = q.g / q.delta
    return (
        (w0d - q.drive_freqs[0]) * pauli("ZI") / 2
        + (w1d - q.drive_freqs[1]) * pauli("IZ") / 2
        + q.amps[0] * pauli("XI") / 2
        + q.amps[1] * pauli("IX") / 2
        + gd * q.amps[0] * (np.cos(2 * wm * t) * pauli("ZX") / 2 - np.sin(2 * wm * t) * pauli("ZY") / 2)
        - gd * q.amps[1] * (np.cos(2 * wm * t) * pauli("XZ") / 2 + np.sin(2 * wm * t) * pauli("YZ") / 2)
    )


def drive_sw_generator(q: QubitModelParams) -> np.ndarray:
    """Skew-Hermitian generator diagonalizing the static drive terms."""
    d0 = q.omega_dressed[0] - q.drive_freqs[0]
    d1 = q.omega_dressed[1] - q.drive_freqs[1]
    return 1j * ((q.amps[0] / d0) * pauli("YI") / 2 + (q.amps[1] / d1) * pauli("IY") / 2)


def tilted_hamiltonian(q: QubitModelParams, t: float) -> np.ndarray:
    """Stage 4: after the drive Schrieffer-Wolff, truncated at O((W/Delta)^4)."""
    wm = q.omega_m
    gd = q.g / q.delta
    w0, w1 = q.amps
    d0 = q.omega_dressed[0] - q.drive_freqs[0]
    d1 = q.omega_dressed[1] - q.drive_freqs[1]
    r0, r1 = w0 / d0, w1 / d1
    c2, s2 = np.cos(2 * wm * t), np.sin(2 * wm * t)
    return (
        d0 * (1 + r0**2 / 2) * pauli("ZI") / 2
        + d1 * (1 + r1**2 / 2) * pauli("IZ") / 2
        - (w0 * r0**2 / 3) * pauli("XI") / 2
        - (w1 * r1**2 / 3) * pauli("IX") / 2
        + (gd * w0 * (1 - (r0**2 + r1**2) / 2) + gd * w1 * r0 * r1) * c2 * pauli("ZX") / 2
        - (gd * w1 * (1 - (r0**2 + r1**2) / 2) + gd * w0 * r0 * r1) * c2 * pauli("XZ") / 2
        + gd * (r1 * w1 - r0 * w0) * c2 * pauli("XX") / 2
        + gd * (r1 * w0 - r0 * w1) * c2 * pauli("ZZ") / 2
        - gd * w0 * (1 - r0**2 / 2) * s2 * pauli("ZY") / 2
        - gd * w1 * (1 - r1**2 / 2) * s2 * pauli("YZ") / 2
        + gd * w0 * r0 * s2 * pauli("XY") / 2
        + gd * w1 * r1 * s2 * pauli("YX") / 2
    )


def counter_phased_hamiltonian(q: QubitModelParams, t: float) -> np.ndarray:
    """Stage 5: final frame rotating the residual splittings away.

    Valid once the drive frequencies satisfy the matching conditions; the ZI
    and IZ terms then cancel exactly against the frame generator.
    """
    wm = q.omega_m
    gen = -2 * wm * (pauli("ZI") / 2 - pauli("IZ") / 2)
    return chain_frame(tilted_hamiltonian(q, t), gen, t)


def effective_hamiltonian_matrix(q: QubitModelParams) -> np.ndarray:
    """Closed-form effective Hamiltonian matrix (ZX and XZ terms only)."""
    rates = double_drive_rates(q.g, q.delta, q.amps[0], q.amps[1])
    return rates.zx * pauli("ZX") / 2 + rates.xz * pauli("XZ") / 2


def final_frame_unitary(q: QubitModelParams, t: float) -> np.ndarray:
    """Frame relating the effective Hamiltonian back toward the lab frame.

    R = exp(-i (W0^2/2D) t ZI/2) exp(+i (W1^2/2D) t IZ/2).
    """
    a = q.amps[0] ** 2 / (2 * q.delta)
    b = q.amps[1] ** 2 / (2 * q.delta)
    return expm(-1j * a * t * pauli("ZI") / 2) @ expm(1j * b * t * pauli("IZ") / 2)
