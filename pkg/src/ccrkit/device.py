"""Physical model of two dispersively coupled fixed-frequency transmons."""

from __future__ import annotations

import warnings

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, replace

import numpy as np

from .operators import annihilation, embed_op, expm, is_hermitian

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class DeviceParams:
    """Dressed frequencies, anharmonicities, coupling and coherence times.

    All frequencies are angular (rad/s); times in seconds.  Subsystem 0 is
    the lower-frequency transmon and is the left tensor factor everywhere.
    """

    omega: tuple[float, float]
    alpha: tuple[float, float]
    g: float
    t1: tuple[float, float]
    t2: tuple[float, float]
    dt: float
    dims: tuple[int, int] = (3, 3)
    crosstalk: float = 0.0  # classical microwave leakage between drive lines

    def __post_init__(self):
        if any(a >= 0 for a in self.alpha):
            raise ValueError("transmon anharmonicities must be negative")
        if self.g <= 0:
            raise ValueError("coupling must be positive")
        if any(t2 > 2 * t1 + 1e-12 for t1, t2 in zip(self.t1, self.t2)):
            raise ValueError("T2 cannot exceed 2*T1")
        if self.dt <= 0:
            raise ValueError("sample period must be positive")
        if any(d not in (2, 3) for d in self.dims):
            raise ValueError("subsystem dimensions must be 2 or 3")
        if self.delta == 0:
            raise ValueError("degenerate qubits: detuning must be nonzero")
        if abs(self.g / self.delta) > 0.1:
            warnings.warn(
                f"|g/Delta| = {abs(self.g / self.delta):.3f} > 0.1: "
                "dispersive approximation is questionable",
                stacklevel=2,
            )

    @property
    def delta(self) -> float:
        """Qubit-qubit detuning of the dressed frequencies."""
        return self.omega[0] - self.omega[1]

    @property
    def dim_total(self) -> int:
        return self.dims[0] * self.dims[1]

    def with_dims(self, dims: tuple[int, int]) -> "DeviceParams":
        return replace(self, dims=tuple(dims))


@dataclass(frozen=True)
class DriveTone:
    """Constant-amplitude charge drive on one transmon."""

    target_subsystem: int
    amplitude: complex  # rad/s; complex phase folds into the carrier phase
    frequency: float  # rad/s
    phase: float = 0.0

    def __post_init__(self):
        if self.frequency <= 0:
            raise ValueError("drive frequency must be positive")

    def coefficient(self, t: float | np.ndarray):
        """Real drive coefficient Re(amp * exp(-i(w t + phase)))."""
        return np.real(self.amplitude * np.exp(-1j * (self.frequency * t + self.phase)))


def reference_device() -> DeviceParams:
    """Measured parameters of the fixed-coupling transmon pair used throughout."""
    return DeviceParams(
        omega=(TWO_PI * 4.858e9, TWO_PI * 4.978e9),
        alpha=(-TWO_PI * 324e6, -TWO_PI * 338e6),
        g=TWO_PI * 1.40e6,
        t1=(112.4e-6, 115.5e-6),
        t2=(191.7e-6, 167.6e-6),
        dt=0.222e-9,
    )


def load_device(path: str) -> DeviceParams:
    """Read DeviceParams from a flat TOML file with unit-suffixed keys."""
    with open(path, "rb") as f:
        raw = tomllib.load(f)
    known = {"omega_ghz", "alpha_mhz", "g_mhz", "t1_us", "t2_us", "dt_ns", "dims", "crosstalk"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown device config keys: {sorted(unknown)}")
    try:
        return DeviceParams(
            omega=tuple(TWO_PI * 1e9 * w for w in raw["omega_ghz"]),
            alpha=tuple(TWO_PI * 1e6 * a for a in raw["alpha_mhz"]),
            g=TWO_PI * 1e6 * raw["g_mhz"],
            t1=tuple(1e-6 * t for t in raw["t1_us"]),
            t2=tuple(1e-6 * t for t in raw["t2_us"]),
            dt=1e-9 * raw["dt_ns"],
            dims=tuple(raw.get("dims", (3, 3))),
            crosstalk=raw.get("crosstalk", 0.0),
        )
    except KeyError as e:
        raise ValueError(f"missing device config key: {e}") from None


def static_hamiltonian(p: DeviceParams) -> np.ndarray:
    """Undriven two-transmon Hamiltonian: Duffing terms plus exchange coupling."""
    h = np.zeros((p.dim_total, p.dim_total), dtype=complex)
    quads = []
    for i, d in enumerate(p.dims):
        b = annihilation(d)
        n = b.conj().T @ b
        duff = p.omega[i] * n + 0.5 * p.alpha[i] * (b.conj().T @ b.conj().T @ b @ b)
        h += embed_op(duff, i, list(p.dims))
        quads.append(embed_op(b + b.conj().T, i, list(p.dims)))
    h += p.g * quads[0] @ quads[1]
    assert is_hermitian(h, atol=1e-6 * np.abs(h).max())
    return h


def quadrature_operator(p: DeviceParams, subsystem: int) -> np.ndarray:
    """(b + b^dag) embedded on the given subsystem."""
    b = annihilation(p.dims[subsystem])
    return embed_op(b + b.conj().T, subsystem, list(p.dims))


def drive_hamiltonian(p: DeviceParams, tones: list[DriveTone], t: float) -> np.ndarray:
    """Instantaneous charge-drive Hamiltonian at time t."""
    if t < 0:
        raise ValueError("time must be nonnegative")
    h = np.zeros((p.dim_total, p.dim_total), dtype=complex)
    for tone in tones:
        if not 0 <= tone.target_subsystem < len(p.dims):
            raise ValueError("tone targets a subsystem outside the device")
        h += float(tone.coefficient(t)) * quadrature_operator(p, tone.target_subsystem)
    return h


def rotating_frame(h: np.ndarray, generator: np.ndarray, t: float) -> np.ndarray:
    """Transform h into the frame rotating under the given Hermitian generator."""
    if h.shape != generator.shape:
        raise ValueError("Hamiltonian and frame generator dimensions differ")
    if not is_hermitian(generator, atol=1e-9 * max(1.0, np.abs(generator).max())):
        raise ValueError("frame generator must be Hermitian")
    r = expm(-1j * generator * t)
    return r.conj().T @ h @ r - generator


def collapse_operators(p: DeviceParams) -> list[np.ndarray]:
    """Lindblad operators: amplitude damping and pure dephasing per transmon.

    Dephasing strength is chosen so a qubit coherence decays as exp(-t/T2)
    overall, i.e. L_phi = sqrt(2 (1/T2 - 1/(2 T1))) * n.
    """
    out = []
    for i, d in enumerate(p.dims):
        b = annihilation(d)
        n = b.conj().T @ b
        gamma1 = 1.0 / p.t1[i]
        gamma_phi = 1.0 / p.t2[i] - 0.5 / p.t1[i]
        if gamma_phi < -1e-15:
            raise ValueError("negative pure-dephasing rate")
        out.append(embed_op(np.sqrt(gamma1) * b, i, list(p.dims)))
        if gamma_phi > 0:
            out.append(embed_op(np.sqrt(2 * gamma_phi) * n, i, list(p.dims)))
    return out
