"""Pulse envelopes and multi-channel drive schedules.

Times inside a schedule are integer sample indices; one sample lasts the
device's dt.  Envelope amplitudes are dimensionless with |amp| <= 1 and are
converted to angular drive strengths by each channel's `scale` (rad/s).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2 * np.pi

SCHEDULE_SCHEMA = 1


@dataclass(frozen=True)
class GaussianSquare:
    """Flat-top pulse with truncated-Gaussian rising/falling edges.

    The edges are "lifted": the raw Gaussian is shifted and rescaled so the
    (virtual) sample one step outside the pulse is exactly zero and the
    value at the flat-top junction is exactly one.  With risefall == 0 the
    pulse is a plain square.
    """

    duration: int
    amp: complex
    sigma: float
    risefall: int

    def __post_init__(self):
        if self.duration <= 0 or int(self.duration) != self.duration:
            raise ValueError("duration must be a positive integer sample count")
        if self.risefall < 0 or int(self.risefall) != self.risefall:
            raise ValueError("risefall must be a nonnegative integer sample count")
        if self.duration < 2 * self.risefall:
            raise ValueError("duration shorter than the two edges")
        if self.risefall > 0 and self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if abs(self.amp) > 1 + 1e-12:
            raise ValueError("|amp| must not exceed 1")

    def envelope(self, t: np.ndarray) -> np.ndarray:
        """Complex envelope at (possibly fractional) sample times t.

        Defined on [0, duration); zero outside.
        """
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        inside = (t >= 0) & (t < self.duration)
        if self.risefall == 0:
            out[inside] = self.amp
            return out
        rf, sig, dur = self.risefall, self.sigma, self.duration
        floor = np.exp(-((rf + 1.0) ** 2) / (2 * sig**2))

        def lifted(x):
            g = np.exp(-((x - rf) ** 2) / (2 * sig**2))
            return np.clip((g - floor) / (1.0 - floor), 0.0, 1.0)

        ti = t[inside]
        shape = np.ones_like(ti)
        rising = ti < rf
        falling = ti >= dur - rf
        shape[rising] = lifted(ti[rising] + 1.0)
        shape[falling] = lifted(dur - ti[falling])
        out[inside] = self.amp * shape
        return out

    def samples(self) -> np.ndarray:
        return self.envelope(np.arange(self.duration, dtype=float))

    def to_dict(self) -> dict:
        amp = complex(self.amp)
        return {
            "shape": "gaussian_square",
            "duration": int(self.duration),
            "amp": [amp.real, amp.imag],
            "sigma": float(self.sigma),
            "risefall": int(self.risefall),
        }

    @staticmethod
    def from_dict(d: dict) -> "GaussianSquare":
        if d.get("shape") != "gaussian_square":
            raise ValueError(f"unknown envelope shape: {d.get('shape')!r}")
        return GaussianSquare(
            duration=int(d["duration"]),
            amp=complex(d["amp"][0], d["amp"][1]),
            sigma=float(d["sigma"]),
            risefall=int(d["risefall"]),
        )


@dataclass(frozen=True)
class Play:
    """Schedule an envelope starting at an integer sample index."""

    start: int
    envelope: GaussianSquare

    def __post_init__(self):
        if self.start < 0 or int(self.start) != self.start:
            raise ValueError("start must be a nonnegative integer sample index")

    @property
    def stop(self) -> int:
        return self.start + self.envelope.duration


@dataclass(frozen=True)
class ShiftPhase:
    """Add to the channel's carrier phase from this sample onward (virtual Z)."""

    start: int
    phase: float


@dataclass(frozen=True)
class ShiftFrequency:
    """Add to the channel's carrier frequency (rad/s) from this sample onward."""

    start: int
    delta: float


Instruction = Play | ShiftPhase | ShiftFrequency


@dataclass
class Channel:
    """One drive line: a carrier plus a sequence of instructions.

    carrier_frequency is angular (rad/s); scale converts unit envelope
    amplitude to angular drive strength (rad/s).
    """

    subsystem: int
    carrier_frequency: float
    scale: float
    instructions: list[Instruction] = field(default_factory=list)

    def duration(self) -> int:
        plays = [i.stop for i in self.instructions if isinstance(i, Play)]
        events = [i.start for i in self.instructions if not isinstance(i, Play)]
        return max(plays + events + [0])

    def baseband(self, duration: int) -> np.ndarray:
        """Complex per-sample envelope (scaled to rad/s), phase shifts folded in."""
        out = np.zeros(duration, dtype=complex)
        for ins in self.instructions:
            if isinstance(ins, Play):
                if ins.stop > duration:
                    raise ValueError("pulse extends past the schedule duration")
                out[ins.start : ins.stop] += self.scale * ins.envelope.samples()
        phase = np.zeros(duration)
        for ins in self.instructions:
            if isinstance(ins, ShiftPhase):
                phase[ins.start :] += ins.phase
        return out * np.exp(-1j * phase)

    def frequency_profile(self, duration: int) -> np.ndarray:
        """Per-sample instantaneous carrier frequency (rad/s)."""
        freq = np.full(duration, self.carrier_frequency)
        for ins in self.instructions:
            if isinstance(ins, ShiftFrequency):
                freq[ins.start :] += ins.delta
        return freq


@dataclass
class PulseSchedule:
    """A bundle of channels sharing a sample clock."""

    dt: float
    channels: list[Channel] = field(default_factory=list)

    @property
    def duration(self) -> int:
        return max((c.duration() for c in self.channels), default=0)

    @property
    def duration_seconds(self) -> float:
        return self.duration * self.dt

    def to_json(self) -> str:
        def encode_instruction(ins: Instruction) -> dict:
            if isinstance(ins, Play):
                return {"kind": "play", "start": int(ins.start), "envelope": ins.envelope.to_dict()}
            if isinstance(ins, ShiftPhase):
                return {"kind": "shift_phase", "start": int(ins.start), "phase": float(ins.phase)}
            return {
                "kind": "shift_frequency",
                "start": int(ins.start),
                "delta_hz": ins.delta / TWO_PI,
            }

        doc = {
            "schema": SCHEDULE_SCHEMA,
            "dt_ns": self.dt * 1e9,
            "channels": [
                {
                    "subsystem": c.subsystem,
                    "carrier_hz": c.carrier_frequency / TWO_PI,
                    "scale_hz": c.scale / TWO_PI,
                    "instructions": [encode_instruction(i) for i in c.instructions],
                }
                for c in self.channels
            ],
        }
        return json.dumps(doc, indent=2)

    @staticmethod
    def from_json(text: str) -> "PulseSchedule":
        doc = json.loads(text)
        if doc.get("schema") != SCHEDULE_SCHEMA:
            raise ValueError(f"unsupported schedule schema: {doc.get('schema')!r}")
        channels = []
        for c in doc["channels"]:
            instructions: list[Instruction] = []
            for i in c["instructions"]:
                if i["kind"] == "play":
                    instructions.append(Play(i["start"], GaussianSquare.from_dict(i["envelope"])))
                elif i["kind"] == "shift_phase":
                    instructions.append(ShiftPhase(i["start"], i["phase"]))
                elif i["kind"] == "shift_frequency":
                    instructions.append(ShiftFrequency(i["start"], TWO_PI * i["delta_hz"]))
                else:
                    raise ValueError(f"unknown instruction kind: {i['kind']!r}")
            channels.append(
                Channel(
                    subsystem=int(c["subsystem"]),
                    carrier_frequency=TWO_PI * c["carrier_hz"],
                    scale=TWO_PI * c["scale_hz"],
                    instructions=instructions,
                )
            )
        return PulseSchedule(dt=doc["dt_ns"] * 1e-9, channels=channels)

    def save(self, path: str) -> None:
        with open(path, "w") as f:
            f.write(self.to_json())

    @staticmethod
    def load(path: str) -> "PulseSchedule":
        with open(path) as f:
            return PulseSchedule.from_json(f.read())


def build_cr_schedule(
    p,
    amp: float,
    detuning: float,
    duration: int,
    *,
    risefall: int = 128,
    sigma: float = 64.0,
    cancellation: complex = 0.0,
    control: int = 0,
) -> PulseSchedule:
    """Single cross-resonance drive: a tone on the control at the target's
    (possibly detuned) frequency, plus an optional cancellation tone on the
    target at the same frequency."""
    target = 1 - control
    env = GaussianSquare(duration, 1.0 + 0j, sigma, risefall)
    channels = [
        Channel(control, p.omega[target] + detuning, amp, [Play(0, env)]),
    ]
    if cancellation:
        channels.append(
            Channel(
                target,
                p.omega[target] + detuning,
                abs(cancellation),
                [Play(0, GaussianSquare(duration, cancellation / abs(cancellation), sigma, risefall))],
            )
        )
    return PulseSchedule(dt=p.dt, channels=channels)


def build_ccr_schedule(
    p,
    amps: tuple[float, float],
    detunings: tuple[float, float],
    duration: int,
    *,
    risefall: int = 128,
    sigma: float = 64.0,
    cancellation: tuple[complex, complex] = (0.0, 0.0),
) -> PulseSchedule:
    """Simultaneous cross drives on both transmons.

    Channel 0 drives subsystem 0 at subsystem 1's frequency shifted by
    detunings[0]; channel 1 drives subsystem 1 at subsystem 0's frequency
    shifted by detunings[1].  Cancellation tones, when nonzero, drive each
    transmon at its own (stark-shifted) frequency, i.e. at the carrier of
    the cross tone that targets it.
    """
    env = GaussianSquare(duration, 1.0 + 0j, sigma, risefall)
    carriers = (p.omega[1] + detunings[0], p.omega[0] + detunings[1])
    channels = [
        Channel(0, carriers[0], amps[0], [Play(0, env)]),
        Channel(1, carriers[1], amps[1], [Play(0, env)]),
    ]
    for i, canc in enumerate(cancellation):
        if canc:
            # tone on subsystem i, resonant with the cross tone aimed at it
            channels.append(
                Channel(
                    i,
                    carriers[1 - i],
                    abs(canc),
                    [Play(0, GaussianSquare(duration, canc / abs(canc), sigma, risefall))],
                )
            )
    return PulseSchedule(dt=p.dt, channels=channels)
