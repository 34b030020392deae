"""Command-line front end: TOML configs in, CSV/JSON artifacts and a manifest out.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 calibration-stage failure.  A ``manifest.json`` (config hash, seed,
toolkit version, wall time, failure stage) is written to the output
directory even when a run fails.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import __version__
from .channels import (
    PurificationError,
    channel_from_json,
    process_fidelity,
    purify_channel,
    unitary_channel,
    compose_channels,
    depolarizing_channel,
)
from .device import DeviceParams, load_device, reference_device
from .effective import (
    QubitModelParams,
    chain_frame,
    coupling_sw_generator,
    counter_phased_hamiltonian,
    decoupled_hamiltonian,
    double_drive_rates,
    drive_sw_generator,
    lab_hamiltonian,
    magnus_average,
    mean_frame_hamiltonian,
    schrieffer_wolff,
    split_frame_hamiltonian,
    tilted_hamiltonian,
)
from .experiments import (
    CalibrationError,
    OperatingPoint,
    calibrate_ccr,
    calibrate_cr_amplitude,
    compose_iswap,
    compose_iswap_echoed_cx,
    compose_swap,
    compose_swap_echoed_cx,
    ECHOED_CX_SAMPLES,
    SX_SAMPLES,
    sweep_duration,
    sweep_frequencies,
    write_duration_csv,
    write_sweep_csv,
)
from .benchmarking import RBConfig, RBFitError, run_rb, rb_summary_json, write_rb_csv
from .kak import anti_crossing_model, kak_decompose
from .operators import pauli, pauli_coefficients

TWO_PI = 2 * np.pi

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CALIBRATION = 4

OUTPUT_DIR_ENV = "CCRKIT_OUTPUT_DIR"


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from exc


def _block(config: dict, experiment: str) -> dict:
    """Experiment parameter block; top-level keys outside blocks are rejected."""
    known_top = {"device", "seed", "output_dir", experiment.replace("-", "_")}
    unknown = set(config) - known_top
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    block = config.get(experiment.replace("-", "_"), {})
    if not isinstance(block, dict):
        raise ConfigError(f"[{experiment.replace('-', '_')}] must be a table")
    return block


class _Params:
    """Strict view of a parameter block: every key must be consumed."""

    def __init__(self, block: dict, context: str):
        self._block = dict(block)
        self._context = context
        self._seen: set[str] = set()

    def get(self, key: str, default=None, *, required: bool = False, cast=None):
        self._seen.add(key)
        if key not in self._block:
            if required:
                raise ConfigError(f"{self._context}: missing required key '{key}'")
            return default
        value = self._block[key]
        if cast is not None:
            try:
                return cast(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{self._context}: bad value for '{key}': {value!r}") from exc
        return value

    def finish(self) -> None:
        unknown = set(self._block) - self._seen
        if unknown:
            raise ConfigError(f"{self._context}: unknown keys {sorted(unknown)}")


def _device_from(args, config: dict) -> DeviceParams:
    path = args.device or config.get("device")
    if path is None:
        return reference_device()
    if not isinstance(path, str):
        raise ConfigError(f"'device' must be a path to a device TOML file, got {path!r}")
    try:
        return load_device(path)
    except FileNotFoundError as exc:
        raise ConfigError(f"device file not found: {path}") from exc
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"bad device file {path}: {exc}") from exc


def _seed_from(args, config: dict, *, required: bool) -> int | None:
    seed = args.seed if args.seed is not None else config.get("seed")
    if seed is None:
        if required:
            raise ConfigError("a seed is mandatory for stochastic experiments")
        return None
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    return seed


def _matrix_from_json(path: str) -> np.ndarray:
    """4x4 complex matrix: rows of numbers or [re, im] pairs."""
    try:
        with open(path) as f:
            raw = json.load(f)
    except FileNotFoundError as exc:
        raise ConfigError(f"matrix file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    if isinstance(raw, dict):
        raw = raw.get("matrix", raw)
    try:
        rows = []
        for row in raw:
            rows.append(
                [complex(z[0], z[1]) if isinstance(z, (list, tuple)) else complex(z) for z in row]
            )
        mat = np.array(rows, dtype=complex)
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: expected a 4x4 matrix of numbers or [re, im] pairs") from exc
    if mat.shape != (4, 4):
        raise ConfigError(f"{path}: expected a 4x4 matrix, got shape {mat.shape}")
    return mat


def _write_json(outdir: Path, name: str, payload) -> None:
    with open(outdir / name, "w") as f:
        if isinstance(payload, str):
            f.write(payload)
        else:
            json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


# ---------------------------------------------------------------------------
# subcommand handlers; each returns a dict of extra manifest fields
# ---------------------------------------------------------------------------


def _axis(pp: _Params, prefix: str) -> np.ndarray:
    start = pp.get(f"{prefix}_start_mhz", required=True, cast=float)
    stop = pp.get(f"{prefix}_stop_mhz", required=True, cast=float)
    points = pp.get(f"{prefix}_points", required=True, cast=int)
    if points < 1 or stop <= start:
        raise ConfigError(f"{prefix}: need stop > start and at least one point")
    return TWO_PI * 1e6 * np.linspace(start, stop, points)


def _cmd_sweep_freq(args, config, outdir: Path) -> dict:
    p = _device_from(args, config)
    pp = _Params(_block(config, "sweep-freq"), "[sweep_freq]")
    amps = (
        TWO_PI * 1e6 * pp.get("amp0_mhz", required=True, cast=float),
        TWO_PI * 1e6 * pp.get("amp1_mhz", required=True, cast=float),
    )
    axis0 = _axis(pp, "det0")
    axis1 = _axis(pp, "det1")
    duration = pp.get("duration_samples", 981, cast=int)
    substeps = pp.get("substeps", 8, cast=int)
    pp.finish()
    if args.dry_run:
        return {"validated": True}
    grid = sweep_frequencies(p, amps, axis0, axis1, duration=duration, substeps=substeps)
    write_sweep_csv(grid, outdir / "sweep.csv")
    return {"artifacts": ["sweep.csv"], "grid_points": int(len(axis0) * len(axis1))}


def _cmd_sweep_duration(args, config, outdir: Path) -> dict:
    p = _device_from(args, config)
    pp = _Params(_block(config, "sweep-duration"), "[sweep_duration]")
    amps = (
        TWO_PI * 1e6 * pp.get("amp0_mhz", required=True, cast=float),
        TWO_PI * 1e6 * pp.get("amp1_mhz", required=True, cast=float),
    )
    detunings = (
        TWO_PI * 1e6 * pp.get("det0_mhz", required=True, cast=float),
        TWO_PI * 1e6 * pp.get("det1_mhz", required=True, cast=float),
    )
    start = pp.get("duration_start", required=True, cast=int)
    stop = pp.get("duration_stop", required=True, cast=int)
    step = pp.get("duration_step", 64, cast=int)
    if step < 1 or stop < start:
        raise ConfigError("[sweep_duration]: need duration_stop >= duration_start, step >= 1")
    path = pp.get("path", "exact")
    if path not in ("exact", "qpt"):
        raise ConfigError("[sweep_duration]: path must be 'exact' or 'qpt'")
    shots = pp.get("shots", None, cast=float)
    substeps = pp.get("substeps", 8, cast=int)
    pp.finish()
    seed = _seed_from(args, config, required=(path == "qpt" and shots is not None))
    if args.dry_run:
        return {"validated": True}
    rng = np.random.default_rng(seed) if seed is not None else None
    results = sweep_duration(
        p, amps, detunings, list(range(start, stop + 1, step)),
        substeps=substeps, path=path, shots=shots, rng=rng,
    )
    write_duration_csv(results, outdir / "duration.csv")
    return {"artifacts": ["duration.csv"]}


def _cmd_calibrate(args, config, outdir: Path) -> dict:
    p = _device_from(args, config)
    pp = _Params(_block(config, "calibrate"), "[calibrate]")
    cr_duration = pp.get("cr_duration_samples", 856, cast=int)
    substeps = pp.get("substeps", 8, cast=int)
    sweep_substeps = pp.get("sweep_substeps", 6, cast=int)
    use_cancellation = pp.get("use_cancellation", True)
    pp.finish()
    if not isinstance(use_cancellation, bool):
        raise ConfigError("[calibrate]: use_cancellation must be a boolean")
    if args.dry_run:
        return {"validated": True}

    artifacts: list[str] = []

    def stage(name: str, payload) -> None:
        if name == "amplitudes":
            _write_json(outdir, "amplitudes.json", {"amps_hz": [a / TWO_PI for a in payload]})
            artifacts.append("amplitudes.json")
        elif name == "frequency-grid":
            write_sweep_csv(payload, outdir / "frequency_grid.csv")
            artifacts.append("frequency_grid.csv")
        elif name == "duration-sweep":
            write_duration_csv(payload, outdir / "duration_sweep.csv")
            artifacts.append("duration_sweep.csv")

    point = calibrate_ccr(
        p,
        cr_duration=cr_duration,
        substeps=substeps,
        sweep_substeps=sweep_substeps,
        use_cancellation=use_cancellation,
        stage_callback=stage,
    )
    with open(outdir / "operating_point.json", "w") as f:
        f.write(point.to_json())
        f.write("\n")
    artifacts.append("operating_point.json")
    print(
        "operating point: detunings = ({:.3f}, {:.3f}) MHz, duration = {} samples".format(
            point.detunings[0] / TWO_PI / 1e6,
            point.detunings[1] / TWO_PI / 1e6,
            point.duration,
        )
    )
    return {"artifacts": artifacts}


def _cmd_compose(args, config, outdir: Path) -> dict:
    p = _device_from(args, config)
    pp = _Params(_block(config, "compose"), "[compose]")
    gate = pp.get("gate", required=True)
    basis = pp.get("basis", "ccr")
    point_path = args.point or pp.get("point")
    cx_amp_mhz = pp.get("cx_amp_mhz", None, cast=float)
    pp.finish()
    if gate not in ("iswap", "swap"):
        raise ConfigError("[compose]: gate must be 'iswap' or 'swap'")
    if basis not in ("ccr", "cx"):
        raise ConfigError("[compose]: basis must be 'ccr' or 'cx'")
    if basis == "ccr" and point_path is None:
        raise ConfigError("[compose]: the ccr basis needs an operating-point JSON ('point')")
    if args.dry_run:
        return {"validated": True}

    if basis == "ccr":
        try:
            point = OperatingPoint.from_json(Path(point_path))
        except FileNotFoundError as exc:
            raise ConfigError(f"operating point file not found: {point_path}") from exc
        except (KeyError, ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"bad operating point file {point_path}: {exc}") from exc
        composed = (compose_iswap if gate == "iswap" else compose_swap)(p, point)
    else:
        if cx_amp_mhz is None:
            half = (ECHOED_CX_SAMPLES - 2 * SX_SAMPLES) // 2
            amp = calibrate_cr_amplitude(p, control=0, duration=half, substeps=8)
        else:
            amp = TWO_PI * 1e6 * cx_amp_mhz
        composed = (
            compose_iswap_echoed_cx if gate == "iswap" else compose_swap_echoed_cx
        )(p, amp)

    cartan = kak_decompose(composed.target).coefficients.as_array()
    name = f"composed_{gate}_{basis}.json"
    _write_json(
        outdir,
        name,
        {
            "gate": composed.name,
            "basis": basis,
            "duration_samples": composed.duration_samples,
            "duration_ns": composed.duration_seconds(p) * 1e9,
            "n_blocks": composed.n_blocks,
            "sx_count": composed.sx_count,
            "target_cartan": [float(c) for c in cartan],
        },
    )
    print(f"{gate} ({basis} basis): {composed.duration_seconds(p) * 1e9:.1f} ns")
    return {"artifacts": [name]}


def _cmd_rb(args, config, outdir: Path) -> dict:
    p = _device_from(args, config)
    pp = _Params(_block(config, "rb"), "[rb]")
    lengths = pp.get("lengths", [2, 8, 16, 32, 64], cast=lambda v: tuple(int(x) for x in v))
    circuits = pp.get("circuits_per_length", 10, cast=int)
    shots_raw = pp.get("shots", 1024)
    shots = math.inf if shots_raw in ("inf", 0) else float(shots_raw)
    error_p = pp.get("error_p", None, cast=float)
    interleave = pp.get("interleave", False)
    interleaved_error_p = pp.get("interleaved_error_p", None, cast=float)
    pp.finish()
    if not isinstance(interleave, bool):
        raise ConfigError("[rb]: interleave must be a boolean")
    seed = _seed_from(args, config, required=True)
    if args.dry_run:
        return {"validated": True}

    def noisy(extra_p):
        def impl(element):
            ch = unitary_channel(element.unitary)
            if extra_p:
                ch = compose_channels(ch, depolarizing_channel(extra_p))
            return ch
        return impl

    interleaved_gate = None
    interleaved_impl = None
    if interleave:
        interleaved_gate = np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
        )
        p_int = interleaved_error_p if interleaved_error_p is not None else error_p
        interleaved_impl = unitary_channel(interleaved_gate)
        if p_int:
            interleaved_impl = compose_channels(interleaved_impl, depolarizing_channel(p_int))

    cfg = RBConfig(
        lengths=lengths,
        circuits_per_length=circuits,
        shots=shots,
        seed=seed,
        interleaved_gate=interleaved_gate,
    )
    result = run_rb(p, cfg, noisy(error_p), interleaved_impl=interleaved_impl)
    write_rb_csv(result, outdir / "rb.csv")
    with open(outdir / "rb_summary.json", "w") as f:
        f.write(rb_summary_json(result))
        f.write("\n")
    print(f"reference decay alpha = {result.alpha:.6f}")
    if result.gate_error is not None:
        print(f"interleaved gate error = {result.gate_error:.3e} +- {result.error_bar:.1e}")
    return {"artifacts": ["rb.csv", "rb_summary.json"]}


def _cmd_kak(args, config, outdir: Path) -> dict:
    if args.matrix is None:
        raise ConfigError("kak requires --matrix FILE.json")
    mat = _matrix_from_json(args.matrix)
    if args.dry_run:
        return {"validated": True}
    try:
        dec = kak_decompose(mat)
    except ValueError as exc:
        raise ConfigError(f"not a two-qubit unitary: {exc}") from exc
    c = dec.coefficients.as_array()
    print("# canonical coefficients, half-angle convention:")
    print("# U ~ (K1 x K2) expm(-i/2 (c1 XX + c2 YY + c3 ZZ)) (K3 x K4),")
    print("# chamber pi/2 >= c1 >= c2 >= |c3|")
    print(f"c = ({c[0]:.6f}, {c[1]:.6f}, {c[2]:.6f})")
    _write_json(outdir, "kak.json", {"cartan": [float(x) for x in c]})
    return {"artifacts": ["kak.json"]}


def _cmd_purify(args, config, outdir: Path) -> dict:
    if args.channel is None:
        raise ConfigError("purify requires --channel FILE.json")
    try:
        rep = channel_from_json(Path(args.channel))
    except FileNotFoundError as exc:
        raise ConfigError(f"channel file not found: {args.channel}") from exc
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad channel file {args.channel}: {exc}") from exc
    if args.dry_run:
        return {"validated": True}
    pure = purify_channel(rep)
    u = pure.unitary
    _write_json(
        outdir,
        "purified.json",
        {
            "unitary": [[[float(z.real), float(z.imag)] for z in row] for row in u],
            "weight": float(pure.weight),
        },
    )
    print(f"dominant Choi weight = {pure.weight:.6f}")
    return {"artifacts": ["purified.json"]}


def _cmd_appendix_a_verify(args, config, outdir: Path) -> dict:
    pp = _Params(_block(config, "appendix-a-verify"), "[appendix_a_verify]")
    delta_mhz = pp.get("delta_mhz", 120.0, cast=float)
    g_over_delta = pp.get("g_over_delta", 0.01, cast=float)
    amp_over_delta = pp.get("amp_over_delta", 0.1, cast=float)
    omega0_ghz = pp.get("omega0_ghz", 4.858, cast=float)
    pp.finish()
    if args.dry_run:
        return {"validated": True}

    delta = TWO_PI * delta_mhz * 1e6
    q = QubitModelParams(
        omega=(TWO_PI * omega0_ghz * 1e9, TWO_PI * omega0_ghz * 1e9 + abs(delta)),
        g=g_over_delta * abs(delta),
        amps=(amp_over_delta * abs(delta), amp_over_delta * abs(delta)),
        drive_freqs=(
            TWO_PI * omega0_ghz * 1e9 + abs(delta),
            TWO_PI * omega0_ghz * 1e9,
        ),
    )
    times = (0.0, 7.3e-9, 41e-9)
    scale = max(q.amps)
    checks: list[tuple[str, float, float]] = []

    gen_p = q.omega_p * (pauli("ZI") / 2 + pauli("IZ") / 2)
    tau = TWO_PI / q.omega_p
    ts = np.linspace(times[1], times[1] + tau, 201)
    avg = np.trapezoid(
        np.array([chain_frame(lab_hamiltonian(q, t), gen_p, t) for t in ts]), ts, axis=0
    ) / tau
    checks.append(
        ("mean-frame average", float(np.abs(avg - mean_frame_hamiltonian(q, times[1] + tau / 2)).max()), 0.01 * scale)
    )
    r_g = abs(q.g / q.delta)
    checks.append(
        (
            "coupling Schrieffer-Wolff",
            max(
                float(np.abs(schrieffer_wolff(mean_frame_hamiltonian(q, t), coupling_sw_generator(q)) - decoupled_hamiltonian(q, t)).max())
                for t in times
            ),
            10 * r_g**2 * scale,
        )
    )
    gen_m = q.omega_m * (pauli("ZI") / 2 - pauli("IZ") / 2)
    checks.append(
        (
            "split frame",
            max(
                float(np.abs(chain_frame(decoupled_hamiltonian(q, t), gen_m, t) - split_frame_hamiltonian(q, t)).max())
                for t in times
            ),
            1e-6 * abs(q.delta),
        )
    )
    r_w = max(abs(a / q.delta) for a in q.amps)
    checks.append(
        (
            "drive Schrieffer-Wolff",
            max(
                float(np.abs(schrieffer_wolff(split_frame_hamiltonian(q, t), drive_sw_generator(q)) - tilted_hamiltonian(q, t)).max())
                for t in times
            ),
            20 * r_w**3 * scale,
        )
    )
    period = np.pi / abs(q.omega_m)
    heff = magnus_average(lambda t: counter_phased_hamiltonian(q, t), period, order=1, n_points=2001)
    co = pauli_coefficients(heff)
    rates = double_drive_rates(q.g, q.delta, *q.amps)
    checks.append(("Magnus average (zx)", abs(co["ZX"] - rates.zx), 0.03 * abs(rates.zx)))
    checks.append(("Magnus average (xz)", abs(co["XZ"] - rates.xz), 0.03 * abs(rates.xz)))

    ok = True
    rows = []
    for name, resid, bound in checks:
        status = "pass" if resid < bound else "FAIL"
        ok = ok and resid < bound
        rows.append({"stage": name, "residual": resid, "bound": bound, "status": status})
        print(f"{status}  {name}: residual {resid:.3e} < bound {bound:.3e}")
    _write_json(outdir, "chain_residuals.json", rows)
    if not ok:
        raise ArithmeticError("derivation-chain residual exceeded its truncation bound")
    return {"artifacts": ["chain_residuals.json"]}


def _cmd_anti_crossing(args, config, outdir: Path) -> dict:
    pp = _Params(_block(config, "anti-crossing"), "[anti_crossing]")
    gammas = pp.get("gammas", [0.0, 0.1, 0.2, 0.4], cast=lambda v: [float(g) for g in v])
    x_start = pp.get("x_start", -1.0, cast=float)
    x_stop = pp.get("x_stop", 1.0, cast=float)
    x_points = pp.get("x_points", 81, cast=int)
    pp.finish()
    if x_points < 2 or x_stop <= x_start:
        raise ConfigError("[anti_crossing]: need x_stop > x_start and at least two points")
    if args.dry_run:
        return {"validated": True}
    import csv

    with open(outdir / "anti_crossing.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["gamma", "x", "c1", "c2", "c3"])
        for gamma in gammas:
            for x in np.linspace(x_start, x_stop, x_points):
                c = anti_crossing_model(float(x), gamma)
                w.writerow(
                    [repr(float(gamma)), repr(float(x))]
                    + [repr(float(v)) for v in (c.c1, c.c2, c.c3)]
                )
    return {"artifacts": ["anti_crossing.csv"]}


_HANDLERS = {
    "sweep-freq": _cmd_sweep_freq,
    "sweep-duration": _cmd_sweep_duration,
    "calibrate": _cmd_calibrate,
    "compose": _cmd_compose,
    "rb": _cmd_rb,
    "kak": _cmd_kak,
    "purify": _cmd_purify,
    "appendix-a-verify": _cmd_appendix_a_verify,
    "anti-crossing": _cmd_anti_crossing,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccrkit",
        description="Pulse-level two-transmon simulator and calibration toolkit.",
    )
    parser.add_argument("--version", action="version", version=f"ccrkit {__version__}")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in _HANDLERS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="TOML run configuration")
        sp.add_argument("--device", help="device parameter TOML")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument(
            "-o", "--output-dir",
            default=None,
            help=f"artifact directory (default ${OUTPUT_DIR_ENV} or CWD)",
        )
        sp.add_argument("--dry-run", action="store_true", help="validate the config only")
        sp.add_argument(
            "--jobs", type=int, default=os.cpu_count(),
            help="parallelism degree; results are independent of it",
        )
        if name == "kak":
            sp.add_argument("--matrix", help="4x4 complex matrix as JSON")
        if name == "purify":
            sp.add_argument("--channel", help="channel JSON artifact")
        if name == "compose":
            sp.add_argument("--point", help="operating-point JSON from 'calibrate'")
    return parser


def _config_hash(args) -> str:
    if args.config:
        try:
            blob = Path(args.config).read_bytes()
        except OSError:
            blob = b""
    else:
        relevant = {k: v for k, v in vars(args).items() if k not in ("output_dir", "jobs")}
        blob = json.dumps(relevant, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    outdir = Path(
        args.output_dir
        if args.output_dir is not None
        else os.environ.get(OUTPUT_DIR_ENV, ".")
    )
    start = time.monotonic()
    manifest = {
        "experiment": args.experiment,
        "config_sha256": _config_hash(args),
        "seed": args.seed,
        "version": __version__,
        "jobs": args.jobs,
        "status": "failed",
        "failure_stage": None,
    }
    exit_code = EXIT_OK
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        config = _load_config(args.config)
        if "seed" in config and args.seed is None:
            manifest["seed"] = config["seed"]
        extra = _HANDLERS[args.experiment](args, config, outdir)
        manifest.update(extra)
        manifest["status"] = "validated" if args.dry_run else "ok"
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        manifest["failure_stage"] = "config"
        exit_code = EXIT_CONFIG
    except CalibrationError as exc:
        print(f"error: calibration failed at stage '{exc.stage}': {exc}", file=sys.stderr)
        manifest["failure_stage"] = exc.stage
        exit_code = EXIT_CALIBRATION
    except (ArithmeticError, RBFitError, PurificationError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        manifest["failure_stage"] = "numerical"
        exit_code = EXIT_NUMERICAL
    finally:
        manifest["wall_time_s"] = round(time.monotonic() - start, 3)
        try:
            _write_json(outdir, "manifest.json", manifest)
        except OSError as exc:
            print(f"error: could not write manifest: {exc}", file=sys.stderr)
            exit_code = exit_code or EXIT_CONFIG
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
