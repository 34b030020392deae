"""Tests for the calibration pipeline, gate composition and artifact I/O.

Heavy three-level end-to-end runs live in the acceptance suite; here the
stages are exercised on synthetic data and on the fast qubit-level model.
"""

import dataclasses
import math

import numpy as np
import pytest

from ccrkit.device import reference_device
from ccrkit.experiments import (
    DEFAULT_CR_DURATION,
    ECHOED_CX_SAMPLES,
    SX_SAMPLES,
    CalibrationError,
    OperatingPoint,
    SweepGrid2D,
    calibrate_cancellation,
    calibrate_cr_amplitude,
    canonical_entangler,
    compose_iswap,
    compose_iswap_echoed_cx,
    compose_swap,
    compose_swap_echoed_cx,
    effective_generator,
    find_operating_point,
    find_optimal_duration,
    local_rotation_xy,
    local_rotation_xyz,
    read_duration_csv,
    read_sweep_csv,
    sweep_duration,
    sweep_frequencies,
    write_duration_csv,
    write_sweep_csv,
    _refine_peak,
)
from ccrkit.kak import CartanCoefficients, kak_decompose
from ccrkit.operators import kron
from ccrkit.propagate import propagate_unitary

TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="module")
def qubit_device():
    return dataclasses.replace(reference_device(), dims=(2, 2))


def _gaussian_ridge_grid(slope0, icpt0, slope1, icpt1, *, n=21, span=20.0, width=3.0):
    """Grid whose two population ridges are straight lines.

    The subsystem-1 ridge is d0 = icpt0 + slope0*d1; the subsystem-0 ridge
    is d1 = icpt1 + slope1*d0.  Returns the grid and the analytic crossing.
    """
    d0 = np.linspace(-span, span, n)
    d1 = np.linspace(-span, span, n)
    a0 = d0[:, None]
    a1 = d1[None, :]
    pops = np.empty((n, n, 2))
    pops[:, :, 1] = np.exp(-((a0 - (icpt0 + slope0 * a1)) ** 2) / (2 * width**2))
    pops[:, :, 0] = np.exp(-((a1 - (icpt1 + slope1 * a0)) ** 2) / (2 * width**2))
    x1 = (icpt1 + slope1 * icpt0) / (1.0 - slope0 * slope1)
    x0 = icpt0 + slope0 * x1
    return SweepGrid2D(d0, d1, pops), (x0, x1)


class TestRefinePeak:
    def test_exact_on_quadratic(self):
        x = np.arange(11, dtype=float)
        for true_peak in (3.3, 5.0, 7.85):
            y = 1.0 - (x - true_peak) ** 2
            assert _refine_peak(y) == pytest.approx(true_peak, abs=1e-12)

    def test_edge_peak_not_refined(self):
        assert _refine_peak(np.array([5.0, 1.0, 0.0])) == 0.0
        assert _refine_peak(np.array([0.0, 1.0, 5.0])) == 2.0

    def test_nan_neighbors_fall_back_to_argmax(self):
        assert _refine_peak(np.array([np.nan, 1.0, 0.5])) == 1.0


class TestFindOperatingPoint:
    def test_crossing_gaussian_ridges(self):
        grid, expected = _gaussian_ridge_grid(-0.4, 5.0, 0.3, -7.0)
        point = find_operating_point(grid)
        step = grid.detunings0[1] - grid.detunings0[0]
        assert abs(point[0] - expected[0]) < 0.1 * step
        assert abs(point[1] - expected[1]) < 0.1 * step

    def test_symmetric_grid_gives_origin(self):
        grid, _ = _gaussian_ridge_grid(-1.0, 0.0, 1.0, 0.0)
        point = find_operating_point(grid)
        assert abs(point[0]) < 1e-9
        assert abs(point[1]) < 1e-9

    def test_parallel_ridges_raise(self):
        # parallel, never intersecting inside the window
        grid, _ = _gaussian_ridge_grid(0.0, 15.0, 0.0, 1e4)
        with pytest.raises(CalibrationError) as err:
            find_operating_point(grid)
        assert err.value.stage == "operating-point"

    def test_signs_of_reference_style_crossing(self):
        # ridge geometry qualitatively matching the device: the crossing
        # sits at positive detuning on axis 0 and negative on axis 1.
        grid, expected = _gaussian_ridge_grid(0.1, 10.0, 0.2, -45.0, span=60.0, n=41)
        point = find_operating_point(grid)
        assert point[0] > 0.0 and point[1] < 0.0
        assert point[0] == pytest.approx(expected[0], abs=0.5)
        assert point[1] == pytest.approx(expected[1], abs=0.5)


class TestSweepFrequencies:
    def test_rejects_bad_axes(self, qubit_device):
        amps = (1e6, 1e6)
        with pytest.raises(ValueError):
            sweep_frequencies(qubit_device, amps, np.array([]), np.array([0.0]))
        with pytest.raises(ValueError):
            sweep_frequencies(
                qubit_device, amps, np.array([1.0, 0.0]), np.array([0.0, 1.0])
            )

    def test_zero_amplitude_leaves_ground_state(self, qubit_device):
        axis = TWO_PI * np.array([-5e6, 5e6])
        grid = sweep_frequencies(
            qubit_device, (0.0, 0.0), axis, axis, duration=300, risefall=64, substeps=4
        )
        assert grid.failures == ()
        assert np.all(grid.populations < 1e-3)

    def test_shape_and_axes(self, qubit_device):
        a0 = TWO_PI * np.array([-5e6, 0.0, 5e6])
        a1 = TWO_PI * np.array([-5e6, 5e6])
        grid = sweep_frequencies(
            qubit_device, (0.0, 0.0), a0, a1, duration=300, risefall=64, substeps=4
        )
        assert grid.populations.shape == (3, 2, 2)
        np.testing.assert_allclose(grid.detunings0, a0)


class TestCrAmplitude:
    def test_quarter_turn_at_calibrated_amplitude(self, qubit_device):
        from ccrkit.pulses import build_cr_schedule

        amp = calibrate_cr_amplitude(qubit_device, substeps=8)
        sched = build_cr_schedule(qubit_device, amp, 0.0, DEFAULT_CR_DURATION)
        res = propagate_unitary(qubit_device, sched, substeps=8)
        c = kak_decompose(res.subspace).coefficients
        assert c.c1 == pytest.approx(math.pi / 4, rel=2e-3)
        assert abs(c.c2) < 0.03 and abs(c.c3) < 0.03

    def test_matches_effective_rate_estimate(self, qubit_device):
        from ccrkit.effective import double_drive_rates

        amp = calibrate_cr_amplitude(qubit_device, substeps=8)
        rates = double_drive_rates(qubit_device.g, qubit_device.delta, amp, 0.0)
        from ccrkit.pulses import GaussianSquare

        env = GaussianSquare(DEFAULT_CR_DURATION, 1.0, 64.0, 128)
        t_eff = float(np.real(env.samples()).sum()) * qubit_device.dt
        assert abs(rates.zx) * t_eff == pytest.approx(math.pi / 4, rel=0.05)

    def test_unreachable_angle_raises(self, qubit_device):
        with pytest.raises(CalibrationError) as err:
            calibrate_cr_amplitude(qubit_device, duration=260, risefall=128)
        assert err.value.stage == "cr-amplitude"


class TestCancellation:
    def test_no_crosstalk_needs_no_cancellation(self, qubit_device):
        amps = (TWO_PI * 40e6, TWO_PI * 20e6)
        det = (
            -amps[1] ** 2 / (2 * qubit_device.delta),
            amps[0] ** 2 / (2 * qubit_device.delta),
        )
        canc = calibrate_cancellation(qubit_device, amps, det, 600, substeps=6)
        assert abs(canc[0]) < 0.02 * amps[1]
        assert abs(canc[1]) < 0.02 * amps[0]

    def test_recovers_injected_crosstalk(self, qubit_device):
        leaky = dataclasses.replace(qubit_device, crosstalk=0.03)
        amps = (TWO_PI * 40e6, TWO_PI * 20e6)
        det = (
            -amps[1] ** 2 / (2 * leaky.delta),
            amps[0] ** 2 / (2 * leaky.delta),
        )
        frame = (leaky.omega[0] + det[1], leaky.omega[1] + det[0])

        def residual(canc):
            from ccrkit.pulses import build_ccr_schedule
            from ccrkit.experiments import _local_residual

            sched = build_ccr_schedule(leaky, amps, det, 600, cancellation=canc)
            return _local_residual(effective_generator(leaky, sched, frame, substeps=6))

        before = residual((0j, 0j))
        canc = calibrate_cancellation(leaky, amps, det, 600, substeps=6)
        after = residual(canc)
        assert after < 0.01 * before
        assert abs(canc[0]) > 0.0 or abs(canc[1]) > 0.0


class TestDurationSweep:
    def test_cartan_sum_grows_with_duration(self, qubit_device):
        amps = (TWO_PI * 60e6, TWO_PI * 30e6)
        det = (
            -amps[1] ** 2 / (2 * qubit_device.delta),
            amps[0] ** 2 / (2 * qubit_device.delta),
        )
        results = sweep_duration(
            qubit_device, amps, det, [400, 700, 1000], substeps=6
        )
        totals = [c.c1 + c.c2 for _, c in results]
        assert totals[0] < totals[1] < totals[2]

    def test_qpt_path_matches_exact_path(self, qubit_device):
        amps = (TWO_PI * 60e6, TWO_PI * 30e6)
        det = (
            -amps[1] ** 2 / (2 * qubit_device.delta),
            amps[0] ** 2 / (2 * qubit_device.delta),
        )
        exact = sweep_duration(qubit_device, amps, det, [600], substeps=6)
        tomo = sweep_duration(
            qubit_device, amps, det, [600], substeps=6, path="qpt", shots=None
        )
        np.testing.assert_allclose(
            exact[0][1].as_array(), tomo[0][1].as_array(), atol=1e-8
        )

    def test_rejects_bad_arguments(self, qubit_device):
        with pytest.raises(ValueError):
            sweep_duration(qubit_device, (0.0, 0.0), (0.0, 0.0), [600], path="magic")
        with pytest.raises(ValueError):
            sweep_duration(qubit_device, (0.0, 0.0), (0.0, 0.0), [100])


class TestFindOptimalDuration:
    @staticmethod
    def _linear_results(slope1, slope2, offset1=0.0, offset2=0.0):
        durations = range(400, 1601, 100)
        return [
            (
                d,
                CartanCoefficients(offset1 + slope1 * d, offset2 + slope2 * d, 0.0),
            )
            for d in durations
        ]

    def test_unique_root_of_linear_sum(self):
        # c1 + c2 = (1e-3 + 6e-4) * d = pi/2  =>  d = 981.7...
        results = self._linear_results(1e-3, 6e-4)
        root = find_optimal_duration(results)
        assert root == pytest.approx((math.pi / 2) / 1.6e-3, rel=1e-9)

    def test_no_crossing_raises(self):
        results = self._linear_results(1e-5, 1e-5)
        with pytest.raises(CalibrationError) as err:
            find_optimal_duration(results)
        assert err.value.stage == "duration"

    def test_multiple_crossings_raise(self):
        results = [
            (400, CartanCoefficients(1.0, 0.0, 0.0)),
            (600, CartanCoefficients(2.0, 0.0, 0.0)),
            (800, CartanCoefficients(1.0, 0.0, 0.0)),
            (1000, CartanCoefficients(2.0, 0.0, 0.0)),
        ]
        with pytest.raises(CalibrationError):
            find_optimal_duration(results)


def _cartan_of(u):
    return kak_decompose(u).coefficients.as_array()


class TestEchoIdentities:
    """Matrix-level oracles for the echo constructions."""

    def test_two_blocks_with_xy_locals_give_iswap_class(self):
        block = canonical_entangler()
        local = local_rotation_xy()
        u = block @ kron(local, local) @ block @ kron(local, local)
        np.testing.assert_allclose(
            _cartan_of(u), [math.pi / 2, math.pi / 2, 0.0], atol=1e-12
        )

    def test_three_blocks_with_xyz_locals_give_swap_class(self):
        block = canonical_entangler()
        local = local_rotation_xyz()
        layer = block @ kron(local, local)
        np.testing.assert_allclose(
            _cartan_of(layer @ layer @ layer),
            [math.pi / 2, math.pi / 2, math.pi / 2],
            atol=1e-12,
        )

    def test_single_block_is_not_swap_class(self):
        block = canonical_entangler()
        local = local_rotation_xyz()
        c = _cartan_of(block @ kron(local, local))
        assert not np.allclose(c, [math.pi / 2] * 3, atol=0.1)

    def test_entangler_matches_quarter_turn_coefficients(self):
        np.testing.assert_allclose(
            _cartan_of(canonical_entangler()), [math.pi / 4, math.pi / 4, 0.0], atol=1e-12
        )


def _stub_point(duration=981):
    eye = np.eye(2, dtype=complex)
    return OperatingPoint(
        detunings=(TWO_PI * 15e6, -TWO_PI * 45e6),
        duration=duration,
        amps=(TWO_PI * 114e6, TWO_PI * 49e6),
        cancellation=(0.5e6 + 0.2e6j, 0.0j),
        local_corrections=(eye, eye, eye, eye),
        coefficients=CartanCoefficients(math.pi / 4, math.pi / 4, 0.0),
        global_phase=0.1,
    )


class TestComposition:
    def test_duration_accounting(self, qubit_device):
        point = _stub_point()
        gates = {
            "iswap-ccr": (compose_iswap(qubit_device, point), 2 * 981 + 6 * SX_SAMPLES),
            "swap-ccr": (compose_swap(qubit_device, point), 3 * 981 + 8 * SX_SAMPLES),
            "iswap-cx": (
                compose_iswap_echoed_cx(qubit_device, 1e6),
                2 * ECHOED_CX_SAMPLES + 3 * SX_SAMPLES,
            ),
            "swap-cx": (
                compose_swap_echoed_cx(qubit_device, 1e6),
                3 * ECHOED_CX_SAMPLES + 2 * SX_SAMPLES,
            ),
        }
        for label, (gate, samples) in gates.items():
            assert gate.duration_samples == samples, label
            assert gate.duration_seconds(qubit_device) == pytest.approx(
                samples * qubit_device.dt
            )

    def test_published_gate_times(self, qubit_device):
        # the calibrated entangler block reproduces the published totals
        point = _stub_point(duration=981)
        dt = qubit_device.dt
        assert compose_iswap(qubit_device, point).duration_seconds(
            qubit_device
        ) == pytest.approx(647.1e-9, rel=5e-3)
        assert compose_swap(qubit_device, point).duration_seconds(
            qubit_device
        ) == pytest.approx(935.1e-9, rel=5e-3)
        assert compose_iswap_echoed_cx(qubit_device, 1e6).duration_seconds(
            qubit_device
        ) == pytest.approx(775.0e-9, rel=5e-3)
        assert compose_swap_echoed_cx(qubit_device, 1e6).duration_seconds(
            qubit_device
        ) == pytest.approx(1073.6e-9, rel=5e-3)
        assert dt == pytest.approx(0.222e-9)

    def test_ccr_always_faster(self, qubit_device):
        point = _stub_point()
        for ccr, cx in (
            (compose_iswap, compose_iswap_echoed_cx),
            (compose_swap, compose_swap_echoed_cx),
        ):
            t_ccr = ccr(qubit_device, point).duration_seconds(qubit_device)
            t_cx = cx(qubit_device, 1e6).duration_seconds(qubit_device)
            assert t_ccr < t_cx

    def test_targets_are_the_named_gates(self, qubit_device):
        point = _stub_point()
        np.testing.assert_allclose(
            _cartan_of(compose_iswap(qubit_device, point).target),
            [math.pi / 2, math.pi / 2, 0.0],
            atol=1e-12,
        )
        np.testing.assert_allclose(
            _cartan_of(compose_swap(qubit_device, point).target),
            [math.pi / 2] * 3,
            atol=1e-12,
        )

    def test_schedule_spans_the_stated_duration(self, qubit_device):
        point = _stub_point()
        gate = compose_iswap(qubit_device, point)
        assert gate.schedule.duration == gate.duration_samples


class TestArtifacts:
    def test_sweep_csv_round_trip(self, tmp_path):
        grid, _ = _gaussian_ridge_grid(-0.4, 5.0, 0.3, -7.0, n=5)
        path = tmp_path / "sweep.csv"
        write_sweep_csv(grid, path)
        back = read_sweep_csv(path)
        np.testing.assert_allclose(back.detunings0, grid.detunings0, rtol=1e-15)
        np.testing.assert_allclose(back.populations, grid.populations, rtol=1e-15)

    def test_sweep_csv_header(self, tmp_path):
        grid, _ = _gaussian_ridge_grid(0.0, 0.0, 0.0, 0.0, n=3)
        path = tmp_path / "sweep.csv"
        write_sweep_csv(grid, path)
        header = path.read_text().splitlines()[0]
        assert header == "detuning0_hz,detuning1_hz,pop0,pop1"

    def test_duration_csv_round_trip(self, tmp_path):
        results = [
            (600, CartanCoefficients(0.3, 0.2, 0.01)),
            (700, CartanCoefficients(0.4, 0.3, 0.02)),
        ]
        path = tmp_path / "durations.csv"
        write_duration_csv(results, path)
        back = read_duration_csv(path)
        assert back[0][0] == 600 and back[1][0] == 700
        for (_, a), (_, b) in zip(results, back):
            np.testing.assert_allclose(a.as_array(), b.as_array(), rtol=1e-15)

    def test_operating_point_json_round_trip(self):
        point = _stub_point()
        back = OperatingPoint.from_json(point.to_json())
        assert back.duration == point.duration
        np.testing.assert_allclose(back.detunings, point.detunings, rtol=1e-12)
        np.testing.assert_allclose(back.amps, point.amps, rtol=1e-12)
        np.testing.assert_allclose(back.cancellation, point.cancellation, rtol=1e-12)
        np.testing.assert_allclose(
            back.coefficients.as_array(), point.coefficients.as_array(), rtol=1e-12
        )
        for u, v in zip(back.local_corrections, point.local_corrections):
            np.testing.assert_allclose(u, v, atol=1e-15)
