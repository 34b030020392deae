import json
import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from ccrkit import channels as ch
from ccrkit.kak import canonical_gate
from ccrkit.operators import pauli1


def random_unitary(seed):
    return unitary_group.rvs(4, random_state=np.random.default_rng(seed))


def noisy_channel(seed=0, p=0.1):
    return ch.compose_channels(
        ch.unitary_channel(random_unitary(seed)), ch.depolarizing_channel(p)
    )


# ---------------------------------------------------------------------------
# Representations and conversions
# ---------------------------------------------------------------------------


def test_identity_choi_pattern():
    # Choi of the identity is the (unnormalized) maximally entangled
    # projector: ones at ((i,i),(j,j)), zero elsewhere, trace 4.
    choi = ch.identity_channel().choi()
    expected = np.zeros((16, 16), dtype=complex)
    for i in range(4):
        for j in range(4):
            expected[i * 4 + i, j * 4 + j] = 1.0
    np.testing.assert_allclose(choi, expected, atol=1e-14)
    assert np.trace(choi).real == pytest.approx(4.0)


def test_unitary_channel_single_kraus():
    u = random_unitary(3)
    ops = ch.convert(ch.ChannelRep("superop", np.kron(u, u.conj())), "kraus").data
    assert len(ops) == 1
    # Kraus operators carry an arbitrary global phase.
    phase = np.trace(ops[0].conj().T @ u) / 4.0
    np.testing.assert_allclose(ops[0] * phase / abs(phase), u, atol=1e-10)


def test_depolarizing_chi_diagonal():
    p = 0.05
    chi = ch.depolarizing_channel(p).chi()
    expected = np.diag([1.0 - 15.0 * p / 16.0] + [p / 16.0] * 15)
    np.testing.assert_allclose(chi, expected, atol=1e-12)


def test_depolarizing_action():
    rep = ch.depolarizing_channel(0.3)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0
    out = ch.apply_channel(rep, rho)
    np.testing.assert_allclose(out, 0.7 * rho + 0.3 * np.eye(4) / 4.0, atol=1e-12)


@pytest.mark.parametrize("a", ch.REPRESENTATIONS)
@pytest.mark.parametrize("b", ch.REPRESENTATIONS)
def test_round_trips(a, b):
    rep = noisy_channel(seed=7, p=0.08)
    via = ch.convert(ch.convert(ch.convert(rep, a), b), "superop")
    np.testing.assert_allclose(via.data, rep.superop(), atol=1e-10)


def test_conversions_commute():
    rep = noisy_channel(seed=11, p=0.12)
    direct = ch.convert(rep, "chi").data
    via_choi = ch.convert(ch.convert(rep, "choi"), "chi").data
    via_kraus = ch.convert(ch.convert(rep, "kraus"), "chi").data
    np.testing.assert_allclose(via_choi, direct, atol=1e-10)
    np.testing.assert_allclose(via_kraus, direct, atol=1e-10)


def test_trace_preservation_and_positivity_checks():
    rep = noisy_channel(seed=2)
    assert ch.is_trace_preserving(rep)
    assert ch.is_completely_positive(rep)
    # Scaling the superoperator breaks trace preservation.
    scaled = ch.ChannelRep("superop", 0.9 * rep.superop())
    assert not ch.is_trace_preserving(scaled)


def test_kraus_extraction_clips_negative_choi():
    # A unitary channel's Choi matrix is rank 1; a small negative shift of the
    # remaining eigenvalues mimics linear-inversion tomography noise.
    choi = ch.unitary_channel(random_unitary(5)).choi()
    perturbed = choi - 1e-4 * np.eye(16)
    kraus_rep = ch.convert(ch.ChannelRep("choi", perturbed), "kraus")
    assert kraus_rep.clip_mass > 0.0
    assert kraus_rep.clip_mass < 1e-2


def test_invalid_inputs_rejected():
    with pytest.raises(ValueError):
        ch.ChannelRep("bogus", np.eye(16))
    with pytest.raises(ValueError):
        ch.ChannelRep("superop", np.eye(4))
    with pytest.raises(ValueError):
        ch.ChannelRep("kraus", ())
    with pytest.raises(ValueError):
        ch.depolarizing_channel(-0.1)
    with pytest.raises(ValueError):
        ch.convert(noisy_channel(), "bogus")


# ---------------------------------------------------------------------------
# Process tomography
# ---------------------------------------------------------------------------


def test_qpt_exact_identity():
    est = ch.simulate_qpt(ch.identity_channel())
    np.testing.assert_allclose(est.data, np.eye(16), atol=1e-9)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_qpt_exact_recovery(seed):
    rep = noisy_channel(seed=seed, p=0.07)
    est = ch.simulate_qpt(rep, shots=math.inf)
    np.testing.assert_allclose(est.data, rep.superop(), atol=1e-9)


def test_qpt_finite_shots_statistics():
    # 95% of Choi entries should sit within 3 sigma of the truth, with sigma
    # estimated empirically across independent trials.
    truth = ch.depolarizing_channel(0.05)
    truth_choi = truth.choi()
    rng = np.random.default_rng(42)
    trials = [
        ch.convert(ch.simulate_qpt(truth, shots=1024, rng=rng), "choi").data
        for _ in range(20)
    ]
    stack = np.stack(trials)
    sigma = stack.std(axis=0) + 1e-12
    within = np.abs(stack.mean(axis=0) - truth_choi) < 3.0 * sigma / math.sqrt(20)
    assert within.mean() > 0.9


def test_qpt_shot_noise_shrinks_with_shots():
    rep = noisy_channel(seed=9, p=0.02)
    truth = rep.superop()
    err = {}
    for shots in (256, 65536):
        est = ch.simulate_qpt(rep, shots=shots, rng=np.random.default_rng(shots))
        err[shots] = np.linalg.norm(est.data - truth)
    assert err[65536] < 0.3 * err[256]


def test_qpt_argument_validation():
    with pytest.raises(ValueError):
        ch.simulate_qpt(ch.identity_channel(), shots=0, rng=np.random.default_rng(0))
    with pytest.raises(ValueError):
        ch.simulate_qpt(ch.identity_channel(), shots=100)  # rng required


# ---------------------------------------------------------------------------
# Purification
# ---------------------------------------------------------------------------


def test_purify_exact_unitary():
    u = random_unitary(13)
    result = ch.purify_channel(ch.unitary_channel(u))
    assert ch.process_fidelity(u, result.unitary) > 1.0 - 1e-9
    assert result.weight == pytest.approx(1.0, abs=1e-9)


def test_purify_depolarized_unitary():
    p = 0.1
    u = random_unitary(17)
    rep = ch.compose_channels(ch.unitary_channel(u), ch.depolarizing_channel(p))
    result = ch.purify_channel(rep)
    assert ch.process_fidelity(u, result.unitary) > 0.999
    assert result.weight == pytest.approx(1.0 - 15.0 * p / 16.0, abs=1e-6)


def test_purify_amplitude_damped_unitary():
    u = random_unitary(19)
    rep = ch.compose_channels(ch.unitary_channel(u), ch.amplitude_damping_channel(0.05))
    result = ch.purify_channel(rep)
    angle = math.acos(min(1.0, ch.process_fidelity(u, result.unitary)))
    assert angle < 0.05


def test_purify_idempotent():
    rep = noisy_channel(seed=23, p=0.1)
    first = ch.purify_channel(rep)
    second = ch.purify_channel(ch.unitary_channel(first.unitary))
    assert ch.process_fidelity(first.unitary, second.unitary) > 1.0 - 1e-9


def test_purify_weight_monotone_in_noise():
    u = random_unitary(29)
    weights = []
    for p in (0.0, 0.02, 0.05, 0.1, 0.2):
        rep = ch.compose_channels(ch.unitary_channel(u), ch.depolarizing_channel(p))
        weights.append(ch.purify_channel(rep).weight)
    assert all(a > b for a, b in zip(weights, weights[1:]))


def test_purify_rejects_degenerate_channel():
    # The fully depolarizing channel has a totally degenerate Choi spectrum
    # apart from the identity component; at p = 16/15 it is exactly flat.
    with pytest.raises(ch.PurificationError):
        ch.purify_channel(ch.depolarizing_channel(16.0 / 15.0))


def test_purified_unitary_validates_unitarity():
    with pytest.raises(ValueError):
        ch.PurifiedUnitary(unitary=np.diag([1.0, 1.0, 1.0, 2.0]), weight=1.0)


# ---------------------------------------------------------------------------
# Cartan extraction pipeline
# ---------------------------------------------------------------------------


def test_cartan_of_exact_canonical_gate():
    target = np.array([np.pi / 4, np.pi / 4, 0.0])
    rep = ch.unitary_channel(canonical_gate(target))
    np.testing.assert_allclose(ch.cartan_of_channel(rep).as_array(), target, atol=1e-9)


def test_cartan_of_depolarized_canonical_gate():
    target = np.array([np.pi / 4, np.pi / 4, 0.0])
    rep = ch.compose_channels(
        ch.unitary_channel(canonical_gate(target)), ch.depolarizing_channel(0.05)
    )
    np.testing.assert_allclose(ch.cartan_of_channel(rep).as_array(), target, atol=0.02)


def test_cartan_of_identity_channel():
    c = ch.cartan_of_channel(ch.identity_channel())
    np.testing.assert_allclose(c.as_array(), 0.0, atol=1e-9)


def test_cartan_via_tomography_matches_exact_path():
    target = np.array([np.pi / 4, np.pi / 4, 0.0])
    rep = ch.compose_channels(
        ch.unitary_channel(canonical_gate(target)), ch.depolarizing_channel(0.03)
    )
    exact = ch.cartan_of_channel(rep).as_array()
    tomo = ch.cartan_of_channel(ch.simulate_qpt(rep)).as_array()
    np.testing.assert_allclose(tomo, exact, atol=1e-8)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("kind", ch.REPRESENTATIONS)
def test_json_round_trip(kind):
    rep = ch.convert(noisy_channel(seed=31, p=0.06), kind)
    text = ch.channel_to_json(rep)
    restored = ch.channel_from_json(text)
    assert restored.kind == kind
    np.testing.assert_allclose(restored.superop(), rep.superop(), atol=1e-12)
    assert restored.clip_mass == rep.clip_mass


def test_json_layout_is_row_major_pairs():
    rep = ch.identity_channel()
    payload = json.loads(ch.channel_to_json(rep))
    assert payload["representation"] == "superop"
    mat = payload["matrix"]
    assert len(mat) == 256
    assert mat[0] == [1.0, 0.0]  # entry (0, 0)
    assert mat[1] == [0.0, 0.0]  # entry (0, 1): row-major ordering


def test_pauli_observables_complete():
    # The tomography design spans the operator space: the 16-state input
    # matrix must be well conditioned.
    states = ch.qpt_input_states()
    v = np.stack([s.reshape(16) for s in states], axis=1)
    assert np.linalg.cond(v) < 50.0
    # And the 15 nontrivial Paulis plus identity form the measurement basis.
    gram = np.array(
        [
            [np.trace(pauli1(a).conj().T @ pauli1(b)).real for b in "IXYZ"]
            for a in "IXYZ"
        ]
    )
    np.testing.assert_allclose(gram, 2.0 * np.eye(4), atol=1e-12)
