from fractions import Fraction

import pytest

import protocols
import stabilizer_sim as ss
from majorana_errors import ArgumentError, ConsistencyError

PLAIN = protocols.TeleportSetup(protocols.SCENARIO_PLAIN)
BRAIDED = protocols.TeleportSetup(protocols.SCENARIO_BRAIDED)


def test_setup_rejects_unknown_scenario():
    with pytest.raises(ArgumentError):
        protocols.TeleportSetup("III")


def test_resource_state():
    state = protocols.shared_resource()
    assert state.n_modes == 12
    assert {(r.j, r.k) for r in state.records} == {(1, 9), (2, 10), (3, 11), (4, 12), (5, 6), (7, 8)}


def test_correction_fixture():
    assert protocols.correct((-1, -1, -1, -1), (1, 1)) == (1, 1)
    assert protocols.correct((-1, 1, 1, 1), (-1, 1)) == (1, 1)


def test_plain_scenario_always_corrects_to_plus():
    for outcome in protocols.teleport_distribution(PLAIN):
        assert outcome.corrected == (1, 1)
    for seed in range(5):
        assert protocols.teleport(PLAIN, seed).corrected == (1, 1)


@pytest.mark.parametrize("setup", [PLAIN, BRAIDED])
@pytest.mark.parametrize("backend", ["stabilizer", "gaussian", "oracle"])
def test_teleportation_is_exact(setup, backend):
    corrected = protocols.corrected_distribution(setup, backend)
    direct = protocols.direct_input_distribution(setup, backend)
    assert protocols.total_variation(corrected, direct) == pytest.approx(0, abs=1e-12)


def test_braided_input_is_random():
    direct = protocols.direct_input_distribution(BRAIDED)
    assert len(direct) > 1
    assert sum(direct.values()) == 1


def test_message_is_uniform_without_bob():
    marginal = protocols.message_marginal(PLAIN)
    assert len(marginal) == 16
    assert set(marginal.values()) == {Fraction(1, 16)}


def test_scenarios_cannot_be_told_apart_perfectly():
    p = protocols.discrimination_probability()
    assert Fraction(1, 2) <= p < 1
    assert p == Fraction(3, 4)


def test_post_preparation_steps_never_see_the_scenario():
    for step in (protocols.teleport_program, protocols.run_teleport, protocols.correct):
        assert not protocols.protocol_reads_scenario(step)
    assert protocols.protocol_reads_scenario(protocols.prepare_input)


def test_transcript_lines():
    lines = protocols.teleport_transcript_lines(protocols.teleport(PLAIN, 0))
    assert len(lines) == 7
    assert '"operator": "i a5 a1"' in lines[0]


def test_sampled_summary():
    summary = protocols.teleport_summary(BRAIDED, trials=400, seed=3, threads=2)
    assert summary["total_variation"] == "0"
    assert sum(summary["sampled_counts"].values()) == 400
    assert summary["two_sample_pvalue"] >= 1e-3


def test_threaded_trials_are_reproducible():
    first = protocols.teleport_trials(BRAIDED, 300, seed=11, threads=3)
    second = protocols.teleport_trials(BRAIDED, 300, seed=11, threads=3)
    assert first == second
    assert len(protocols.split_seeds(11, 3)) == 3


def test_flip_pairs():
    assert protocols.flip_pairs((0, 0)) == []
    assert protocols.flip_pairs((1, 0)) == [(1, 3)]
    assert protocols.flip_pairs((0, 1)) == [(2, 3)]
    assert protocols.flip_pairs((1, 1)) == [(1, 2)]
    with pytest.raises(ArgumentError):
        protocols.flip_pairs((2, 0))


def test_dense_encode_sign_pattern():
    state = protocols.dense_encode(protocols.DenseCodeSetup(), (1, 0))
    assert {tuple(r) for r in state.records} == {(1, 5, -1), (2, 6, 1), (3, 4, -1)}


def test_dense_encode_zero_message_is_identity():
    setup = protocols.DenseCodeSetup()
    assert protocols.dense_encode(setup, (0, 0)) == setup.state
    assert setup.op_log == []


@pytest.mark.parametrize("bits", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_dense_round_trip(bits):
    assert protocols.dense_decode(protocols.dense_encode(protocols.DenseCodeSetup(), bits)) == bits


def test_dense_round_trip_report():
    report = protocols.dense_round_trip()
    assert report["successes"] == 4


def test_encoding_audit_rejects_bob_modes():
    with pytest.raises(ConsistencyError):
        protocols.audit_alice_local([ss.Instruction(ss.BRAID, 1, 5)])
    with pytest.raises(ConsistencyError):
        protocols.audit_alice_local([ss.Instruction(ss.MEASURE, 1, 2)])


def test_unassisted_capacity():
    report = protocols.unassisted_capacity_check(2)
    assert report["max_distinguishable"] == 2
    assert report["bits"] == 1.0
    assert report["entanglement_assisted_bits"] == 2.0
    assert protocols.unassisted_capacity_check(0)["bits"] == 0.0
    with pytest.raises(ArgumentError):
        protocols.unassisted_capacity_check(3)


@pytest.mark.slow
@pytest.mark.parametrize("setup", [PLAIN, BRAIDED], ids=["plain", "braided"])
def test_sampled_teleportation_at_full_scale(setup):
    summary = protocols.teleport_summary(setup, trials=100_000, seed=17, threads=4)
    assert summary["total_variation"] == "0"
    assert sum(summary["sampled_counts"].values()) == 100_000
    assert summary["two_sample_pvalue"] >= 1e-3
