import asyncio
import json
import socket
from dataclasses import replace

import numpy as np
import pytest

import nonlocal_games as ng
from majorana_errors import ArgumentError, ProtocolError
from net_harness import LHV, QUANTUM, SessionConfig, launch_session, run_party, run_referee, run_session_local
from net_harness import wire
from net_harness.conformance import conformance_violations, read_log, replay, write_log
from net_harness.party_client import LhvParty, TapeParty
from net_harness.referee import summarize
from net_harness.source import (N_SLOTS, generate_records, load_tape, settings_of, slot_of, source_generate,
                                split_tapes)

pytestmark = pytest.mark.net


def within(summary, target, sigmas=5):
    return abs(summary["G_hat"] - target) <= sigmas * summary["stderr"]


async def _play(session, make_parties):
    """Referee plus the given parties on one loop; returns (referee summary, party results, log)"""
    log = []
    bound = asyncio.get_running_loop().create_future()
    referee = asyncio.create_task(run_referee(session, log=log, ready=bound.set_result))
    port = await bound
    parties = make_parties(port)
    results = await asyncio.gather(*(party.run() for party in parties), return_exceptions=True)
    return await referee, results, log


def play(session, make_parties):
    return asyncio.run(_play(session, make_parties))


class SilentOnFirstRound(LhvParty):
    async def _handle_setting(self, channel, message):
        if message.round_id == 0:
            return
        await super()._handle_setting(channel, message)


# ---------------------------------------------------------------------------
# Sessions
# ---------------------------------------------------------------------------

def test_quantum_session_wins_every_round():
    summary, log = run_session_local(SessionConfig(rounds=300, mode=QUANTUM, seed=4))
    assert summary["completed"] == 300
    assert summary["G_hat"] == 9.0
    assert summary["stderr"] == 0.0
    assert conformance_violations(log) == []


def test_lhv_parity_tables_session():
    summary, log = run_session_local(SessionConfig(rounds=3000, mode=LHV, seed=2, strategy=ng.parity_strategy()))
    assert within(summary, 7)
    assert summary["tallies"]["3,3"]["wins"] == 0
    assert sum(t["rounds"] for t in summary["tallies"].values()) == 3000
    assert conformance_violations(log) == []


def test_lhv_identical_tables_session():
    strategy = ng.classical_bound(ng.magic_square_game(), identical=True).strategy
    summary, _ = run_session_local(SessionConfig(rounds=3000, mode=LHV, seed=3, strategy=strategy))
    assert within(summary, 3)


def test_lhv_mode_needs_a_strategy():
    with pytest.raises(ArgumentError):
        run_session_local(SessionConfig(rounds=5, mode=LHV))


def test_tape_files_drive_a_session(tmp_path):
    alice, bob = tmp_path / "alice.tape", tmp_path / "bob.tape"
    source_generate(50, 8, str(alice), str(bob))
    session = SessionConfig(rounds=50, mode=QUANTUM, seed=8, alice_tape=str(alice), bob_tape=str(bob))
    summary, _ = run_session_local(session)
    assert summary["G_hat"] == 9.0


def test_parties_receive_the_summary():
    session = SessionConfig(rounds=20, mode=LHV, port=0, strategy=ng.parity_strategy())
    summary, results, _ = play(session, lambda port: [LhvParty(role, ng.parity_strategy(), port=port)
                                                      for role in wire.PARTIES])
    assert results == [summary, summary]


def test_silent_party_aborts_the_round():
    strategy = ng.parity_strategy()
    session = SessionConfig(rounds=3, mode=LHV, port=0, round_timeout=0.3, strategy=strategy)
    summary, _, log = play(session, lambda port: [SilentOnFirstRound(wire.ALICE, strategy, port=port),
                                                  LhvParty(wire.BOB, strategy, port=port)])
    assert summary["aborted"] == 1
    assert summary["completed"] == 2
    assert sum(t["aborted"] for t in summary["tallies"].values()) == 1
    assert conformance_violations(log) == []


def test_missing_tape_entries_abort_rounds():
    _, bob_tape = split_tapes(generate_records(4, 0))
    session = SessionConfig(rounds=4, mode=QUANTUM, port=0, round_timeout=1.0)
    summary, results, _ = play(session, lambda port: [TapeParty(wire.ALICE, {}, port=port),
                                                      TapeParty(wire.BOB, bob_tape, port=port)])
    assert summary["completed"] == 0
    assert summary["aborted"] == 4
    assert summary["G_hat"] is None
    assert results[0]["aborted"] == 4


def test_duplicate_role_is_rejected():
    strategy = ng.parity_strategy()
    session = SessionConfig(rounds=5, mode=LHV, port=0, strategy=strategy)
    summary, results, log = play(session, lambda port: [LhvParty(wire.ALICE, strategy, port=port),
                                                        LhvParty(wire.ALICE, strategy, port=port),
                                                        LhvParty(wire.BOB, strategy, port=port)])
    assert summary["completed"] == 5
    assert sum(isinstance(r, ProtocolError) for r in results) == 1
    assert conformance_violations(log) == []


def test_run_party_plays_from_tape_files(tmp_path):
    alice, bob = tmp_path / "alice.tape", tmp_path / "bob.tape"
    source_generate(12, 1, str(alice), str(bob))
    session = SessionConfig(rounds=12, mode=QUANTUM, port=0, seed=1)

    async def both():
        bound = asyncio.get_running_loop().create_future()
        referee = asyncio.create_task(run_referee(session, ready=bound.set_result))
        party_session = replace(session, port=await bound)
        results = await asyncio.gather(run_party(party_session, wire.ALICE, str(alice)),
                                       run_party(party_session, wire.BOB, str(bob)))
        return await referee, results

    summary, results = asyncio.run(both())
    assert summary["G_hat"] == 9.0
    assert [r["role"] for r in results] == list(wire.PARTIES)
    assert all(r["answered"] == 12 and r["summary"] == summary for r in results)


def test_run_party_needs_its_inputs():
    with pytest.raises(ArgumentError):
        asyncio.run(run_party(SessionConfig(rounds=1, mode=QUANTUM), wire.ALICE))
    with pytest.raises(ArgumentError):
        asyncio.run(run_party(SessionConfig(rounds=1, mode=LHV), wire.BOB))


def free_port():
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.mark.slow
def test_three_process_session(tmp_path):
    log_path = tmp_path / "session.log"
    summary = launch_session(SessionConfig(rounds=40, mode=LHV, port=free_port(), strategy=ng.parity_strategy()),
                             log_path=str(log_path))
    assert summary["completed"] == 40
    assert summary["conformance_violations"] == 0
    assert conformance_violations(read_log(str(log_path))) == []


@pytest.mark.slow
def test_three_process_quantum_session_at_full_scale(tmp_path):
    log_path = tmp_path / "quantum.log"
    summary = launch_session(SessionConfig(rounds=100_000, mode=QUANTUM, seed=8, port=free_port()),
                             log_path=str(log_path))
    assert summary["completed"] == 100_000
    assert summary["G_hat"] == 9.0
    assert within(summary, 9)
    assert summary["conformance_violations"] == 0

    log = read_log(str(log_path))
    replay(log)
    injected = log[:3] + [{"sender": "alice", "receiver": "bob", "kind": "round_outcome", "round_id": 0}] + log[3:]
    assert len(conformance_violations(injected)) == 1
    with pytest.raises(ProtocolError):
        replay(injected)


@pytest.mark.slow
def test_three_process_lhv_session_at_full_scale():
    summary = launch_session(SessionConfig(rounds=100_000, mode=LHV, seed=8, port=free_port(),
                                           strategy=ng.parity_strategy()))
    assert summary["completed"] == 100_000
    assert within(summary, 7)
    assert summary["tallies"]["3,3"]["wins"] == 0


# ---------------------------------------------------------------------------
# Session configuration and the estimator
# ---------------------------------------------------------------------------

def test_session_config_validation():
    with pytest.raises(ArgumentError):
        SessionConfig(rounds=0)
    with pytest.raises(ArgumentError):
        SessionConfig(rounds=1, mode="telepathy")
    with pytest.raises(ArgumentError):
        SessionConfig(rounds=1, round_timeout=0)


def test_standard_error_shrinks_like_inverse_root():
    rng = np.random.default_rng(0)
    session = SessionConfig(rounds=1)
    scaled = []
    for rounds in (1000, 4000, 16000):
        scores = np.where(rng.random(rounds) < 8 / 9, 1, -1).tolist()
        summary = summarize(scores, {}, session)
        assert within(summary, 7)
        scaled.append(summary["stderr"] * np.sqrt(rounds))
    assert max(scaled) / min(scaled) < 1.1


def test_summary_without_rounds_is_json_safe():
    summary = summarize([], {}, SessionConfig(rounds=1))
    assert summary["G_hat"] is None
    json.dumps(summary)


# ---------------------------------------------------------------------------
# Parties
# ---------------------------------------------------------------------------

def test_lhv_party_answers_from_its_table():
    strategy = ng.parity_strategy()
    alice = LhvParty(wire.ALICE, strategy)
    bob = LhvParty(wire.BOB, strategy)
    assert alice.answer(0, 1, None) == (1, 1, 1)
    assert bob.answer(0, 3, None) == (1, -1, 1)


def test_tape_party_needs_a_slot():
    party = TapeParty(wire.BOB, {(0, 0): (1, 1, -1)})
    assert party.answer(0, 1, 0) == (1, 1, -1)
    with pytest.raises(ProtocolError):
        party.answer(0, 1, None)


def test_unknown_role():
    with pytest.raises(ValueError):
        LhvParty("eve", ng.parity_strategy())


# ---------------------------------------------------------------------------
# Source tapes
# ---------------------------------------------------------------------------

def test_slots():
    assert [slot_of(*settings_of(s)) for s in range(N_SLOTS)] == list(range(N_SLOTS))
    assert settings_of(0) == (1, 1)
    assert settings_of(8) == (3, 3)


def test_records_satisfy_every_constraint():
    for record in generate_records(200, 1):
        j, k = record["setting_pair"]
        alpha, beta = record["alpha"], record["beta"]
        assert alpha[k - 1] == beta[j - 1]
        assert alpha[0] * alpha[1] == alpha[2]
        assert beta[0] * beta[1] == -beta[2]


def test_tape_marginals_are_uniform():
    counts = {}
    for record in generate_records(4000, 2):
        j = record["setting_pair"][0]
        key = (j, tuple(record["alpha"]))
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 12
    # 12000 draws per setting, four strings each
    assert all(abs(c - 3000) < 300 for c in counts.values())


def test_presampling_matches_direct_sampling():
    rng = np.random.default_rng(6)
    quantum = ng.quantum_distribution()
    direct = {}
    for _ in range(3000):
        j, k = (int(x) for x in rng.integers(1, 4, size=2))
        alpha, _ = ng.sample_joint(quantum, j, k, rng)
        direct[(j, alpha)] = direct.get((j, alpha), 0) + 1
    assert len(direct) == 12
    assert {alpha for _, alpha in direct} == {tuple(r["alpha"]) for r in generate_records(50, 0)}


def test_tapes_are_deterministic(tmp_path):
    paths = [tmp_path / name for name in ("a1", "b1", "a2", "b2", "a3", "b3")]
    source_generate(30, 5, str(paths[0]), str(paths[1]))
    source_generate(30, 5, str(paths[2]), str(paths[3]))
    source_generate(30, 6, str(paths[4]), str(paths[5]))
    assert paths[0].read_bytes() == paths[2].read_bytes()
    assert paths[1].read_bytes() == paths[3].read_bytes()
    assert paths[0].read_bytes() != paths[4].read_bytes()


def test_tape_files_hold_only_own_half(tmp_path):
    alice, bob = tmp_path / "alice.tape", tmp_path / "bob.tape"
    assert source_generate(3, 0, str(alice), str(bob)) == 3 * N_SLOTS
    first = json.loads(alice.read_text().splitlines()[0])
    assert set(first) == {"round", "setting_pair", "alpha"}
    tape = load_tape(str(bob))
    assert len(tape) == 3 * N_SLOTS
    assert split_tapes(generate_records(3, 0))[1] == tape


# ---------------------------------------------------------------------------
# Wire format and conformance
# ---------------------------------------------------------------------------

def test_wire_ignores_unknown_fields():
    message = wire.decode(b'{"version": 1, "kind": "hello", "role": "alice", "colour": "blue"}')
    assert message.role == wire.ALICE
    assert wire.decode(wire.encode(message)) == message


@pytest.mark.parametrize("line", [
    "not json",
    '{"kind": "hello", "role": "alice"}',
    '{"version": 2, "kind": "hello", "role": "alice"}',
    '{"version": 1, "kind": "shout"}',
    '{"version": 1, "kind": "round_setting", "round_id": 3}',
    '{"version": 1, "kind": "round_outcome", "outcome": [1, 0, 1]}',
    '{"version": 1, "kind": "hello", "role": "eve"}',
])
def test_wire_rejects_malformed(line):
    with pytest.raises(ProtocolError):
        wire.decode(line)


def test_conformance_rejects_party_to_party():
    log = [
        {"sender": "referee", "receiver": "alice", "kind": "round_setting", "round_id": 0, "setting": 1},
        {"sender": "alice", "receiver": "bob", "kind": "round_outcome", "round_id": 0},
    ]
    violations = conformance_violations(log)
    assert len(violations) == 1
    assert "parties may not exchange" in violations[0]
    with pytest.raises(ProtocolError):
        replay(log)


def test_conformance_rejects_out_of_pattern_messages():
    log = [
        {"sender": "alice", "receiver": "referee", "kind": "round_outcome", "round_id": 0},
        {"sender": "bob", "receiver": "referee", "kind": "round_setting", "round_id": 0},
        {"sender": "referee", "receiver": "bob", "kind": "round_outcome", "round_id": 0},
    ]
    assert len(conformance_violations(log)) == 3


def test_captured_session_replays_cleanly(tmp_path):
    _, log = run_session_local(SessionConfig(rounds=10, mode=LHV, strategy=ng.parity_strategy()))
    path = tmp_path / "log.jsonl"
    write_log(log, str(path))
    replay(read_log(str(path)))
    kinds = {(entry["sender"], entry["kind"]) for entry in log}
    assert ("referee", "round_setting") in kinds
    assert ("alice", "round_outcome") in kinds
